#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dcf/fairness.hpp"
#include "dcf/rng.hpp"

using namespace dcf;
using Catch::Approx;

namespace {

StationProfile station(int id, double rate, double lambda, double payload = 1028.0) {
    StationProfile st;
    st.id = id;
    st.bit_rate = rate;
    st.packet_rate = lambda;
    st.payload_bytes = payload;
    return st;
}

Scenario two_station_desk() {
    Scenario sc;
    sc.stations = {station(1, 1e6, 200.0), station(2, 11e6, 400.0)};
    return sc;
}

Scenario loaded_three() {
    Scenario sc;
    sc.stations = {station(1, 1e6, 1000.0), station(2, 11e6, 500.0), station(3, 11e6, 500.0)};
    return sc;
}

}  // namespace

TEST_CASE("jain index on reference shapes", "[jain]") {
    CHECK(jain_index({3.0, 3.0, 3.0, 3.0}) == Approx(1.0));
    CHECK(jain_index({5.0, 0.0, 0.0}) == Approx(1.0 / 3.0));
    const double x = 0.7;
    CHECK(jain_index({x, x / 11.0, x / 11.0}) == Approx(169.0 / 369.0).epsilon(1e-12));
    CHECK(169.0 / 369.0 == Approx(0.451).margin(0.01));  // the DCF anomaly fingerprint
    CHECK_THROWS_AS(jain_index({0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("log utility behaves like a weighted Kelly objective", "[utility]") {
    const std::vector<double> s{1e6, 2e6};

    const auto pf = utility({1.0, 1.0}, s);
    CHECK(pf.value == Approx(std::log(1e6) + std::log(2e6)));

    const auto weighted = utility({0.5, 1.0}, s);
    CHECK(weighted.value == Approx(0.5 * std::log(1e6) + std::log(2e6)));

    const auto doubled = utility({0.5, 1.0}, {2e6, 4e6});
    CHECK(doubled.value - weighted.value == Approx(1.5 * std::log(2.0)).epsilon(1e-12));

    const auto broken = utility({1.0, 1.0}, {1e6, 0.0});
    CHECK_FALSE(broken.finite);
    CHECK(broken.value == -std::numeric_limits<double>::infinity());
}

TEST_CASE("rate truncation caps what a station can physically carry", "[mlpf]") {
    std::vector<StationProfile> stations{station(1, 1e6, 1000.0), station(2, 11e6, 500.0),
                                         station(3, 11e6, 0.0)};
    const auto trunc = mlpf_truncate(stations);
    CHECK(trunc[0] == Approx(1e6 / (8.0 * 1028.0)).epsilon(1e-12));  // ~121.6 pkt/s
    CHECK(trunc[1] == Approx(500.0));
    CHECK(trunc[2] == 0.0);
}

TEST_CASE("criterion weights normalize by the largest rate", "[mlpf]") {
    const Scenario sc = loaded_three();
    const auto pf = criterion_weights(Criterion::PF, sc);
    CHECK(pf == std::vector<double>{1.0, 1.0, 1.0});

    const auto lpf = criterion_weights(Criterion::LPF, sc);
    CHECK(lpf[0] == Approx(1.0));
    CHECK(lpf[1] == Approx(0.5));

    const auto mlpf = criterion_weights(Criterion::MLPF, sc);
    CHECK(mlpf[0] == Approx(1e6 / (8.0 * 1028.0) / 500.0).epsilon(1e-9));
    CHECK(mlpf[1] == Approx(1.0));
}

TEST_CASE("residual brackets its root along each coordinate", "[stationarity]") {
    const Scenario sc = two_station_desk();
    const auto classes = build_duration_classes(sc);
    const std::vector<double> weights{0.5, 1.0};

    CHECK(stationarity_residual(0, std::vector<double>{1e-6, 0.02}, weights, sc, classes) > 0.0);
    CHECK(stationarity_residual(0, std::vector<double>{0.5, 0.02}, weights, sc, classes) < 0.0);

    // sign flips exactly once on a scan
    int flips = 0;
    std::vector<double> tau{1e-4, 0.02};
    double prev = stationarity_residual(0, tau, weights, sc, classes);
    for (double x = 1e-4; x <= 0.5; x += 0.01) {
        tau[0] = x;
        const double r = stationarity_residual(0, tau, weights, sc, classes);
        if ((r > 0.0) != (prev > 0.0)) ++flips;
        prev = r;
    }
    CHECK(flips == 1);
}

TEST_CASE("slot-time derivative matches a Richardson-refined difference", "[stationarity]") {
    const Scenario sc = two_station_desk();
    const auto classes = build_duration_classes(sc);
    const std::vector<double> tau{0.07, 0.12};

    for (std::size_t j = 0; j < 2; ++j) {
        const double d = slot_time_derivative(j, tau, sc, classes);
        const double h = 1e-5;
        auto tav_at = [&](double x) {
            std::vector<double> probe = tau;
            probe[j] = x;
            return slot_breakdown(probe, sc, classes).t_av;
        };
        const double coarse = (tav_at(tau[j] + h) - tav_at(tau[j] - h)) / (2.0 * h);
        const double fine = (tav_at(tau[j] + h / 2) - tav_at(tau[j] - h / 2)) / h;
        const double richardson = (4.0 * fine - coarse) / 3.0;
        CHECK(d == Approx(richardson).epsilon(1e-6));
    }
}

TEST_CASE("identical stations yield identical residuals and allocations", "[stationarity]") {
    Scenario sc;
    sc.stations = {station(1, 11e6, 300.0), station(2, 11e6, 300.0), station(3, 11e6, 300.0)};
    const auto classes = build_duration_classes(sc);
    const std::vector<double> weights{1.0, 1.0, 1.0};
    const std::vector<double> tau{0.05, 0.05, 0.05};
    const double r0 = stationarity_residual(0, tau, weights, sc, classes);
    for (std::size_t j = 1; j < 3; ++j)
        CHECK(stationarity_residual(j, tau, weights, sc, classes) == Approx(r0).margin(1e-10));

    const auto alloc = solve_allocation(Criterion::PF, sc);
    CHECK(alloc.tau_star[0] == Approx(alloc.tau_star[1]).margin(1e-9));
    CHECK(alloc.tau_star[1] == Approx(alloc.tau_star[2]).margin(1e-9));
    CHECK(alloc.cw_min[0] == alloc.cw_min[1]);
}

TEST_CASE("solver drives every stationarity residual below tolerance", "[allocation]") {
    const Scenario sc = loaded_three();
    const auto classes = build_duration_classes(sc);
    for (auto crit : {Criterion::PF, Criterion::LPF, Criterion::MLPF}) {
        const auto weights = criterion_weights(crit, sc);
        const auto alloc = solve_allocation(crit, sc);
        for (std::size_t j = 0; j < sc.stations.size(); ++j)
            CHECK(std::abs(stationarity_residual(j, alloc.tau_star, weights, sc, classes)) <
                  1e-6);
    }
}

TEST_CASE("rescaling all weights leaves the optimum unchanged", "[allocation][property]") {
    const Scenario sc = loaded_three();
    const auto base = solve_allocation_with_weights(Criterion::LPF, {1.0, 0.5, 0.5}, sc);
    const auto scaled = solve_allocation_with_weights(Criterion::LPF, {4.0, 2.0, 2.0}, sc);
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(base.tau_star[j] == Approx(scaled.tau_star[j]).margin(1e-8));
}

TEST_CASE("equal packet rates collapse LPF onto PF", "[allocation]") {
    Scenario sc;
    sc.stations = {station(1, 1e6, 2000.0), station(2, 11e6, 2000.0)};
    const auto pf = solve_allocation(Criterion::PF, sc);
    const auto lpf = solve_allocation(Criterion::LPF, sc);
    for (std::size_t j = 0; j < 2; ++j)
        CHECK(pf.tau_star[j] == Approx(lpf.tau_star[j]).margin(1e-9));
    CHECK(pf.cw_min == lpf.cw_min);
}

TEST_CASE("first-order proportional-fairness condition holds at the optimum",
          "[allocation][property]") {
    const Scenario sc = two_station_desk();
    const auto classes = build_duration_classes(sc);
    const std::vector<double> weights{1.0, 1.0};
    const auto tau_star = solve_stationarity(weights, sc, classes);
    const auto base =
        throughput_from_slots(slot_breakdown(tau_star, sc, classes), sc).per_station;

    CounterRng rng(4242);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> tau = tau_star;
        for (auto& t : tau) t = std::clamp(t + 3e-5 * (2.0 * rng.uniform01() - 1.0), 1e-6, 0.6);
        const auto perturbed = throughput_from_slots(slot_breakdown(tau, sc, classes), sc);
        double weighted_gain = 0.0;
        for (std::size_t s = 0; s < 2; ++s)
            weighted_gain += weights[s] * (perturbed.per_station[s] - base[s]) / base[s];
        CHECK(weighted_gain <= 1e-6);
    }
}

TEST_CASE("window inversion reverses the chain fixed point", "[inversion]") {
    // at the default window the equilibrium tau must invert back to it
    Scenario sc = loaded_three();
    const auto classes = build_duration_classes(sc);
    const auto eq = solve_equilibrium(sc, classes);
    for (std::size_t s = 0; s < sc.stations.size(); ++s)
        CHECK(invert_tau_to_cw(s, eq.state.tau[s], eq.state.tau, sc, classes) == 32);
}

TEST_CASE("larger targets invert to smaller windows", "[inversion][property]") {
    const Scenario sc = loaded_three();
    const auto classes = build_duration_classes(sc);
    const auto eq = solve_equilibrium(sc, classes);

    int prev = 1 << 20;
    for (double target : {0.02, 0.04, 0.08, 0.16}) {
        const int w0 = invert_tau_to_cw(1, target, eq.state.tau, sc, classes);
        CHECK(w0 < prev);
        prev = w0;
    }
}

TEST_CASE("unreachable targets name the achievable interval", "[inversion]") {
    const Scenario sc = loaded_three();
    const auto classes = build_duration_classes(sc);
    const auto eq = solve_equilibrium(sc, classes);
    CHECK_THROWS_WITH(invert_tau_to_cw(1, 0.999, eq.state.tau, sc, classes),
                      Catch::Matchers::ContainsSubstring("achievable range"));
    CHECK_THROWS_WITH(invert_tau_to_cw(1, 1e-9, eq.state.tau, sc, classes),
                      Catch::Matchers::ContainsSubstring("achievable range"));
}

TEST_CASE("allocation rejects degenerate weight vectors", "[allocation]") {
    Scenario sc;
    sc.stations = {station(1, 11e6, 0.0), station(2, 11e6, 0.0)};
    CHECK_THROWS_AS(solve_allocation(Criterion::LPF, sc), std::invalid_argument);
}

TEST_CASE("gradient of the success-log objective matches finite differences",
          "[stationarity][property]") {
    const Scenario sc = loaded_three();
    const auto classes = build_duration_classes(sc);
    const std::vector<double> weights{0.4, 1.0, 0.7};
    const std::vector<double> tau{0.03, 0.09, 0.06};

    auto log_success = [&](const std::vector<double>& t) {
        const auto slots = slot_breakdown(t, sc, classes);
        double u = 0.0;
        for (std::size_t s = 0; s < 3; ++s)
            u += weights[s] * std::log(slots.per_station_success[s]);
        return u;
    };

    for (std::size_t j = 0; j < 3; ++j) {
        double others = 0.0;
        for (std::size_t k = 0; k < 3; ++k)
            if (k != j) others += weights[k];
        const double analytic = weights[j] / tau[j] - others / (1.0 - tau[j]);

        const double h = 1e-6;
        std::vector<double> up = tau, down = tau;
        up[j] += h;
        down[j] -= h;
        const double numeric = (log_success(up) - log_success(down)) / (2.0 * h);
        CHECK(numeric == Approx(analytic).epsilon(1e-6));
    }
}
