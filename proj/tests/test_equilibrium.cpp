#include <catch2/catch_amalgamated.hpp>

#include <chrono>

#include "dcf/equilibrium.hpp"
#include "dcf/markov_oracle.hpp"
#include "dcf/rng.hpp"

using namespace dcf;
using Catch::Approx;

namespace {

StationProfile station(int id, double rate, double lambda, double payload = 1028.0,
                       double per = 0.0) {
    StationProfile st;
    st.id = id;
    st.bit_rate = rate;
    st.packet_rate = lambda;
    st.payload_bytes = payload;
    st.packet_error_rate = per;
    return st;
}

Scenario mixed_rate_scenario(double lambda1) {
    Scenario sc;
    sc.stations = {station(1, 1e6, lambda1), station(2, 11e6, 100.0), station(3, 11e6, 500.0)};
    return sc;
}

}  // namespace

TEST_CASE("saturated single station matches the chain oracle", "[equilibrium][oracle]") {
    Scenario sc;
    sc.stations = {station(1, 11e6, 1e9)};
    const auto eq = solve_equilibrium(sc);

    REQUIRE(eq.state.q[0] == Approx(1.0).margin(1e-9));
    REQUIRE(eq.state.p_eq[0] == Approx(0.0).margin(1e-12));

    const double oracle = chain_oracle(sc.stations[0], 1.0 - 1e-6, 0.0, 1.0, sc.params);
    CHECK(std::abs(eq.state.tau[0] - oracle) / oracle < 1e-3);
    CHECK(eq.state.tau[0] == Approx(2.0 / 33.0).epsilon(1e-3));  // W0 = 32, no failures
}

TEST_CASE("equilibrium is bit-identical across solves", "[equilibrium]") {
    const Scenario sc = mixed_rate_scenario(300.0);
    const auto a = solve_equilibrium(sc);
    const auto b = solve_equilibrium(sc);
    REQUIRE(a.state.tau == b.state.tau);
    REQUIRE(a.state.q == b.state.q);
    REQUIRE(a.throughput.per_station == b.throughput.per_station);
    REQUIRE(a.iterations == b.iterations);
}

TEST_CASE("light traffic is delivered at the offered rate", "[equilibrium]") {
    for (double lambda1 : {2.0, 5.0, 10.0}) {
        const Scenario sc = mixed_rate_scenario(lambda1);
        const auto eq = solve_equilibrium(sc);
        const double offered = lambda1 * 1028.0 * 8.0;
        CHECK(eq.throughput.per_station[0] == Approx(offered).epsilon(0.03));
    }
}

TEST_CASE("slow-station throughput flattens once saturated", "[equilibrium]") {
    const auto at = [](double lambda1) {
        return solve_equilibrium(mixed_rate_scenario(lambda1)).throughput.per_station[0];
    };
    const double s1k = at(1000.0);
    const double s2k = at(2000.0);
    const double s3k = at(3000.0);
    CHECK(std::abs(s2k - s1k) / s1k < 0.02);
    CHECK(std::abs(s3k - s2k) / s2k < 0.02);
}

TEST_CASE("throughput respects physical and offered-load caps", "[equilibrium][property]") {
    CounterRng rng(555);
    const double rates[] = {1e6, 2e6, 5.5e6, 11e6};
    for (int trial = 0; trial < 25; ++trial) {
        Scenario sc;
        const std::size_t n = 1 + rng.uniform_below(6);
        for (std::size_t i = 0; i < n; ++i)
            sc.stations.push_back(station(static_cast<int>(i) + 1, rates[rng.uniform_below(4)],
                                          std::pow(10.0, 3.0 * rng.uniform01()),
                                          200.0 + 1300.0 * rng.uniform01(),
                                          0.3 * rng.uniform01()));
        const auto eq = solve_equilibrium(sc);
        for (std::size_t s = 0; s < n; ++s) {
            CHECK(eq.throughput.per_station[s] <= sc.stations[s].bit_rate);
            CHECK(eq.throughput.per_station[s] <=
                  1.01 * sc.stations[s].packet_rate * sc.stations[s].payload_bytes * 8.0);
            CHECK(eq.state.tau[s] >= 0.0);
            CHECK(eq.state.tau[s] <= 1.0);
            CHECK(eq.state.p_eq[s] ==
                  Approx(1.0 - (1.0 - sc.stations[s].packet_error_rate) *
                                   (1.0 - eq.state.p_col[s])).margin(1e-12));
        }
        double sum = 0.0;
        for (double v : eq.throughput.per_station) sum += v;
        CHECK(eq.throughput.aggregate == Approx(sum).epsilon(1e-12));
    }
}

TEST_CASE("an impossible iteration budget reports the residual", "[equilibrium]") {
    SolveOptions opts;
    opts.max_iterations = 1;
    try {
        solve_equilibrium(mixed_rate_scenario(500.0), opts);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.residual > 0.0);
        CHECK(e.iterations == 1);
    }
}

TEST_CASE("fifty heterogeneous stations converge quickly", "[equilibrium][perf]") {
    CounterRng rng(99);
    Scenario sc;
    const double rates[] = {1e6, 2e6, 5.5e6, 11e6};
    for (int i = 0; i < 50; ++i)
        sc.stations.push_back(station(i + 1, rates[rng.uniform_below(4)],
                                      std::pow(10.0, 1.0 + 2.0 * rng.uniform01()),
                                      200.0 + 1300.0 * rng.uniform01(),
                                      0.2 * rng.uniform01()));

    const auto start = std::chrono::steady_clock::now();
    const auto eq = solve_equilibrium(sc);
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);

    CHECK(elapsed.count() < 1.0);
    CHECK(eq.throughput.aggregate > 0.0);
    INFO("N=50 solve took " << elapsed.count() << " s over " << eq.iterations << " iterations");
}
