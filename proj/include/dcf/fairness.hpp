#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcf/equilibrium.hpp"

namespace dcf {

enum class Criterion { PF, LPF, MLPF };

inline const char* criterion_name(Criterion c) {
    switch (c) {
        case Criterion::PF: return "pf";
        case Criterion::LPF: return "lpf";
        case Criterion::MLPF: return "mlpf";
    }
    return "?";
}

/// Jain's fairness index (sum x)^2 / (N sum x^2); 1 for equal allocations.
inline double jain_index(const std::vector<double>& values) {
    double sum = 0.0, sum_sq = 0.0;
    for (double v : values) {
        sum += v;
        sum_sq += v * v;
    }
    if (sum_sq == 0.0)
        throw std::invalid_argument("jain_index: all-zero input");
    return sum * sum / (static_cast<double>(values.size()) * sum_sq);
}

struct UtilityValue {
    double value = 0.0;
    bool finite = true;
};

/// Weighted log utility sum_s w_s log(S_s). A zero throughput with positive
/// weight yields -inf with finite = false.
inline UtilityValue utility(const std::vector<double>& weights,
                            const std::vector<double>& throughputs) {
    UtilityValue u;
    for (std::size_t s = 0; s < weights.size(); ++s) {
        if (weights[s] == 0.0) continue;
        if (!(throughputs[s] > 0.0)) {
            u.value = -std::numeric_limits<double>::infinity();
            u.finite = false;
            return u;
        }
        u.value += weights[s] * std::log(throughputs[s]);
    }
    return u;
}

/// Packet rates truncated to what each station can physically carry:
/// lambda*_s = min(lambda_s, R_d / (8 PL)).
inline std::vector<double> mlpf_truncate(const std::vector<StationProfile>& stations) {
    std::vector<double> out(stations.size());
    for (std::size_t s = 0; s < stations.size(); ++s) {
        const auto& st = stations[s];
        const double cap = st.bit_rate / (8.0 * st.payload_bytes);
        out[s] = std::min(st.packet_rate, cap);
    }
    return out;
}

inline std::vector<double> criterion_weights(Criterion c, const Scenario& sc) {
    const std::size_t n = sc.stations.size();
    std::vector<double> w(n, 1.0);
    if (c == Criterion::PF) return w;
    std::vector<double> rates;
    if (c == Criterion::MLPF) {
        rates = mlpf_truncate(sc.stations);
    } else {
        rates.resize(n);
        for (std::size_t s = 0; s < n; ++s) rates[s] = sc.stations[s].packet_rate;
    }
    const double rate_max = *std::max_element(rates.begin(), rates.end());
    if (!(rate_max > 0.0))
        throw std::invalid_argument("criterion_weights: all packet rates are zero");
    for (std::size_t s = 0; s < n; ++s) w[s] = rates[s] / rate_max;
    return w;
}

/// Central-difference derivative of the expected slot time in tau_j.
inline double slot_time_derivative(std::size_t j, std::span<const double> tau, const Scenario& sc,
                                   const DurationClassMap& classes) {
    const double h = std::max(1e-7, 1e-4 * tau[j]);
    std::vector<double> probe(tau.begin(), tau.end());
    probe[j] = tau[j] + h;
    const double up = slot_breakdown(probe, sc, classes).t_av;
    probe[j] = tau[j] - h;
    const double down = slot_breakdown(probe, sc, classes).t_av;
    return (up - down) / (2.0 * h);
}

/// Residual of the j-th stationarity condition of the weighted log utility:
/// w_j/tau_j - sum_{k!=j} w_k/(1-tau_j) - (C/T_av) dT_av/dtau_j.
inline double stationarity_residual(std::size_t j, std::span<const double> tau,
                                    const std::vector<double>& weights, const Scenario& sc,
                                    const DurationClassMap& classes) {
    if (!(tau[j] > 0.0 && tau[j] < 1.0))
        throw std::domain_error("stationarity_residual: tau_j must be inside (0, 1)");
    double other_weights = 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        total += weights[k];
        if (k != j) other_weights += weights[k];
    }
    const double t_av = slot_breakdown(tau, sc, classes).t_av;
    const double dt = slot_time_derivative(j, tau, sc, classes);
    return weights[j] / tau[j] - other_weights / (1.0 - tau[j]) - (total / t_av) * dt;
}

struct AllocOptions {
    double tau_min = 1e-6;
    double tau_max = 0.5;
    double residual_tol = 1e-8;
    int max_sweeps = 400;
    double damping = 0.7;
};

/// Solves the N stationarity equations by damped Jacobi sweeps of
/// per-coordinate bisection. The residual is steep and monotone in its own
/// coordinate, so every 1-D solve brackets; cross-coupling enters only
/// through T_av and contracts under damping.
inline std::vector<double> solve_stationarity(const std::vector<double>& weights,
                                              const Scenario& sc,
                                              const DurationClassMap& classes,
                                              const AllocOptions& opts = {}) {
    const std::size_t n = sc.stations.size();
    std::vector<double> tau(n, 0.02);
    for (std::size_t j = 0; j < n; ++j)
        if (weights[j] == 0.0) tau[j] = opts.tau_min;

    double worst = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        std::vector<double> next(n);
        for (std::size_t j = 0; j < n; ++j) {
            if (weights[j] == 0.0) {
                next[j] = opts.tau_min;
                continue;
            }
            std::vector<double> probe = tau;
            auto f = [&](double x) {
                probe[j] = x;
                return stationarity_residual(j, probe, weights, sc, classes);
            };
            double lo = opts.tau_min, hi = opts.tau_max;
            double flo = f(lo);
            double fhi = f(hi);
            if (flo <= 0.0) {
                next[j] = lo;
                continue;
            }
            if (fhi >= 0.0) {
                next[j] = hi;
                continue;
            }
            for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (f(mid) > 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            next[j] = 0.5 * (lo + hi);
        }

        double step = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            step = std::max(step, std::abs(next[j] - tau[j]));
            tau[j] += opts.damping * (next[j] - tau[j]);
        }

        worst = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (weights[j] > 0.0 && tau[j] > opts.tau_min && tau[j] < opts.tau_max)
                worst = std::max(worst,
                                 std::abs(stationarity_residual(j, tau, weights, sc, classes)));
        if (step < 1e-12 && worst < opts.residual_tol) return tau;
    }
    throw ConvergenceError("stationarity system did not converge, residual " +
                               std::to_string(worst),
                           worst, opts.max_sweeps);
}

/// Finds the integer minimum contention window whose chain fixed point
/// reproduces tau_star for station t, holding the other stations at their
/// allocated probabilities. q and p_eq are re-evaluated self-consistently at
/// every probe window.
inline int invert_tau_to_cw(std::size_t t, double tau_star, const std::vector<double>& tau_all,
                            const Scenario& sc, const DurationClassMap& classes) {
    if (!(tau_star > 0.0 && tau_star < 1.0))
        throw std::domain_error("invert_tau_to_cw: tau_star must be inside (0, 1)");
    const auto& p = sc.params;

    double p_idle = 1.0;
    for (std::size_t j = 0; j < tau_all.size(); ++j)
        if (j != t) p_idle *= 1.0 - tau_all[j];
    const double p_eq =
        std::min(1.0 - (1.0 - sc.stations[t].packet_error_rate) * p_idle, 1.0 - 1e-12);

    auto tau_at = [&](double w0) {
        std::vector<double> tau = tau_all;
        tau[t] = tau_star;
        for (int it = 0; it < 400; ++it) {
            const SlotBreakdown slots = slot_breakdown(tau, sc, classes);
            const double q = queue_nonempty_prob(t, slots, sc, classes);
            const double target =
                closed_form_tau(q, p_eq, p_idle, w0, p.max_backoff_stage, p.retry_limit);
            const double delta = target - tau[t];
            tau[t] += 0.5 * delta;
            if (std::abs(delta) < 1e-13) break;
        }
        return tau[t];
    };

    double lo = 1.0, hi = 65536.0;
    const double at_lo = tau_at(lo);   // largest achievable tau
    const double at_hi = tau_at(hi);   // smallest achievable tau
    auto unreachable = [&]() {
        throw std::domain_error("invert_tau_to_cw: tau_star " + std::to_string(tau_star) +
                                " outside achievable range [" + std::to_string(at_hi) + ", " +
                                std::to_string(at_lo) + "]");
    };
    if (tau_star > at_lo || tau_star < at_hi) unreachable();

    for (int it = 0; it < 80 && hi - lo > 1e-4; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (tau_at(mid) > tau_star)
            lo = mid;
        else
            hi = mid;
    }
    const double w0 = 0.5 * (lo + hi);
    return std::max(1, static_cast<int>(std::lround(w0)));
}

struct Allocation {
    Criterion criterion = Criterion::PF;
    std::vector<double> weights;
    std::vector<double> tau_star;
    std::vector<int> cw_min;
    ThroughputReport predicted;
    double utility = 0.0;
    bool utility_finite = true;
    double jain = 0.0;
};

/// Full allocation pipeline: stationarity solve for tau*, model-predicted
/// throughputs at tau*, utility/Jain scores, and the per-station contention
/// windows realizing tau*.
inline Allocation solve_allocation_with_weights(Criterion criterion,
                                                const std::vector<double>& weights,
                                                const Scenario& sc,
                                                const AllocOptions& opts = {}) {
    if (std::accumulate(weights.begin(), weights.end(), 0.0) <= 0.0)
        throw std::invalid_argument("solve_allocation: weights are all zero");
    const DurationClassMap classes = build_duration_classes(sc);

    Allocation alloc;
    alloc.criterion = criterion;
    alloc.weights = weights;
    alloc.tau_star = solve_stationarity(weights, sc, classes, opts);

    const SlotBreakdown slots = slot_breakdown(alloc.tau_star, sc, classes);
    alloc.predicted = throughput_from_slots(slots, sc);
    for (std::size_t s = 0; s < sc.stations.size(); ++s)
        if (alloc.predicted.per_station[s] > sc.stations[s].bit_rate * (1.0 + 1e-9))
            throw std::runtime_error("solve_allocation: predicted throughput of station " +
                                     std::to_string(sc.stations[s].id) +
                                     " exceeds its bit rate; allocation rejected");

    const UtilityValue u = utility(weights, alloc.predicted.per_station);
    alloc.utility = u.value;
    alloc.utility_finite = u.finite;
    alloc.jain = jain_index(alloc.predicted.normalized);

    alloc.cw_min.resize(sc.stations.size());
    for (std::size_t s = 0; s < sc.stations.size(); ++s)
        alloc.cw_min[s] = invert_tau_to_cw(s, alloc.tau_star[s], alloc.tau_star, sc, classes);
    return alloc;
}

inline Allocation solve_allocation(Criterion criterion, const Scenario& sc,
                                   const AllocOptions& opts = {}) {
    return solve_allocation_with_weights(criterion, criterion_weights(criterion, sc), sc, opts);
}

}  // namespace dcf
