#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcf/duration_classes.hpp"
#include "dcf/slots.hpp"
#include "dcf/tau.hpp"

namespace dcf {

struct ThroughputReport {
    std::vector<double> per_station;  // bit/s
    std::vector<double> normalized;   // per_station / bit_rate
    double aggregate = 0.0;           // bit/s
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual(residual), iterations(iterations) {}
    double residual;
    int iterations;
};

struct SolveOptions {
    double damping = 0.5;
    double tolerance = 1e-9;
    int max_iterations = 10000;
};

struct EquilibriumResult {
    EquilibriumState state;
    SlotBreakdown slots;
    ThroughputReport throughput;
    int iterations = 0;
};

inline ThroughputReport throughput_from_slots(const SlotBreakdown& slots, const Scenario& sc) {
    ThroughputReport rep;
    const std::size_t n = sc.stations.size();
    rep.per_station.resize(n);
    rep.normalized.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
        const auto& st = sc.stations[s];
        rep.per_station[s] = slots.per_station_success[s] * (1.0 - st.packet_error_rate) *
                             st.payload_bytes * 8.0 / slots.t_av;
        rep.normalized[s] = rep.per_station[s] / st.bit_rate;
        rep.aggregate += rep.per_station[s];
    }
    return rep;
}

/// Damped fixed point over the coupled per-station quantities: tau determines
/// the slot mix, the slot mix determines each queue-nonempty probability, and
/// both feed back into tau.
inline EquilibriumResult solve_equilibrium(const Scenario& sc, const DurationClassMap& classes,
                                           const SolveOptions& opts = {}) {
    const std::size_t n = sc.stations.size();
    EquilibriumState st;
    st.tau.assign(n, 0.0);
    st.q.assign(n, 0.0);
    st.p_eq.assign(n, 0.0);
    st.p_col.assign(n, 0.0);
    st.p_idle_others.assign(n, 1.0);

    const auto& p = sc.params;
    double residual = 0.0;
    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        const SlotBreakdown slots = slot_breakdown(st.tau, sc, classes);

        double dq = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double qn = queue_nonempty_prob(t, slots, sc, classes);
            dq = std::max(dq, std::abs(qn - st.q[t]));
            st.q[t] = qn;
        }

        std::vector<double> prefix(n + 1, 1.0), suffix(n + 1, 1.0);
        for (std::size_t s = 0; s < n; ++s) prefix[s + 1] = prefix[s] * (1.0 - st.tau[s]);
        for (std::size_t s = n; s-- > 0;) suffix[s] = suffix[s + 1] * (1.0 - st.tau[s]);

        double dtau = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            st.p_idle_others[s] = prefix[s] * suffix[s + 1];
            st.p_col[s] = 1.0 - st.p_idle_others[s];
            st.p_eq[s] = 1.0 - (1.0 - sc.stations[s].packet_error_rate) * st.p_idle_others[s];
            st.p_eq[s] = std::min(st.p_eq[s], 1.0 - 1e-12);
            const double target =
                closed_form_tau(st.q[s], st.p_eq[s], st.p_idle_others[s],
                                sc.stations[s].cw_min, p.max_backoff_stage, p.retry_limit);
            dtau = std::max(dtau, std::abs(target - st.tau[s]));
            st.tau[s] += opts.damping * (target - st.tau[s]);
        }

        residual = std::max(dtau, dq);
        if (residual < opts.tolerance) {
            EquilibriumResult res;
            res.slots = slot_breakdown(st.tau, sc, classes);
            res.throughput = throughput_from_slots(res.slots, sc);
            res.state = std::move(st);
            res.iterations = iter;
            return res;
        }
    }
    throw ConvergenceError("equilibrium fixed point did not converge, residual " +
                               std::to_string(residual),
                           residual, opts.max_iterations);
}

inline EquilibriumResult solve_equilibrium(const Scenario& sc, const SolveOptions& opts = {}) {
    return solve_equilibrium(sc, build_duration_classes(sc), opts);
}

}  // namespace dcf
