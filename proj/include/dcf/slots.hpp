#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "dcf/airtime.hpp"
#include "dcf/duration_classes.hpp"
#include "dcf/scenario.hpp"

namespace dcf {

/// Converged (or intermediate) per-station chain quantities.
struct EquilibriumState {
    std::vector<double> tau;            // per-slot transmission probability
    std::vector<double> q;              // queue-nonempty probability
    std::vector<double> p_eq;           // 1 - (1-P_e)(1-P_col)
    std::vector<double> p_col;          // collision probability given a transmission
    std::vector<double> p_idle_others;  // prod_{j != s} (1 - tau_j)
};

/// Decomposition of the generic slot into idle / success / error / collision
/// outcomes, with the expected duration of each component.
struct SlotBreakdown {
    double p_tr = 0.0;         // at least one station transmits
    double t_idle = 0.0;       // (1 - p_tr) * sigma
    double t_success = 0.0;
    double t_error = 0.0;
    double t_collision = 0.0;
    double t_av = 0.0;         // sum of the four components
    std::vector<double> per_station_success;   // exactly station s transmits
    std::vector<double> per_class_collision;   // collision charged to class d
    std::vector<double> per_class_internal;
    std::vector<double> per_class_external;
};

/// Slot-outcome probabilities and expected slot times for a given tau vector.
/// A multi-transmitter slot is charged to the slowest involved class.
inline SlotBreakdown slot_breakdown(std::span<const double> tau, const Scenario& sc,
                                    const DurationClassMap& classes) {
    const std::size_t n = sc.stations.size();
    const std::size_t nc = classes.class_count();
    SlotBreakdown out;
    out.per_station_success.assign(n, 0.0);
    out.per_class_collision.assign(nc, 0.0);
    out.per_class_internal.assign(nc, 0.0);
    out.per_class_external.assign(nc, 0.0);

    // prod_{j != s} (1 - tau_j) without divisions (tau may touch 1).
    std::vector<double> prefix(n + 1, 1.0), suffix(n + 1, 1.0);
    for (std::size_t s = 0; s < n; ++s) prefix[s + 1] = prefix[s] * (1.0 - tau[s]);
    for (std::size_t s = n; s-- > 0;) suffix[s] = suffix[s + 1] * (1.0 - tau[s]);
    out.p_tr = 1.0 - prefix[n];

    for (std::size_t s = 0; s < n; ++s)
        out.per_station_success[s] = tau[s] * prefix[s] * suffix[s + 1];

    // Per-class silence products, then lower/higher-class prefixes.
    std::vector<double> silent(nc, 1.0), single(nc, 0.0);
    for (std::size_t c = 0; c < nc; ++c) {
        const auto& members = classes.classes[c].members;
        const std::size_t lc = members.size();
        std::vector<double> cpre(lc + 1, 1.0), csuf(lc + 1, 1.0);
        for (std::size_t i = 0; i < lc; ++i) cpre[i + 1] = cpre[i] * (1.0 - tau[members[i]]);
        for (std::size_t i = lc; i-- > 0;) csuf[i] = csuf[i + 1] * (1.0 - tau[members[i]]);
        silent[c] = cpre[lc];
        for (std::size_t i = 0; i < lc; ++i) single[c] += tau[members[i]] * cpre[i] * csuf[i + 1];
    }
    std::vector<double> no_lower(nc, 1.0), no_higher(nc, 1.0);
    for (std::size_t c = 1; c < nc; ++c) no_lower[c] = no_lower[c - 1] * silent[c - 1];
    for (std::size_t c = nc - 1; c-- > 0;) no_higher[c] = no_higher[c + 1] * silent[c + 1];

    const auto& p = sc.params;
    for (std::size_t c = 0; c < nc; ++c) {
        const double tr_class = 1.0 - silent[c];
        const double internal = no_higher[c] * no_lower[c] * (tr_class - single[c]);
        const double external = tr_class * (1.0 - no_higher[c]) * no_lower[c];
        out.per_class_internal[c] = internal;
        out.per_class_external[c] = external;
        out.per_class_collision[c] = internal + external;
        out.t_collision +=
            out.per_class_collision[c] * collision_duration(classes.classes[c].duration, p);
    }

    out.t_idle = (1.0 - out.p_tr) * p.slot_time;
    for (std::size_t s = 0; s < n; ++s) {
        const auto& st = sc.stations[s];
        const double ps = out.per_station_success[s];
        out.t_success += ps * (1.0 - st.packet_error_rate) * success_duration(st, p);
        out.t_error += ps * st.packet_error_rate * error_duration(st, p);
    }
    out.t_av = out.t_idle + out.t_collision + out.t_success + out.t_error;
    return out;
}

/// Probability that station t's queue is non-empty after a slot: one minus
/// the no-arrival probability, averaged over the four slot types.
inline double queue_nonempty_prob(std::size_t t, const SlotBreakdown& slots, const Scenario& sc,
                                  const DurationClassMap& classes) {
    const double lambda = sc.stations[t].packet_rate;
    if (lambda <= 0.0) return 0.0;
    const auto& p = sc.params;
    auto arrival = [lambda](double duration) { return -std::expm1(-lambda * duration); };

    double q = (1.0 - slots.p_tr) * arrival(p.slot_time);
    for (std::size_t s = 0; s < sc.stations.size(); ++s) {
        const auto& st = sc.stations[s];
        const double ps = slots.per_station_success[s];
        q += ps * (1.0 - st.packet_error_rate) * arrival(success_duration(st, p));
        q += ps * st.packet_error_rate * arrival(error_duration(st, p));
    }
    for (std::size_t c = 0; c < classes.class_count(); ++c)
        q += slots.per_class_collision[c] *
             arrival(collision_duration(classes.classes[c].duration, p));
    return q;
}

}  // namespace dcf
