#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "dcf/equilibrium.hpp"

namespace dcf {

/// Mean backoff draw of stage j in slots: (min(2^j, 2^m) * w0 - 1) / 2.
inline double mean_backoff_window(int stage, double w0, int m) {
    return (stage_window(w0, stage, m) - 1.0) / 2.0;
}

/// Expected slot duration seen by station t while it counts down: the slot
/// mix of the network with station t silenced.
inline double residual_slot_time(std::size_t t, const EquilibriumState& eq, const Scenario& sc,
                                 const DurationClassMap& classes) {
    std::vector<double> tau = eq.tau;
    tau[t] = 0.0;
    return slot_breakdown(tau, sc, classes).t_av;
}

/// Mean time to serve one head-of-line packet under saturation: backoff
/// countdowns plus collisions across the retry ladder, plus the final
/// transmission (or drop), averaged over the attempt distribution.
inline double saturation_service_time(std::size_t t, const EquilibriumState& eq,
                                      const Scenario& sc, const DurationClassMap& classes) {
    const auto& st = sc.stations[t];
    const auto& p = sc.params;
    const double p_eq = eq.p_eq[t];
    if (!(p_eq < 1.0))
        throw std::domain_error("saturation_service_time: p_eq at 1, service time diverges");

    const double t_bo = residual_slot_time(t, eq, sc, classes);
    const double t_s = success_duration(st, p);
    // Collision time conditioned on station t transmitting: at least its own
    // frame is on the air.
    const double t_c =
        collision_duration(classes.classes[classes.class_of[t]].duration, p);
    const int r = p.retry_limit;

    double cum_backoff = 0.0;  // sum_{j=0..i} mean window
    double geo = 1.0;          // p_eq^i
    double numerator = 0.0;
    double denominator = 0.0;
    for (int i = 0; i <= r; ++i) {
        cum_backoff += mean_backoff_window(i, st.cw_min, p.max_backoff_stage);
        numerator += geo * (i * t_c + cum_backoff * t_bo + t_s);
        denominator += geo;
        geo *= p_eq;
    }
    numerator += geo * ((r + 1) * t_c + cum_backoff * t_bo);  // drop branch
    denominator += geo;
    return numerator / denominator;
}

struct StationLoad {
    double service_time = 0.0;  // seconds
    double service_rate = 0.0;  // pkt/s
    double utilization = 0.0;   // lambda / service_rate
    bool loaded = false;
};

struct LoadReport {
    std::vector<StationLoad> per_station;
    bool network_loaded = false;
};

/// Per-station saturation service rates and the loaded flags; the network is
/// loaded only when every station offers more than its service rate.
inline LoadReport load_state(const Scenario& sc, const SolveOptions& opts = {}) {
    const DurationClassMap classes = build_duration_classes(sc);
    const EquilibriumResult eq = solve_equilibrium(sc, classes, opts);
    LoadReport report;
    report.per_station.resize(sc.stations.size());
    report.network_loaded = true;
    for (std::size_t t = 0; t < sc.stations.size(); ++t) {
        auto& ld = report.per_station[t];
        ld.service_time = saturation_service_time(t, eq.state, sc, classes);
        ld.service_rate = 1.0 / ld.service_time;
        ld.utilization = sc.stations[t].packet_rate * ld.service_time;
        ld.loaded = ld.utilization > 1.0;
        report.network_loaded = report.network_loaded && ld.loaded;
    }
    return report;
}

/// Packet rate at which station t crosses into its loaded regime, i.e. the
/// root of lambda * T_serv(lambda) = 1. Each probe re-solves the coupled
/// equilibrium; returns nullopt when the range does not bracket a crossing.
inline std::optional<double> load_threshold(std::size_t t, const Scenario& sc, double lo,
                                            double hi, const SolveOptions& opts = {}) {
    auto excess = [&](double lambda) {
        Scenario probe = sc;
        probe.stations[t].packet_rate = lambda;
        const DurationClassMap classes = build_duration_classes(probe);
        const EquilibriumResult eq = solve_equilibrium(probe, classes, opts);
        return lambda * saturation_service_time(t, eq.state, probe, classes) - 1.0;
    };

    double flo = excess(lo);
    double fhi = excess(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) return std::nullopt;

    double mid = 0.5 * (lo + hi);
    for (int i = 0; i < 200; ++i) {
        mid = 0.5 * (lo + hi);
        const double fmid = excess(mid);
        if (std::abs(fmid) < 1e-4) return mid;
        if ((fmid > 0.0) == (fhi > 0.0)) {
            hi = mid;
            fhi = fmid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    return mid;
}

}  // namespace dcf
