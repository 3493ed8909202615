#pragma once

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dcf/equilibrium.hpp"
#include "dcf/sim.hpp"

namespace dcf {

enum class SweepEngine { Model, Sim, PF, LPF, MLPF };

inline const char* engine_name(SweepEngine e) {
    switch (e) {
        case SweepEngine::Model: return "model";
        case SweepEngine::Sim: return "sim";
        case SweepEngine::PF: return "pf";
        case SweepEngine::LPF: return "lpf";
        case SweepEngine::MLPF: return "mlpf";
    }
    return "?";
}

/// Packet-rate sweep of one station, evaluated by one or more engines.
struct SweepSpec {
    int station_id = 0;
    double start = 0.0;
    double stop = 0.0;
    int steps = 2;
    bool log_spacing = false;
    std::vector<SweepEngine> engines{SweepEngine::Model};

    void validate() const {
        if (!(start < stop)) throw std::invalid_argument("sweep range needs start < stop");
        if (steps < 2) throw std::invalid_argument("sweep needs at least 2 steps");
        if (log_spacing && !(start > 0.0))
            throw std::invalid_argument("log-spaced sweep needs start > 0");
        if (engines.empty()) throw std::invalid_argument("sweep needs at least one engine");
    }

    [[nodiscard]] double value_at(int i) const {
        const double f = static_cast<double>(i) / (steps - 1);
        if (log_spacing) return start * std::pow(stop / start, f);
        return start + (stop - start) * f;
    }
};

struct SweepRow {
    int point = 0;
    double value = 0.0;
    SweepEngine engine = SweepEngine::Model;
    bool ok = false;
    std::string error;
    std::vector<double> per_station_bps;
    std::vector<double> ci_half_width;  // sim-backed engines only
    double aggregate = 0.0;
    double jain = 0.0;
};

inline SweepRow evaluate_sweep_point(const Scenario& base, const SweepSpec& spec, int point,
                                     SweepEngine engine, const SimConfig& sim_base) {
    SweepRow row;
    row.point = point;
    row.value = spec.value_at(point);
    row.engine = engine;

    Scenario sc = base;
    bool found = false;
    for (auto& st : sc.stations)
        if (st.id == spec.station_id) {
            st.packet_rate = row.value;
            found = true;
        }
    if (!found) {
        row.error = "unknown station id " + std::to_string(spec.station_id);
        return row;
    }

    try {
        if (engine == SweepEngine::Model) {
            const EquilibriumResult eq = solve_equilibrium(sc);
            row.per_station_bps = eq.throughput.per_station;
            row.aggregate = eq.throughput.aggregate;
            row.jain = jain_index(eq.throughput.normalized);
        } else {
            SimConfig cfg = sim_base;
            cfg.scenario = sc;
            // One deterministic stream per sweep point.
            cfg.seed = sim_base.seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(point);
            SimResult sr;
            if (engine == SweepEngine::Sim) {
                sr = run_simulation(cfg);
            } else {
                const Criterion crit = engine == SweepEngine::PF    ? Criterion::PF
                                       : engine == SweepEngine::LPF ? Criterion::LPF
                                                                    : Criterion::MLPF;
                sr = replay_allocation(solve_allocation(crit, sc), cfg);
            }
            row.per_station_bps.reserve(sr.per_station.size());
            row.ci_half_width.reserve(sr.per_station.size());
            for (const auto& st : sr.per_station) {
                row.per_station_bps.push_back(st.throughput_bps);
                row.ci_half_width.push_back(st.ci_half_width);
            }
            row.aggregate = sr.aggregate_throughput;
            row.jain = sr.jain;
        }
        row.ok = true;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

/// Runs the whole sweep on `jobs` worker threads; rows come back in input
/// order (point-major, then engine order).
inline std::vector<SweepRow> run_sweep(const Scenario& base, const SweepSpec& spec,
                                       const SimConfig& sim_base, unsigned jobs = 0) {
    spec.validate();
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());

    const std::size_t total = static_cast<std::size_t>(spec.steps) * spec.engines.size();
    std::vector<SweepRow> rows(total);
    std::atomic<std::size_t> cursor{0};

    auto worker = [&] {
        for (std::size_t i = cursor.fetch_add(1); i < total; i = cursor.fetch_add(1)) {
            const int point = static_cast<int>(i / spec.engines.size());
            const SweepEngine engine = spec.engines[i % spec.engines.size()];
            rows[i] = evaluate_sweep_point(base, spec, point, engine, sim_base);
        }
    };

    std::vector<std::thread> pool;
    const unsigned spawn = std::min<std::size_t>(jobs, total);
    pool.reserve(spawn);
    for (unsigned j = 0; j < spawn; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return rows;
}

}  // namespace dcf
