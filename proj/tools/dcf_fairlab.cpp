// dcf-fairlab: analyze, optimize and simulate multirate DCF networks.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dcf/csv.hpp"
#include "dcf/equilibrium.hpp"
#include "dcf/fairness.hpp"
#include "dcf/load.hpp"
#include "dcf/scenario_io.hpp"
#include "dcf/sim.hpp"
#include "dcf/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct RangeSpec {
    double start = 0.0;
    double stop = 0.0;
    int steps = 0;  // 0 when not given
};

RangeSpec parse_range(const std::string& text) {
    RangeSpec r;
    char extra = 0;
    const int n3 = std::sscanf(text.c_str(), "%lf:%lf:%d%c", &r.start, &r.stop, &r.steps, &extra);
    if (n3 == 3) return r;
    const int n2 = std::sscanf(text.c_str(), "%lf:%lf%c", &r.start, &r.stop, &extra);
    if (n2 == 2) return r;
    throw dcf::SchemaError("--range", "expected A:B or A:B:N, got '" + text + "'");
}

dcf::Criterion parse_criterion(const std::string& name) {
    if (name == "pf") return dcf::Criterion::PF;
    if (name == "lpf") return dcf::Criterion::LPF;
    if (name == "mlpf") return dcf::Criterion::MLPF;
    throw dcf::SchemaError("--criterion", "expected pf|lpf|mlpf, got '" + name + "'");
}

std::size_t station_index(const dcf::Scenario& sc, int id) {
    for (std::size_t s = 0; s < sc.stations.size(); ++s)
        if (sc.stations[s].id == id) return s;
    throw dcf::SchemaError("--station", "no station with id " + std::to_string(id));
}

void write_output(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw dcf::SchemaError(out_path, "cannot open for writing");
    out << content;
}

std::string station_header(const dcf::Scenario& sc, const char* suffix) {
    std::string h;
    for (const auto& st : sc.stations) h += ",s" + std::to_string(st.id) + suffix;
    return h;
}

int cmd_analyze(const std::string& scenario_path, const std::string& out_path) {
    const auto loaded = dcf::load_scenario(scenario_path);
    const auto& sc = loaded.scenario;
    const auto classes = dcf::build_duration_classes(sc);
    const auto eq = dcf::solve_equilibrium(sc, classes);
    const auto load = dcf::load_state(sc);

    std::ostringstream rep;
    rep << "scenario: " << (loaded.name.empty() ? scenario_path : loaded.name) << "\n";
    rep << "stations: " << sc.stations.size() << ", duration classes: " << classes.class_count()
        << ", equilibrium iterations: " << eq.iterations << "\n";
    rep << "station       tau         q    throughput_bps  utilization  loaded\n";
    for (std::size_t s = 0; s < sc.stations.size(); ++s) {
        char line[160];
        std::snprintf(line, sizeof(line), "%7d  %8.6f  %8.6f  %14.1f  %11.4f  %s\n",
                      sc.stations[s].id, eq.state.tau[s], eq.state.q[s],
                      eq.throughput.per_station[s], load.per_station[s].utilization,
                      load.per_station[s].loaded ? "yes" : "no");
        rep << line;
    }
    char tail[160];
    std::snprintf(tail, sizeof(tail), "aggregate_bps: %.1f\njain_normalized: %.4f\n",
                  eq.throughput.aggregate, dcf::jain_index(eq.throughput.normalized));
    rep << tail;
    rep << "network_loaded: " << (load.network_loaded ? "true" : "false") << "\n";
    write_output(out_path, rep.str());
    return kExitOk;
}

int cmd_thresholds(const std::string& scenario_path, int station_id, const std::string& range,
                   const std::string& out_path) {
    const auto loaded = dcf::load_scenario(scenario_path);
    const RangeSpec r = parse_range(range);
    const std::size_t s = station_index(loaded.scenario, station_id);
    const auto result = dcf::load_threshold(s, loaded.scenario, r.start, r.stop);
    if (!result) {
        std::cerr << "no load transition for station " << station_id << " in [" << r.start
                  << ", " << r.stop << "] pkt/s\n";
        return kExitNumeric;
    }
    std::ostringstream rep;
    rep << "station: " << station_id << "\nlambda_star_pkt_s: " << dcf::format_number(*result)
        << "\n";
    write_output(out_path, rep.str());
    return kExitOk;
}

int cmd_optimize(const std::string& scenario_path, const std::string& criterion,
                 const std::string& out_path) {
    const auto loaded = dcf::load_scenario(scenario_path);
    const auto crit = parse_criterion(criterion);
    const auto alloc = dcf::solve_allocation(crit, loaded.scenario);
    const auto doc = dcf::allocation_to_json(loaded.scenario, alloc, loaded.name);
    write_output(out_path, doc.dump(2) + "\n");
    return kExitOk;
}

int cmd_simulate(const std::string& scenario_path, std::uint64_t seed, double duration,
                 double warmup, const std::string& out_path) {
    const auto loaded = dcf::load_scenario(scenario_path);
    dcf::SimConfig cfg;
    cfg.scenario = loaded.scenario;
    cfg.seed = seed;
    cfg.duration = duration;
    cfg.warmup = warmup;
    const auto result = dcf::run_simulation(cfg);

    std::string name = loaded.name.empty() ? scenario_path : loaded.name;
    for (auto& ch : name)
        if (ch == ',' || ch == '\n') ch = ';';
    std::string csv = "scenario,seed" + station_header(cfg.scenario, "_bps") +
                      ",aggregate_bps,jain" + station_header(cfg.scenario, "_ci_bps") + "\n";
    std::vector<std::string> cells{name, std::to_string(seed)};
    for (const auto& st : result.per_station)
        cells.push_back(dcf::format_number(st.throughput_bps));
    cells.push_back(dcf::format_number(result.aggregate_throughput));
    cells.push_back(dcf::format_number(result.jain));
    for (const auto& st : result.per_station)
        cells.push_back(dcf::format_number(st.ci_half_width));
    csv += dcf::csv_row(cells);
    write_output(out_path, csv);
    return kExitOk;
}

int cmd_sweep(const std::string& scenario_path, int station_id, const std::string& range,
              bool log_spacing, const std::string& engines_text, std::uint64_t seed,
              double duration, double warmup, unsigned jobs, const std::string& out_path) {
    const auto loaded = dcf::load_scenario(scenario_path);

    dcf::SweepSpec spec;
    spec.station_id = station_id;
    const RangeSpec r = parse_range(range);
    spec.start = r.start;
    spec.stop = r.stop;
    spec.steps = r.steps > 0 ? r.steps : 20;
    spec.log_spacing = log_spacing;
    station_index(loaded.scenario, station_id);

    spec.engines.clear();
    std::stringstream ss(engines_text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token == "model") spec.engines.push_back(dcf::SweepEngine::Model);
        else if (token == "sim") spec.engines.push_back(dcf::SweepEngine::Sim);
        else if (token == "pf") spec.engines.push_back(dcf::SweepEngine::PF);
        else if (token == "lpf") spec.engines.push_back(dcf::SweepEngine::LPF);
        else if (token == "mlpf") spec.engines.push_back(dcf::SweepEngine::MLPF);
        else throw dcf::SchemaError("--engines", "unknown engine '" + token + "'");
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw dcf::SchemaError("--range", e.what());
    }

    dcf::SimConfig sim_base;
    sim_base.scenario = loaded.scenario;
    sim_base.seed = seed;
    sim_base.duration = duration;
    sim_base.warmup = warmup;

    const auto rows = dcf::run_sweep(loaded.scenario, spec, sim_base, jobs);

    std::string csv = "point,packet_rate,engine,status,aggregate_bps,jain" +
                      station_header(loaded.scenario, "_bps") +
                      station_header(loaded.scenario, "_ci_bps") + ",error\n";
    std::size_t ok = 0;
    for (const auto& row : rows) {
        std::vector<std::string> cells{std::to_string(row.point), dcf::format_number(row.value),
                                       dcf::engine_name(row.engine), row.ok ? "ok" : "failed"};
        if (row.ok) {
            ++ok;
            cells.push_back(dcf::format_number(row.aggregate));
            cells.push_back(dcf::format_number(row.jain));
            for (double v : row.per_station_bps) cells.push_back(dcf::format_number(v));
            if (row.ci_half_width.empty())
                cells.insert(cells.end(), loaded.scenario.stations.size(), "");
            else
                for (double v : row.ci_half_width) cells.push_back(dcf::format_number(v));
            cells.emplace_back("");
        } else {
            cells.insert(cells.end(), 2 + 2 * loaded.scenario.stations.size(), "");
            std::string msg = row.error;
            for (auto& ch : msg)
                if (ch == ',' || ch == '\n') ch = ';';
            cells.push_back(msg);
        }
        csv += dcf::csv_row(cells);
    }
    write_output(out_path, csv);
    return 10 * ok >= 9 * rows.size() ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multirate 802.11 DCF modeling, load analysis, fairness optimization and "
                 "simulation"};
    app.require_subcommand(1);

    std::string scenario_path, out_path, range, criterion = "lpf", engines = "model";
    int station_id = 0;
    std::uint64_t seed = 1;
    double duration = 60.0, warmup = 1.0;
    unsigned jobs = 0;
    bool log_spacing = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", scenario_path, "scenario or allocation file (JSON)")
            ->required();
        cmd->add_option("--out", out_path, "output path (default: stdout)");
    };

    auto* analyze = app.add_subcommand("analyze", "equilibrium, throughput and load report");
    add_common(analyze);

    auto* thresholds =
        app.add_subcommand("thresholds", "packet-rate load threshold of one station");
    add_common(thresholds);
    thresholds->add_option("--station", station_id, "station id")->required();
    thresholds->add_option("--range", range, "search range A:B in pkt/s")->required();

    auto* optimize = app.add_subcommand("optimize", "fair contention-window allocation");
    add_common(optimize);
    optimize->add_option("--criterion", criterion, "pf|lpf|mlpf (default lpf)");

    auto* simulate = app.add_subcommand("simulate", "event-driven MAC simulation, CSV result");
    add_common(simulate);
    simulate->add_option("--seed", seed, "RNG seed (default 1)");
    simulate->add_option("--duration", duration, "simulated seconds (default 60)");
    simulate->add_option("--warmup", warmup, "warmup seconds excluded from stats (default 1)");

    auto* sweep = app.add_subcommand("sweep", "packet-rate sweep across engines, CSV matrix");
    add_common(sweep);
    sweep->add_option("--station", station_id, "station id whose packet rate sweeps")->required();
    sweep->add_option("--range", range, "A:B[:N] in pkt/s (default N=20)")->required();
    sweep->add_flag("--log", log_spacing, "log-spaced points");
    sweep->add_option("--engines", engines, "comma list of model,sim,pf,lpf,mlpf (default model)");
    sweep->add_option("--seed", seed, "base RNG seed (default 1)");
    sweep->add_option("--duration", duration, "simulated seconds per point (default 60)");
    sweep->add_option("--warmup", warmup, "warmup seconds (default 1)");
    sweep->add_option("--jobs", jobs, "worker threads (default: hardware)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInput;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(scenario_path, out_path);
        if (thresholds->parsed())
            return cmd_thresholds(scenario_path, station_id, range, out_path);
        if (optimize->parsed()) return cmd_optimize(scenario_path, criterion, out_path);
        if (simulate->parsed())
            return cmd_simulate(scenario_path, seed, duration, warmup, out_path);
        if (sweep->parsed())
            return cmd_sweep(scenario_path, station_id, range, log_spacing, engines, seed,
                             duration, warmup, jobs, out_path);
    } catch (const dcf::SchemaError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}
