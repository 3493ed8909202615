#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcf/fairness.hpp"
#include "dcf/scenario.hpp"

namespace dcf {

/// Input-file violation carrying the offending field path.
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string field_path, const std::string& why)
        : std::runtime_error(field_path + ": " + why), field(std::move(field_path)) {}
    std::string field;
};

struct LoadedScenario {
    Scenario scenario;
    std::string name;
    std::vector<int> cw_min_override;  // non-empty when loaded from an allocation file
};

namespace detail {

inline double require_number(const nlohmann::json& obj, const std::string& path,
                             const char* key, std::optional<double> fallback = {}) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw SchemaError(path + "." + key, "missing required value");
    }
    const auto& v = obj.at(key);
    if (!v.is_number())
        throw SchemaError(path + "." + key, "expected a number, got " + std::string(v.type_name()));
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw SchemaError(path + "." + key, "not finite");
    return d;
}

inline int require_int(const nlohmann::json& obj, const std::string& path, const char* key,
                       std::optional<int> fallback = {}) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw SchemaError(path + "." + key, "missing required value");
    }
    const auto& v = obj.at(key);
    if (!v.is_number_integer())
        throw SchemaError(path + "." + key, "expected an integer, got " + std::string(v.type_name()));
    return v.get<int>();
}

}  // namespace detail

/// Parses a scenario (or allocation) document. `params` durations are given
/// in microseconds and default to the usual 802.11b values; stations list
/// bit_rate in bit/s, lambda in pkt/s and payload in bytes.
inline LoadedScenario parse_scenario(const nlohmann::json& doc, const std::string& origin) {
    if (!doc.is_object()) throw SchemaError(origin, "top level must be an object");

    LoadedScenario out;
    out.name = doc.value("name", std::string{});

    PhyMacParams defaults;
    PhyMacParams& pp = out.scenario.params;
    if (doc.contains("params")) {
        const auto& pj = doc.at("params");
        if (!pj.is_object()) throw SchemaError("params", "must be an object");
        const double us = 1e-6;
        pp.slot_time = detail::require_number(pj, "params", "slot_time", defaults.slot_time / us) * us;
        pp.sifs = detail::require_number(pj, "params", "sifs", defaults.sifs / us) * us;
        pp.difs = detail::require_number(pj, "params", "difs", defaults.difs / us) * us;
        pp.eifs = detail::require_number(pj, "params", "eifs", defaults.eifs / us) * us;
        pp.ack_timeout =
            detail::require_number(pj, "params", "ack_timeout", defaults.ack_timeout / us) * us;
        pp.prop_delay =
            detail::require_number(pj, "params", "prop_delay", defaults.prop_delay / us) * us;
        pp.plcp_preamble_bits =
            detail::require_number(pj, "params", "plcp_preamble_bits", defaults.plcp_preamble_bits);
        pp.plcp_header_bits =
            detail::require_number(pj, "params", "plcp_header_bits", defaults.plcp_header_bits);
        pp.plcp_rate = detail::require_number(pj, "params", "plcp_rate", defaults.plcp_rate);
        pp.mac_header_bytes =
            detail::require_number(pj, "params", "mac_header_bytes", defaults.mac_header_bytes);
        pp.ack_bytes = detail::require_number(pj, "params", "ack_bytes", defaults.ack_bytes);
        pp.cw_min_default = detail::require_int(pj, "params", "cw_min_default", defaults.cw_min_default);
        pp.max_backoff_stage =
            detail::require_int(pj, "params", "max_backoff_stage", defaults.max_backoff_stage);
        pp.retry_limit = detail::require_int(pj, "params", "retry_limit", defaults.retry_limit);
        pp.cw_max = detail::require_int(pj, "params", "cw_max",
                                        pp.cw_min_default << pp.max_backoff_stage);
    }

    if (!doc.contains("stations")) throw SchemaError("stations", "missing required array");
    const auto& stations = doc.at("stations");
    if (!stations.is_array() || stations.empty())
        throw SchemaError("stations", "must be a non-empty array");

    for (std::size_t i = 0; i < stations.size(); ++i) {
        const std::string path = "stations[" + std::to_string(i) + "]";
        const auto& sj = stations.at(i);
        if (!sj.is_object()) throw SchemaError(path, "must be an object");
        StationProfile st;
        st.id = detail::require_int(sj, path, "id", static_cast<int>(i) + 1);
        st.bit_rate = detail::require_number(sj, path, "bit_rate");
        st.packet_rate = detail::require_number(sj, path, "lambda", 0.0);
        st.payload_bytes = detail::require_number(sj, path, "payload", 1028.0);
        st.cw_min = detail::require_int(sj, path, "cw_min", pp.cw_min_default);
        st.packet_error_rate = detail::require_number(sj, path, "packet_error_rate", 0.0);
        out.scenario.stations.push_back(st);
    }

    if (doc.contains("cw_min_override")) {
        const auto& ov = doc.at("cw_min_override");
        if (!ov.is_array() || ov.size() != out.scenario.stations.size())
            throw SchemaError("cw_min_override", "must be an array with one entry per station");
        for (std::size_t i = 0; i < ov.size(); ++i) {
            if (!ov.at(i).is_number_integer())
                throw SchemaError("cw_min_override[" + std::to_string(i) + "]",
                                  "expected an integer");
            const int w = ov.at(i).get<int>();
            out.cw_min_override.push_back(w);
            out.scenario.stations[i].cw_min = w;
        }
    }

    try {
        out.scenario.validate();
    } catch (const std::invalid_argument& e) {
        throw SchemaError("scenario", e.what());
    }
    return out;
}

inline LoadedScenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path, "cannot open file");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(path, e.what());
    }
    return parse_scenario(doc, path);
}

inline nlohmann::json scenario_to_json(const Scenario& sc, const std::string& name = {}) {
    nlohmann::json doc;
    if (!name.empty()) doc["name"] = name;
    const double us = 1e-6;
    const auto& p = sc.params;
    doc["params"] = {{"slot_time", p.slot_time / us},
                     {"sifs", p.sifs / us},
                     {"difs", p.difs / us},
                     {"eifs", p.eifs / us},
                     {"ack_timeout", p.ack_timeout / us},
                     {"prop_delay", p.prop_delay / us},
                     {"plcp_preamble_bits", p.plcp_preamble_bits},
                     {"plcp_header_bits", p.plcp_header_bits},
                     {"plcp_rate", p.plcp_rate},
                     {"mac_header_bytes", p.mac_header_bytes},
                     {"ack_bytes", p.ack_bytes},
                     {"cw_min_default", p.cw_min_default},
                     {"max_backoff_stage", p.max_backoff_stage},
                     {"retry_limit", p.retry_limit},
                     {"cw_max", p.cw_max}};
    doc["stations"] = nlohmann::json::array();
    for (const auto& st : sc.stations)
        doc["stations"].push_back({{"id", st.id},
                                   {"bit_rate", st.bit_rate},
                                   {"lambda", st.packet_rate},
                                   {"payload", st.payload_bytes},
                                   {"cw_min", st.cw_min},
                                   {"packet_error_rate", st.packet_error_rate}});
    return doc;
}

/// Allocation files are scenario files plus a cw_min_override array, so the
/// simulator consumes either kind directly.
inline nlohmann::json allocation_to_json(const Scenario& sc, const Allocation& alloc,
                                         const std::string& name = {}) {
    nlohmann::json doc = scenario_to_json(sc, name);
    doc["cw_min_override"] = alloc.cw_min;
    doc["allocation"] = {{"criterion", criterion_name(alloc.criterion)},
                         {"tau_star", alloc.tau_star},
                         {"weights", alloc.weights},
                         {"predicted_bps", alloc.predicted.per_station},
                         {"predicted_aggregate_bps", alloc.predicted.aggregate},
                         {"utility", alloc.utility_finite ? alloc.utility : -1e308},
                         {"jain", alloc.jain}};
    return doc;
}

}  // namespace dcf
