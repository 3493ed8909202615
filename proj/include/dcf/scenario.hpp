#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "dcf/params.hpp"

namespace dcf {

/// One contending station: its PHY bit rate, offered traffic, frame size,
/// minimum contention window and residual packet error rate.
struct StationProfile {
    int id = 0;
    double bit_rate = 11e6;          // bit/s
    double packet_rate = 0.0;        // pkt/s (Poisson arrivals)
    double payload_bytes = 1028.0;
    int cw_min = 32;
    double packet_error_rate = 0.0;  // in [0, 1)

    void validate() const {
        if (!(bit_rate > 0.0))
            throw std::invalid_argument("station.bit_rate must be > 0");
        if (!(packet_rate >= 0.0))
            throw std::invalid_argument("station.packet_rate must be >= 0");
        if (!(payload_bytes > 0.0))
            throw std::invalid_argument("station.payload_bytes must be > 0");
        if (cw_min < 1)
            throw std::invalid_argument("station.cw_min must be >= 1");
        if (!(packet_error_rate >= 0.0 && packet_error_rate < 1.0))
            throw std::invalid_argument("station.packet_error_rate must be in [0, 1)");
    }
};

struct Scenario {
    PhyMacParams params;
    std::vector<StationProfile> stations;

    [[nodiscard]] std::size_t size() const { return stations.size(); }

    void validate() const {
        params.validate();
        if (stations.empty())
            throw std::invalid_argument("scenario needs at least one station");
        std::unordered_set<int> ids;
        for (const auto& st : stations) {
            st.validate();
            if (!ids.insert(st.id).second)
                throw std::invalid_argument("duplicate station id " + std::to_string(st.id));
        }
    }
};

}  // namespace dcf
