#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace dcf {

/// Shared PHY/MAC timing constants. Defaults follow the usual 802.11b
/// long-preamble parameter set. Durations are in seconds, rates in bit/s.
struct PhyMacParams {
    double slot_time = 20e-6;
    double sifs = 10e-6;
    double difs = 50e-6;
    double eifs = 364e-6;
    double ack_timeout = 364e-6;
    double prop_delay = 1e-6;
    double plcp_preamble_bits = 144.0;
    double plcp_header_bits = 48.0;
    double plcp_rate = 1e6;
    double mac_header_bytes = 28.0;
    double ack_bytes = 14.0;
    int cw_min_default = 32;
    int max_backoff_stage = 5;  // m
    int retry_limit = 6;        // r, must be >= m
    int cw_max = 1024;          // 2^m * cw_min_default

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::invalid_argument(std::string("params.") + name + " must be > 0");
        };
        positive(slot_time, "slot_time");
        positive(sifs, "sifs");
        positive(difs, "difs");
        positive(eifs, "eifs");
        positive(ack_timeout, "ack_timeout");
        positive(prop_delay, "prop_delay");
        positive(plcp_preamble_bits, "plcp_preamble_bits");
        positive(plcp_header_bits, "plcp_header_bits");
        positive(plcp_rate, "plcp_rate");
        positive(mac_header_bytes, "mac_header_bytes");
        positive(ack_bytes, "ack_bytes");
        if (cw_min_default < 1)
            throw std::invalid_argument("params.cw_min_default must be >= 1");
        if (max_backoff_stage < 0)
            throw std::invalid_argument("params.max_backoff_stage must be >= 0");
        if (retry_limit < max_backoff_stage)
            throw std::invalid_argument("params.retry_limit must be >= max_backoff_stage");
        if (cw_max != (cw_min_default << max_backoff_stage))
            throw std::invalid_argument("params.cw_max must equal 2^max_backoff_stage * cw_min_default");
    }
};

}  // namespace dcf
