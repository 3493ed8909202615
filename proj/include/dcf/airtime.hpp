#pragma once

#include "dcf/scenario.hpp"

namespace dcf {

/// Airtime of the PLCP preamble + header, always sent at the base rate.
inline double plcp_airtime(const PhyMacParams& p) {
    return (p.plcp_preamble_bits + p.plcp_header_bits) / p.plcp_rate;
}

/// Airtime of the payload (excluding MAC/PLCP overhead) at the station rate.
/// Two stations occupy the channel equally long iff this matches.
inline double payload_airtime(const StationProfile& st) {
    return 8.0 * st.payload_bytes / st.bit_rate;
}

/// Full data frame airtime: PLCP at base rate, MAC header + payload at the
/// station rate.
inline double data_airtime(const StationProfile& st, const PhyMacParams& p) {
    return plcp_airtime(p) + 8.0 * (p.mac_header_bytes + st.payload_bytes) / st.bit_rate;
}

/// ACK frames are sent at the base (PLCP) rate.
inline double ack_airtime(const PhyMacParams& p) {
    return plcp_airtime(p) + 8.0 * p.ack_bytes / p.plcp_rate;
}

/// Channel time consumed by a successful exchange: DATA + SIFS + ACK and the
/// trailing DIFS before contention resumes.
inline double success_duration(const StationProfile& st, const PhyMacParams& p) {
    return data_airtime(st, p) + p.sifs + p.prop_delay + ack_airtime(p) + p.difs + p.prop_delay;
}

/// Channel time consumed when the frame is corrupted: no ACK comes back, the
/// transmitter waits out the ACK timeout.
inline double error_duration(const StationProfile& st, const PhyMacParams& p) {
    return data_airtime(st, p) + p.ack_timeout;
}

/// Channel time consumed by a collision whose longest involved frame has the
/// given airtime.
inline double collision_duration(double class_duration, const PhyMacParams& p) {
    return class_duration + p.ack_timeout;
}

}  // namespace dcf
