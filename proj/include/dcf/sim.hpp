#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dcf/airtime.hpp"
#include "dcf/fairness.hpp"
#include "dcf/rng.hpp"
#include "dcf/scenario.hpp"

namespace dcf {

struct SimConfig {
    Scenario scenario;
    double duration = 60.0;  // simulated seconds
    std::uint64_t seed = 1;
    double warmup = 1.0;
    int batches = 10;

    void validate() const {
        scenario.validate();
        if (!(warmup >= 0.0) || !(duration > warmup))
            throw std::invalid_argument("sim config needs duration > warmup >= 0");
        if (batches < 2)
            throw std::invalid_argument("sim config needs at least 2 batches");
    }
};

struct StationStats {
    // Measurement window (after warmup).
    std::int64_t delivered_bits = 0;
    std::int64_t delivered_packets = 0;
    std::int64_t attempts = 0;
    std::int64_t collisions = 0;
    std::int64_t channel_error_losses = 0;
    std::int64_t drops_at_retry_limit = 0;
    double mean_service_time = 0.0;
    double throughput_bps = 0.0;
    double throughput_stderr = 0.0;  // standard error over batch means
    double ci_half_width = 0.0;      // 95% half-width, t(batches-1) * stderr

    // Whole-run packet accounting (conservation identity).
    std::int64_t arrivals_total = 0;
    std::int64_t arrivals_accepted = 0;
    std::int64_t delivered_total = 0;
    std::int64_t drops_total = 0;
    int in_flight_at_end = 0;
};

struct SimResult {
    std::vector<StationStats> per_station;
    double aggregate_throughput = 0.0;
    std::vector<double> normalized;
    double jain = 0.0;  // on normalized throughputs; 0 when nothing was delivered
    double measured_duration = 0.0;
};

namespace detail {

enum class StaMode { Idle, PostBackoff, Backoff };

struct StaRuntime {
    StaMode mode = StaMode::Idle;
    int stage = 0;
    int counter = 0;
    bool has_head = false;
    bool queue = false;
    bool arm_pending = false;  // idle-state arrival waiting for the slot boundary
    double next_arrival = 0.0;
    double service_start = 0.0;
    double service_sum = 0.0;
    std::int64_t service_count = 0;
    CounterRng rng{0};
};

}  // namespace detail

/// Event simulator of the basic-access DCF: slotted contention, per-station
/// exponential arrivals into a one-packet buffer, binary exponential backoff
/// with retry limit, post-backoff after every completed service, and
/// Bernoulli channel errors on collision-free frames. Counters freeze while
/// the medium is busy and resume with one decrement at the boundary that
/// closes the busy period (the decrement-after-deferral reading of the
/// countdown rule). Listeners of a failed frame defer as long as the
/// transmitter's ACK timeout, so a failed slot costs airtime + ack_timeout
/// for everyone.
inline SimResult run_simulation(const SimConfig& cfg) {
    cfg.validate();
    const Scenario& sc = cfg.scenario;
    const PhyMacParams& p = sc.params;
    const std::size_t n = sc.stations.size();

    std::vector<detail::StaRuntime> sta(n);
    std::vector<StationStats> stats(n);
    std::vector<double> frame_air(n), t_success(n), t_error(n);
    for (std::size_t s = 0; s < n; ++s) {
        sta[s].rng = CounterRng::stream(cfg.seed, static_cast<std::uint64_t>(sc.stations[s].id));
        sta[s].next_arrival = sta[s].rng.exponential(sc.stations[s].packet_rate);
        frame_air[s] = data_airtime(sc.stations[s], p);
        t_success[s] = success_duration(sc.stations[s], p);
        t_error[s] = error_duration(sc.stations[s], p);
    }

    auto window = [&](std::size_t s, int stage) {
        return static_cast<std::uint32_t>(
            stage_window(sc.stations[s].cw_min, stage, p.max_backoff_stage));
    };

    const double window_len = cfg.duration - cfg.warmup;
    const double batch_len = window_len / cfg.batches;
    std::vector<std::vector<double>> batch_bits(n, std::vector<double>(cfg.batches, 0.0));

    // Completed service disposal: grab the queued packet (stage-0 backoff) or
    // enter post-backoff; a zero post-backoff draw lands directly in idle.
    auto finish_service = [&](std::size_t s, double now) {
        auto& st = sta[s];
        st.has_head = false;
        st.stage = 0;
        if (st.queue) {
            st.queue = false;
            st.has_head = true;
            st.mode = detail::StaMode::Backoff;
            st.counter = static_cast<int>(st.rng.uniform_below(window(s, 0)));
            st.service_start = now;
        } else {
            st.counter = static_cast<int>(st.rng.uniform_below(window(s, 0)));
            st.mode = st.counter == 0 ? detail::StaMode::Idle : detail::StaMode::PostBackoff;
        }
    };

    double now = 0.0;
    std::vector<std::size_t> txs;
    std::vector<char> transmitted(n, 0);
    while (now < cfg.duration) {
        txs.clear();
        std::fill(transmitted.begin(), transmitted.end(), 0);
        for (std::size_t s = 0; s < n; ++s)
            if (sta[s].mode == detail::StaMode::Backoff && sta[s].counter == 0) {
                txs.push_back(s);
                transmitted[s] = 1;
            }

        const bool busy = !txs.empty();
        double slot = p.slot_time;
        bool error_slot = false;
        if (txs.size() == 1) {
            const std::size_t s = txs[0];
            error_slot = sta[s].rng.bernoulli(sc.stations[s].packet_error_rate);
            slot = error_slot ? t_error[s] : t_success[s];
        } else if (txs.size() > 1) {
            double longest = 0.0;
            for (std::size_t s : txs) longest = std::max(longest, frame_air[s]);
            slot = collision_duration(longest, p);
        }
        const double slot_end = now + slot;

        // Arrivals during this slot. The head slot of the buffer frees only
        // when service completes, so extra arrivals are discarded.
        for (std::size_t s = 0; s < n; ++s) {
            auto& st = sta[s];
            while (st.next_arrival <= slot_end) {
                const double at = st.next_arrival;
                st.next_arrival = at + st.rng.exponential(sc.stations[s].packet_rate);
                ++stats[s].arrivals_total;
                if (st.mode == detail::StaMode::Idle && !st.has_head && !st.arm_pending) {
                    ++stats[s].arrivals_accepted;
                    st.arm_pending = true;
                    st.service_start = at;
                } else if (!st.queue) {
                    ++stats[s].arrivals_accepted;
                    st.queue = true;
                }
                // else: buffer busy, packet discarded
            }
        }

        // Transmission outcomes.
        if (busy) {
            const bool in_window = slot_end > cfg.warmup && slot_end <= cfg.duration;
            const bool collision = txs.size() > 1;
            for (std::size_t s : txs) {
                auto& st = sta[s];
                if (in_window) ++stats[s].attempts;
                const bool failed = collision || error_slot;
                if (in_window && collision) ++stats[s].collisions;
                if (in_window && !collision && error_slot) ++stats[s].channel_error_losses;

                if (!failed) {
                    ++stats[s].delivered_total;
                    if (in_window) {
                        ++stats[s].delivered_packets;
                        const auto bits =
                            static_cast<std::int64_t>(8.0 * sc.stations[s].payload_bytes);
                        stats[s].delivered_bits += bits;
                        const int b = std::min(
                            cfg.batches - 1,
                            static_cast<int>((slot_end - cfg.warmup) / batch_len));
                        batch_bits[s][static_cast<std::size_t>(b)] += static_cast<double>(bits);
                        st.service_sum += slot_end - st.service_start;
                        ++st.service_count;
                    }
                    finish_service(s, slot_end);
                } else if (st.stage == p.retry_limit) {
                    ++stats[s].drops_total;
                    if (in_window) {
                        ++stats[s].drops_at_retry_limit;
                        st.service_sum += slot_end - st.service_start;
                        ++st.service_count;
                    }
                    finish_service(s, slot_end);
                } else {
                    ++st.stage;
                    st.counter = static_cast<int>(st.rng.uniform_below(window(s, st.stage)));
                }
            }
        }

        // Countdown at the slot boundary for everyone who did not transmit;
        // a queued arrival converts a post-backoff countdown into a stage-0
        // service with the same counter.
        for (std::size_t s = 0; s < n; ++s) {
            auto& st = sta[s];
            if (busy && transmitted[s]) continue;
            if (st.mode == detail::StaMode::Backoff) {
                if (st.counter > 0) --st.counter;
            } else if (st.mode == detail::StaMode::PostBackoff) {
                if (st.counter > 0) --st.counter;
                if (st.queue) {
                    st.queue = false;
                    st.has_head = true;
                    st.mode = detail::StaMode::Backoff;
                    st.stage = 0;
                    st.service_start = slot_end;
                } else if (st.counter == 0) {
                    st.mode = detail::StaMode::Idle;
                }
            }
        }

        // Idle-state pickups: transmit next slot when the medium was idle,
        // otherwise defer into a fresh stage-0 backoff.
        for (std::size_t s = 0; s < n; ++s) {
            auto& st = sta[s];
            if (!st.arm_pending) continue;
            st.arm_pending = false;
            st.has_head = true;
            st.mode = detail::StaMode::Backoff;
            st.stage = 0;
            st.counter = busy ? static_cast<int>(st.rng.uniform_below(window(s, 0))) : 0;
        }
        now = slot_end;
    }

    SimResult res;
    res.per_station = std::move(stats);
    res.measured_duration = window_len;
    res.normalized.resize(n);
    bool any = false;
    for (std::size_t s = 0; s < n; ++s) {
        auto& st = res.per_station[s];
        st.in_flight_at_end = (sta[s].has_head ? 1 : 0) + (sta[s].queue ? 1 : 0);
        st.throughput_bps = static_cast<double>(st.delivered_bits) / window_len;
        st.mean_service_time =
            sta[s].service_count ? sta[s].service_sum / static_cast<double>(sta[s].service_count)
                                 : 0.0;
        double mean = 0.0, var = 0.0;
        for (double b : batch_bits[s]) mean += b / batch_len;
        mean /= cfg.batches;
        for (double b : batch_bits[s]) {
            const double d = b / batch_len - mean;
            var += d * d;
        }
        var /= (cfg.batches - 1);
        st.throughput_stderr = std::sqrt(var / cfg.batches);
        st.ci_half_width = 2.262 * st.throughput_stderr;  // t(9, 0.975)
        res.aggregate_throughput += st.throughput_bps;
        res.normalized[s] = st.throughput_bps / sc.stations[s].bit_rate;
        any = any || st.throughput_bps > 0.0;
    }
    res.jain = any ? jain_index(res.normalized) : 0.0;
    return res;
}

/// Re-runs the simulation with each station's minimum contention window
/// overridden by the allocation.
inline SimResult replay_allocation(const Allocation& alloc, SimConfig cfg) {
    if (alloc.cw_min.size() != cfg.scenario.stations.size())
        throw std::invalid_argument("replay_allocation: allocation size mismatch");
    for (std::size_t s = 0; s < cfg.scenario.stations.size(); ++s)
        cfg.scenario.stations[s].cw_min = alloc.cw_min[s];
    return run_simulation(cfg);
}

}  // namespace dcf
