#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <stdexcept>
#include <vector>

#include "dcf/scenario.hpp"

namespace dcf {

/// Brute-force route to the per-slot transmission probability: build the
/// explicit transition matrix of the per-station contention chain (backoff
/// stages 0..r plus the post-backoff column) and solve the balance equations.
/// Exists to cross-check closed_form_tau through an independent path; state
/// count is w0 + sum_i W_i, so keep w0 moderate.
class ContentionChain {
public:
    ContentionChain(int w0, int m, int r) : w0_(w0), m_(m), r_(r) {
        if (w0 < 1 || m < 0 || r < m)
            throw std::invalid_argument("ContentionChain: need w0 >= 1 and r >= m >= 0");
        stage_offset_.resize(r + 1);
        std::size_t next = static_cast<std::size_t>(w0);  // post-backoff states come first
        for (int i = 0; i <= r; ++i) {
            stage_offset_[i] = next;
            next += static_cast<std::size_t>(window(i));
        }
        state_count_ = next;
    }

    [[nodiscard]] int window(int stage) const { return std::min(w0_ << std::min(stage, m_), w0_ << m_); }
    [[nodiscard]] std::size_t states() const { return state_count_; }
    [[nodiscard]] std::size_t post_backoff(int k) const { return static_cast<std::size_t>(k); }
    [[nodiscard]] std::size_t backoff(int stage, int k) const {
        return stage_offset_[stage] + static_cast<std::size_t>(k);
    }

    /// Stationary distribution for fixed environment (q, p_eq, p_idle).
    [[nodiscard]] std::vector<double> stationary(double q, double p_eq, double p_idle) const {
        using Triplet = Eigen::Triplet<double>;
        const auto n = static_cast<Eigen::Index>(state_count_);
        std::vector<Triplet> trip;
        trip.reserve(state_count_ * 4);

        // A = P^T - I, with the last balance row replaced by normalization.
        const std::size_t norm_row = state_count_ - 1;
        auto flow = [&](std::size_t from, std::size_t to, double prob) {
            if (prob == 0.0) return;
            if (to != norm_row)
                trip.emplace_back(static_cast<int>(to), static_cast<int>(from), prob);
        };

        // Countdown within every backoff stage.
        for (int i = 0; i <= r_; ++i)
            for (int k = 1; k < window(i); ++k) flow(backoff(i, k), backoff(i, k - 1), 1.0);

        // Transmission states (i,0): failure climbs a stage, completion
        // branches on the queue.
        for (int i = 0; i < r_; ++i) {
            const int wn = window(i + 1);
            for (int k = 0; k < wn; ++k) flow(backoff(i, 0), backoff(i + 1, k), p_eq / wn);
            for (int k = 0; k < w0_; ++k) {
                flow(backoff(i, 0), backoff(0, k), (1.0 - p_eq) * q / w0_);
                flow(backoff(i, 0), post_backoff(k), (1.0 - p_eq) * (1.0 - q) / w0_);
            }
        }
        for (int k = 0; k < w0_; ++k) {
            flow(backoff(r_, 0), backoff(0, k), q / w0_);
            flow(backoff(r_, 0), post_backoff(k), (1.0 - q) / w0_);
        }

        // Post-backoff countdown picks up a freshly arrived packet.
        for (int k = 1; k < w0_; ++k) {
            flow(post_backoff(k), post_backoff(k - 1), 1.0 - q);
            flow(post_backoff(k), backoff(0, k - 1), q);
        }

        // Idle state (P,0): arrival on an idle channel transmits immediately.
        flow(post_backoff(0), post_backoff(0), 1.0 - q);
        const double immediate = q * p_idle;
        for (int k = 0; k < w0_; ++k) {
            flow(post_backoff(0), post_backoff(k), immediate * (1.0 - p_eq) * (1.0 - q) / w0_);
            flow(post_backoff(0), backoff(0, k), q * ((1.0 - p_idle) + immediate * (1.0 - p_eq)) / w0_);
        }
        if (r_ >= 1) {
            const int w1 = window(1);
            for (int k = 0; k < w1; ++k) flow(post_backoff(0), backoff(1, k), immediate * p_eq / w1);
        } else {
            // No retry stage: an immediate-transmission failure drops the
            // packet and branches on the queue like any completed service.
            for (int k = 0; k < w0_; ++k) {
                flow(post_backoff(0), backoff(0, k), immediate * p_eq * q / w0_);
                flow(post_backoff(0), post_backoff(k), immediate * p_eq * (1.0 - q) / w0_);
            }
        }

        for (std::size_t s = 0; s < state_count_; ++s)
            if (s != norm_row) trip.emplace_back(static_cast<int>(s), static_cast<int>(s), -1.0);
        for (std::size_t s = 0; s < state_count_; ++s)
            trip.emplace_back(static_cast<int>(norm_row), static_cast<int>(s), 1.0);

        Eigen::SparseMatrix<double> a(n, n);
        a.setFromTriplets(trip.begin(), trip.end());
        a.makeCompressed();

        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(a);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("ContentionChain: singular balance system");
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
        rhs[static_cast<Eigen::Index>(norm_row)] = 1.0;
        Eigen::VectorXd pi = lu.solve(rhs);
        if (lu.info() != Eigen::Success || !pi.allFinite())
            throw std::runtime_error("ContentionChain: stationary solve failed");

        return {pi.data(), pi.data() + pi.size()};
    }

    /// Transmission probability implied by a stationary vector.
    [[nodiscard]] double tau_of(const std::vector<double>& pi, double q, double p_idle) const {
        double tau = pi[post_backoff(0)] * q * p_idle;
        for (int i = 0; i <= r_; ++i) tau += pi[backoff(i, 0)];
        return tau;
    }

private:
    int w0_;
    int m_;
    int r_;
    std::vector<std::size_t> stage_offset_;
    std::size_t state_count_ = 0;
};

inline double chain_oracle(const StationProfile& st, double q, double p_eq, double p_idle,
                           const PhyMacParams& p) {
    ContentionChain chain(st.cw_min, p.max_backoff_stage, p.retry_limit);
    return chain.tau_of(chain.stationary(q, p_eq, p_idle), q, p_idle);
}

}  // namespace dcf
