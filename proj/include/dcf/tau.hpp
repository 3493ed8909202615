#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dcf/params.hpp"

namespace dcf {

/// i-th contention window, capped at stage m: min(2^i, 2^m) * w0.
/// w0 may be fractional (the CW inversion treats it as continuous).
inline double stage_window(double w0, int stage, int m) {
    return std::ldexp(w0, std::min(stage, m));
}

/// Per-slot transmission probability of a station whose contention chain sees
/// queue-nonempty probability q, equivalent failure probability p_eq and
/// idle-channel probability p_idle, using minimum window w0 and m/r backoff
/// stages.
///
/// This is the stationary solution of the contention chain, written in terms
/// of the unnormalized state masses (post-backoff occupancy Bp, stage-0 inflow
/// J0, geometric stage masses). q is clamped to [1e-9, 1 - 1e-6]: the printed
/// expression is indeterminate at both ends while the limits exist.
inline double closed_form_tau(double q, double p_eq, double p_idle, double w0, int m, int r) {
    if (!(w0 >= 1.0))
        throw std::domain_error("closed_form_tau: w0 must be >= 1");
    if (!(p_eq >= 0.0 && p_eq < 1.0))
        throw std::domain_error("closed_form_tau: p_eq must be in [0, 1)");
    if (!(p_idle >= 0.0 && p_idle <= 1.0))
        throw std::domain_error("closed_form_tau: p_idle must be in [0, 1]");
    if (r < m)
        throw std::domain_error("closed_form_tau: retry limit r must be >= m");

    q = std::clamp(q, 1e-9, 1.0 - 1e-6);
    const double one_minus_q = 1.0 - q;
    const double log1mq = std::log1p(-q);
    const double beta = std::exp(w0 * log1mq);              // (1-q)^w0
    const double one_minus_beta = -std::expm1(w0 * log1mq); // 1-(1-q)^w0

    if (!(one_minus_beta > 0.0))
        throw std::domain_error("closed_form_tau: (1-q)^w0 underflow guard");

    // All masses below are relative to pi(P,0) = 1.
    const double post_backoff_mass = q * w0 / one_minus_beta;
    const double service_inflow = q * q * w0 / (one_minus_beta * one_minus_q);  // = pi(0,0) + q*p_idle
    const double stage0_inflow = q * service_inflow + q * (1.0 - p_idle);
    const double pb_state_inflow = one_minus_q * service_inflow / w0;

    // sum (1-q)^l and sum l(1-q)^l over l = 1..w0-1, closed form.
    const double sum_geo = (one_minus_q - beta) / q;
    const double beta_w0m1 = std::exp((w0 - 1.0) * log1mq);
    const double sum_lgeo = one_minus_q * (1.0 - w0 * beta_w0m1 + (w0 - 1.0) * beta) / (q * q);
    const double weighted_pb = (pb_state_inflow / q) * (w0 * (w0 - 1.0) / 2.0 - w0 * sum_geo + sum_lgeo);

    const double stage0_mass = stage0_inflow * (w0 + 1.0) / 2.0 + q * weighted_pb;

    double retry_mass = 0.0;  // sum over stages 1..r of pi(i,0)*(W_i+1)/2
    double geo = 1.0;         // p_eq^i
    double tx_states = 1.0;   // sum p_eq^i, i = 0..r
    for (int i = 1; i <= r; ++i) {
        geo *= p_eq;
        retry_mass += geo * (stage_window(w0, i, m) + 1.0);
        tx_states += geo;
    }
    retry_mass *= service_inflow / 2.0;

    const double total = post_backoff_mass + stage0_mass + retry_mass;
    const double tau = service_inflow * tx_states / total;
    if (!std::isfinite(tau) || !(total > 0.0))
        throw std::domain_error("closed_form_tau: non-finite intermediate");
    return std::clamp(tau, 0.0, 1.0);
}

}  // namespace dcf
