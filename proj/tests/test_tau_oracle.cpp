#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "dcf/markov_oracle.hpp"
#include "dcf/tau.hpp"

using namespace dcf;
using Catch::Approx;

namespace {

double oracle_tau(int w0, int m, int r, double q, double p_eq, double p_idle) {
    ContentionChain chain(w0, m, r);
    return chain.tau_of(chain.stationary(q, p_eq, p_idle), q, p_idle);
}

}  // namespace

TEST_CASE("chain stationary vector is a distribution", "[oracle]") {
    ContentionChain chain(4, 1, 2);
    const auto pi = chain.stationary(0.4, 0.3, 0.8);
    REQUIRE(pi.size() == chain.states());
    const double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
    CHECK(sum == Approx(1.0).epsilon(1e-12));
    for (double v : pi) CHECK(v >= -1e-12);
}

TEST_CASE("no arrivals park the chain in the idle state", "[oracle]") {
    ContentionChain chain(8, 2, 3);
    const auto pi = chain.stationary(0.0, 0.2, 0.9);
    CHECK(chain.tau_of(pi, 0.0, 0.9) == Approx(0.0).margin(1e-12));
    CHECK(pi[chain.post_backoff(0)] == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("saturated error-free chain lives in stage 0 and post-backoff", "[oracle]") {
    const double q = 1.0 - 1e-6;
    ContentionChain chain(16, 3, 5);
    const auto pi = chain.stationary(q, 0.0, 1.0);
    double beyond_stage0 = 0.0;
    for (int i = 1; i <= 5; ++i)
        for (int k = 0; k < chain.window(i); ++k) beyond_stage0 += pi[chain.backoff(i, k)];
    CHECK(beyond_stage0 < 1e-9);

    StationProfile st;
    st.cw_min = 16;
    PhyMacParams p;
    p.max_backoff_stage = 3;
    p.retry_limit = 5;
    p.cw_max = 16 << 3;
    const double closed = closed_form_tau(q, 0.0, 1.0, 16, 3, 5);
    CHECK(std::abs(closed - chain.tau_of(pi, q, 1.0)) / closed < 1e-3);
    // saturated, error-free limit collapses to 2/(W0+1)
    CHECK(closed == Approx(2.0 / 17.0).epsilon(1e-4));
}

TEST_CASE("closed form annihilates without traffic", "[tau]") {
    CHECK(closed_form_tau(0.0, 0.3, 0.9, 32, 5, 6) < 1e-6);
}

TEST_CASE("closed form matches the chain on the spec examples", "[tau][oracle]") {
    const double a = closed_form_tau(0.5, 0.2, 0.9, 2, 1, 1);
    const double b = oracle_tau(2, 1, 1, 0.5, 0.2, 0.9);
    CHECK(std::abs(a - b) / b < 1e-3);

    // defaults, saturated, error-free single station
    const double c = closed_form_tau(1.0, 0.0, 1.0, 32, 5, 6);
    const double d = oracle_tau(32, 5, 6, 1.0 - 1e-6, 0.0, 1.0);
    CHECK(std::abs(c - d) / d < 1e-3);
}

TEST_CASE("closed form equals the chain across the parameter grid", "[tau][oracle]") {
    const int w0s[] = {2, 4, 8, 16, 32};
    const double qs[] = {0.1, 0.5, 0.9};
    const double peqs[] = {0.0, 0.2, 0.5};
    const int ms[] = {1, 3, 5};
    const double pidles[] = {0.7, 1.0};

    double worst = 0.0;
    for (int w0 : w0s)
        for (double q : qs)
            for (double peq : peqs)
                for (int m : ms)
                    for (int dr : {0, 2})
                        for (double pidle : pidles) {
                            const int r = m + dr;
                            const double closed = closed_form_tau(q, peq, pidle, w0, m, r);
                            const double oracle = oracle_tau(w0, m, r, q, peq, pidle);
                            const double rel = std::abs(closed - oracle) / oracle;
                            worst = std::max(worst, rel);
                            INFO("w0=" << w0 << " q=" << q << " peq=" << peq << " m=" << m
                                       << " r=" << r << " pidle=" << pidle << " closed=" << closed
                                       << " oracle=" << oracle);
                            REQUIRE(rel < 1e-3);
                        }
    // The two routes agree far beyond the acceptance gate.
    CHECK(worst < 1e-9);
}

TEST_CASE("tau is monotone in q and in the window", "[tau][property]") {
    const int w0s[] = {2, 4, 8, 16, 32};
    const double qs[] = {0.1, 0.5, 0.9};
    const double peqs[] = {0.0, 0.2, 0.5};
    const int ms[] = {1, 3, 5};

    for (double peq : peqs)
        for (int m : ms)
            for (int dr : {0, 2}) {
                const int r = m + dr;
                for (int w0 : w0s) {
                    double prev = -1.0;
                    for (double q : qs) {
                        const double t = closed_form_tau(q, peq, 0.9, w0, m, r);
                        CHECK(t >= prev);
                        prev = t;
                    }
                }
                for (double q : qs) {
                    double prev = 2.0;
                    for (int w0 : w0s) {
                        const double t = closed_form_tau(q, peq, 0.9, w0, m, r);
                        CHECK(t <= prev);
                        prev = t;
                    }
                }
            }
}

TEST_CASE("continuous window evaluation stays between integer neighbours", "[tau]") {
    const double lo = closed_form_tau(0.5, 0.2, 0.9, 13.0, 3, 5);
    const double mid = closed_form_tau(0.5, 0.2, 0.9, 13.5, 3, 5);
    const double hi = closed_form_tau(0.5, 0.2, 0.9, 14.0, 3, 5);
    CHECK(mid < lo);
    CHECK(mid > hi);
}

TEST_CASE("domain guards reject invalid inputs", "[tau]") {
    CHECK_THROWS_AS(closed_form_tau(0.5, 1.0, 0.9, 32, 5, 6), std::domain_error);
    CHECK_THROWS_AS(closed_form_tau(0.5, 0.2, 0.9, 0.5, 5, 6), std::domain_error);
    CHECK_THROWS_AS(closed_form_tau(0.5, 0.2, 0.9, 32, 5, 3), std::domain_error);
}
