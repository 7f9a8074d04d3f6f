#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "qnomp/core.hpp"

using namespace qnomp;

namespace {

constexpr double kPi = std::numbers::pi;

ChannelConfig small_cfg() {
    ChannelConfig cfg;
    cfg.M = 6;
    cfg.N = 4;
    cfg.delta_f = 240e3;
    cfg.K = 2;
    return cfg;
}

}  // namespace

TEST_CASE("build_atom matches the closed-form phase entry by entry") {
    const ChannelConfig cfg = small_cfg();
    const double tau = 0.73 * cfg.delay_step();
    const double theta = -0.31;
    const CVec a = build_atom(tau, theta, cfg);
    REQUIRE(a.size() == cfg.dim());
    for (int k = 0; k < cfg.M; ++k) {
        for (int n = 0; n < cfg.N; ++n) {
            const double phase = -2.0 * kPi * (tau * k * cfg.delta_f + n * theta);
            const cxd expected = std::polar(1.0, phase);
            CHECK(std::abs(a[k * cfg.N + n] - expected) < 1e-14);
        }
    }
}

TEST_CASE("build_atom factors as freq atom kron steering atom") {
    const ChannelConfig cfg = small_cfg();
    const double tau = 1.9 * cfg.delay_step();
    const double theta = 0.22;
    const CVec a = build_atom(tau, theta, cfg);
    const CVec f = build_freq_atom(tau, cfg);
    const CVec s = build_steering_atom(theta, cfg);
    REQUIRE(f.size() == cfg.M);
    REQUIRE(s.size() == cfg.N);
    for (int k = 0; k < cfg.M; ++k)
        for (int n = 0; n < cfg.N; ++n) CHECK(std::abs(a[k * cfg.N + n] - f[k] * s[n]) < 1e-14);
}

TEST_CASE("extrapolation band starts at subcarrier M and spans K*M entries") {
    const ChannelConfig cfg = small_cfg();
    const double tau = 0.4 * cfg.delay_step();
    const CVec fe = build_freq_atom(tau, cfg, 1);
    REQUIRE(fe.size() == cfg.K * cfg.M);
    for (int q = 0; q < cfg.K * cfg.M; ++q) {
        const double phase = -2.0 * kPi * tau * (cfg.M + q) * cfg.delta_f;
        CHECK(std::abs(fe[q] - std::polar(1.0, phase)) < 1e-13);
    }
}

TEST_CASE("synthesize_channel sums gain-weighted atoms") {
    const ChannelConfig cfg = small_cfg();
    PathSet paths;
    paths.taus = Vec(2);
    paths.thetas = Vec(2);
    paths.betas = CVec(2);
    paths.taus << 0.5 * cfg.delay_step(), 2.3 * cfg.delay_step();
    paths.thetas << -0.1, 0.37;
    paths.betas << cxd(1.0, -2.0), cxd(0.5, 0.25);
    const CVec h = synthesize_channel(paths, cfg);
    CVec manual = CVec::Zero(cfg.dim());
    for (Eigen::Index i = 0; i < paths.size(); ++i)
        manual += paths.betas[i] * build_atom(paths.taus[i], paths.thetas[i], cfg);
    CHECK((h - manual).norm() < 1e-12 * manual.norm());
}

TEST_CASE("synthesize_extrapolated covers the K extension bands above the pilots") {
    const ChannelConfig cfg = small_cfg();
    PathSet paths;
    paths.taus = Vec::Constant(1, 1.1 * cfg.delay_step());
    paths.thetas = Vec::Constant(1, 0.05);
    paths.betas = CVec::Constant(1, cxd(2.0, 1.0));
    const CVec ext = synthesize_extrapolated(paths, cfg);
    REQUIRE(ext.size() == static_cast<Eigen::Index>(cfg.N) * cfg.K * cfg.M);
    // Every entry follows the phase model at subcarriers M .. M(K+1)-1.
    for (int q = 0; q < cfg.K * cfg.M; ++q) {
        const int k = cfg.M + q;
        for (int n = 0; n < cfg.N; ++n) {
            const double phase = -2.0 * kPi * (paths.taus[0] * k * cfg.delta_f + n * paths.thetas[0]);
            const cxd expected = paths.betas[0] * std::polar(1.0, phase);
            CHECK(std::abs(ext[q * cfg.N + n] - expected) < 1e-12);
        }
    }
}

TEST_CASE("extrapolated vector for smaller K is a prefix of the larger-K vector") {
    ChannelConfig cfg = small_cfg();
    PathSet paths;
    paths.taus = Vec::Constant(2, 0.0);
    paths.taus << 0.7 * cfg.delay_step(), 3.4 * cfg.delay_step();
    paths.thetas = Vec(2);
    paths.thetas << 0.11, -0.43;
    paths.betas = CVec(2);
    paths.betas << cxd(1, 1), cxd(-0.3, 0.8);
    cfg.K = 3;
    const CVec big = synthesize_extrapolated(paths, cfg);
    cfg.K = 1;
    const CVec small = synthesize_extrapolated(paths, cfg);
    CHECK((big.head(small.size()) - small).norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("channel_nmse is scale-invariant relative error") {
    const ChannelConfig cfg = small_cfg();
    CVec truth = CVec::Zero(cfg.dim());
    for (int i = 0; i < cfg.dim(); ++i) truth[i] = cxd(std::cos(0.3 * i), std::sin(0.1 * i));
    // Perturb by a vector with known norm ratio.
    CVec est = truth;
    est[0] += cxd(0.0, truth.norm() * 0.1);
    CHECK(channel_nmse(truth, est) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(channel_nmse(truth, truth) == doctest::Approx(0.0));
    CHECK_THROWS_AS(channel_nmse(CVec::Zero(3), CVec::Zero(4)), std::domain_error);
    CHECK_THROWS_AS(channel_nmse(CVec::Zero(3), CVec::Zero(3)), std::domain_error);
}

TEST_CASE("delay_nmse with nearest matching and replacement") {
    const double res = 1.0;  // work in units of the resolution
    Vec truth(3), est(2);
    truth << 0.0, 1.0, 5.0;
    est << 0.1, 5.2;
    // nearest for 0.0 -> 0.1 (err 0.1), 1.0 -> 0.1 (err 0.9), 5.0 -> 5.2 (err 0.2)
    const double expected = (0.1 * 0.1 + 0.9 * 0.9 + 0.2 * 0.2) / 3.0;
    CHECK(delay_nmse(truth, est, res, 3, DelayMatching::NearestWithReplacement) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("delay_nmse one-to-one matching forbids reuse") {
    const double res = 1.0;
    Vec truth(2), est(2);
    truth << 0.0, 0.5;
    est << 0.1, 3.0;
    // With replacement both true delays pick 0.1; one-to-one forces 0.5 -> 3.0.
    const double with_repl = (0.01 + 0.16) / 2.0;
    const double one_to_one = (0.01 + 2.5 * 2.5) / 2.0;
    CHECK(delay_nmse(truth, est, res, 2, DelayMatching::NearestWithReplacement) ==
          doctest::Approx(with_repl).epsilon(1e-12));
    CHECK(delay_nmse(truth, est, res, 2, DelayMatching::OneToOne) ==
          doctest::Approx(one_to_one).epsilon(1e-12));
}

TEST_CASE("delay_nmse honours the wrap-around period") {
    const double res = 1.0;
    const double period = 10.0;
    Vec truth(1), est(1);
    truth << 0.2;
    est << 9.9;
    // Circular distance is 0.3, not 9.7.
    CHECK(delay_nmse(truth, est, res, 1, DelayMatching::NearestWithReplacement, period) ==
          doctest::Approx(0.09).epsilon(1e-12));
}

TEST_CASE("delay_nmse rejects degenerate inputs") {
    Vec truth(2);
    truth << 1.0, 2.0;
    CHECK_THROWS_AS(delay_nmse(truth, Vec(0), 1.0, 2, DelayMatching::OneToOne, 10.0), std::domain_error);
    CHECK_THROWS_AS(delay_nmse(Vec(0), truth, 1.0, 1, DelayMatching::OneToOne), std::domain_error);
    CHECK_THROWS_AS(delay_nmse(truth, truth, 0.0, 2, DelayMatching::OneToOne), std::domain_error);
}

TEST_CASE("delay_nmse surplus estimates do not hurt when matching with replacement") {
    Vec truth(1), est(3);
    truth << 2.0;
    est << 1.7, 2.05, 9.0;
    CHECK(delay_nmse(truth, est, 1.0, 1, DelayMatching::NearestWithReplacement) ==
          doctest::Approx(0.05 * 0.05).epsilon(1e-10));
}

TEST_CASE("wrap helpers map into canonical ranges") {
    ChannelConfig cfg = small_cfg();
    const double period = cfg.delay_period();
    CHECK(wrap_tau(-0.25 * period, cfg) == doctest::Approx(0.75 * period));
    CHECK(wrap_tau(1.25 * period, cfg) == doctest::Approx(0.25 * period));
    CHECK(wrap_tau(0.0, cfg) == 0.0);
    CHECK(wrap_theta(0.75) == doctest::Approx(-0.25));
    CHECK(wrap_theta(-0.6) == doctest::Approx(0.4));
    CHECK(wrap_theta(0.25) == doctest::Approx(0.25));
}

TEST_CASE("PathSet::canonicalized wraps parameters without touching gains") {
    const ChannelConfig cfg = small_cfg();
    PathSet p;
    p.taus = Vec::Constant(1, -0.3 * cfg.delay_period());
    p.thetas = Vec::Constant(1, 0.8);
    p.betas = CVec::Constant(1, cxd(3.0, -1.0));
    const PathSet c = p.canonicalized(cfg);
    CHECK(c.taus[0] == doctest::Approx(0.7 * cfg.delay_period()));
    CHECK(c.thetas[0] == doctest::Approx(-0.2));
    CHECK(c.betas[0] == p.betas[0]);
    // Canonicalization must leave the synthesized channel unchanged.
    CHECK((synthesize_channel(p, cfg) - synthesize_channel(c, cfg)).norm() < 1e-9);
}
