#include <doctest.h>

#include <cmath>

#include "qnomp/core.hpp"
#include "qnomp/simulate.hpp"

using namespace qnomp;

namespace {

ChannelConfig scenario_cfg() {
    ChannelConfig cfg;
    cfg.M = 24;
    cfg.N = 64;
    cfg.delta_f = 240e3;
    return cfg;
}

}  // namespace

TEST_CASE("gen_multipath spaces delays by C1 steps and angles by C2 steps") {
    const ChannelConfig cfg = scenario_cfg();
    ScenarioSpec spec;
    spec.kind = ScenarioKind::Multipath;
    spec.C1 = 2.0;
    spec.C2 = 0.5;
    spec.n_paths = 7;
    spec.base_tau = 3.0 * cfg.delay_step();
    spec.base_theta = -0.2;
    spec.seed = 11;
    const PathSet p = gen_multipath(spec, cfg);
    REQUIRE(p.size() == 7);
    for (int i = 0; i + 1 < 7; ++i) {
        CHECK(p.taus[i + 1] - p.taus[i] == doctest::Approx(2.0 * cfg.delay_step()).epsilon(1e-12));
        CHECK(p.thetas[i + 1] - p.thetas[i] == doctest::Approx(0.5 * cfg.angle_step()).epsilon(1e-12));
    }
    CHECK(p.taus[0] == doctest::Approx(3.0 * cfg.delay_step()));
    CHECK(p.thetas[0] == doctest::Approx(-0.2));
    // Unit-modulus gains.
    for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(std::abs(p.betas[i]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gen_multipath is deterministic under a fixed seed") {
    const ChannelConfig cfg = scenario_cfg();
    ScenarioSpec spec;
    spec.kind = ScenarioKind::Multipath;
    spec.C1 = 1.0;
    spec.C2 = 1.0;
    spec.n_paths = 5;
    spec.seed = 42;
    const PathSet a = gen_multipath(spec, cfg);
    const PathSet b = gen_multipath(spec, cfg);
    CHECK((a.taus - b.taus).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.thetas - b.thetas).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.betas - b.betas).cwiseAbs().maxCoeff() == 0.0);
    // Different seeds draw different anchors and phases.
    spec.seed = 43;
    const PathSet c = gen_multipath(spec, cfg);
    CHECK((a.taus - c.taus).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("gen_multipath keeps the whole constellation inside one period") {
    const ChannelConfig cfg = scenario_cfg();
    ScenarioSpec spec;
    spec.kind = ScenarioKind::Multipath;
    spec.C1 = 2.0;
    spec.C2 = 0.5;
    spec.n_paths = 7;
    for (std::uint64_t s = 0; s < 50; ++s) {
        spec.seed = s;
        const PathSet p = gen_multipath(spec, cfg);
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            CHECK(p.taus[i] >= 0.0);
            CHECK(p.taus[i] < cfg.delay_period());
            CHECK(p.thetas[i] >= -0.5);
            CHECK(p.thetas[i] < 0.5);
        }
        // Spacing survives (no wrap kicked in for these anchors).
        for (Eigen::Index i = 0; i + 1 < p.size(); ++i)
            CHECK(p.taus[i + 1] - p.taus[i] == doctest::Approx(2.0 * cfg.delay_step()).epsilon(1e-9));
    }
}

TEST_CASE("gen_clustered builds clusters sharing a delay with a 2gamma+1 angular fan") {
    const ChannelConfig cfg = scenario_cfg();
    ScenarioSpec spec;
    spec.kind = ScenarioKind::Clustered;
    spec.C1 = 1.0;
    spec.C2 = 0.5;
    spec.n_clusters = 3;
    spec.subpaths_per_cluster = 5;
    spec.seed = 7;
    const PathSet p = gen_clustered(spec, cfg);
    REQUIRE(p.size() == 15);
    for (int c = 0; c < 3; ++c) {
        const int base = c * 5;
        // All sub-paths of a cluster share its delay.
        for (int j = 1; j < 5; ++j) CHECK(p.taus[base + j] == doctest::Approx(p.taus[base]).epsilon(1e-14));
        // Angles form theta_c + j*C2*dtheta for j = -2..2.
        for (int j = 0; j + 1 < 5; ++j)
            CHECK(p.thetas[base + j + 1] - p.thetas[base + j] ==
                  doctest::Approx(0.5 * cfg.angle_step()).epsilon(1e-9));
    }
    for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(std::abs(p.betas[i]) == doctest::Approx(1.0));
}

TEST_CASE("gen_paths dispatches on scenario kind") {
    const ChannelConfig cfg = scenario_cfg();
    ScenarioSpec spec;
    spec.seed = 3;
    spec.kind = ScenarioKind::Multipath;
    spec.n_paths = 4;
    CHECK(gen_paths(spec, cfg).size() == 4);
    spec.kind = ScenarioKind::Clustered;
    spec.n_clusters = 2;
    spec.subpaths_per_cluster = 3;
    CHECK(gen_paths(spec, cfg).size() == 6);
}

TEST_CASE("substream seeds differ across trials and are order-independent") {
    const std::uint64_t s0 = substream_seed(99, 0);
    const std::uint64_t s1 = substream_seed(99, 1);
    const std::uint64_t s2 = substream_seed(99, 2);
    CHECK(s0 != s1);
    CHECK(s1 != s2);
    CHECK(substream_seed(99, 1) == s1);  // pure function of (seed, index)
    CHECK(substream_seed(98, 1) != s1);
}

TEST_CASE("add_noise sigma2=0 returns the exact channel and an infinite SNR sentinel") {
    const ChannelConfig cfg = scenario_cfg();
    CVec h = CVec::Constant(cfg.dim(), cxd(1.0, -1.0));
    const NoisySample s = add_noise(h, 0.0, 5);
    CHECK((s.observation.h_prime - h).norm() == 0.0);
    CHECK(std::isinf(s.snr_linear));
    CHECK(s.observation.sigma2 == 0.0);
}

TEST_CASE("add_noise snr definition: ||h||^2 = N*M and sigma2 = 1 gives snr 1") {
    const ChannelConfig cfg = scenario_cfg();
    CVec h = CVec::Constant(cfg.dim(), cxd(1.0, 0.0));  // squared norm N*M
    const NoisySample s = add_noise(h, 1.0, 5);
    CHECK(s.snr_linear == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("add_noise empirical statistics match the requested variance") {
    const double sigma2 = 0.37;
    const Eigen::Index len = 4096;
    CVec h = CVec::Zero(len);
    double sum_sq = 0.0;
    cxd mean_acc(0.0, 0.0);
    double cross = 0.0;
    int n_total = 0;
    for (std::uint64_t t = 0; t < 25; ++t) {
        const NoisySample s = add_noise(h, sigma2, substream_seed(1234, t));
        for (Eigen::Index i = 0; i < len; ++i) {
            const cxd w = s.observation.h_prime[i];
            sum_sq += std::norm(w);
            mean_acc += w;
            cross += w.real() * w.imag();
            ++n_total;
        }
    }
    const double var = sum_sq / n_total;
    CHECK(std::abs(var - sigma2) < 0.03 * sigma2);
    CHECK(std::abs(mean_acc) / n_total < 0.01);
    CHECK(std::abs(cross / n_total) < 0.01);
}

TEST_CASE("add_noise is deterministic per seed and differs across seeds") {
    CVec h = CVec::Zero(64);
    const NoisySample a = add_noise(h, 1.0, 77);
    const NoisySample b = add_noise(h, 1.0, 77);
    const NoisySample c = add_noise(h, 1.0, 78);
    CHECK((a.observation.h_prime - b.observation.h_prime).norm() == 0.0);
    CHECK((a.observation.h_prime - c.observation.h_prime).norm() > 0.0);
}

TEST_CASE("add_noise rejects negative variance") {
    CHECK_THROWS_AS(add_noise(CVec::Zero(4), -1.0, 0), std::invalid_argument);
}
