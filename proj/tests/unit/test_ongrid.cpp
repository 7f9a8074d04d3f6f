#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "qnomp/core.hpp"
#include "qnomp/ongrid.hpp"

using namespace qnomp;

namespace {

ChannelConfig small_cfg() {
    ChannelConfig cfg;
    cfg.M = 12;
    cfg.N = 8;
    cfg.delta_f = 240e3;
    return cfg;
}

CVec random_vector(Eigen::Index n, unsigned seed) {
    std::mt19937 eng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    CVec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cxd(g(eng), g(eng));
    return v;
}

}  // namespace

TEST_CASE("standard grid matches the DFT definition") {
    const ChannelConfig cfg = small_cfg();
    const GridSpec g = GridSpec::standard(cfg);
    REQUIRE(g.delay_points.size() == cfg.M);
    REQUIRE(g.angle_points.size() == cfg.N);
    CHECK(g.delay_step == doctest::Approx(1.0 / (cfg.M * cfg.delta_f)));
    CHECK(g.angle_step == doctest::Approx(1.0 / cfg.N));
    for (int i = 0; i < cfg.M; ++i) CHECK(g.delay_points[i] == doctest::Approx(i * g.delay_step));
    // Angle grid covers [-1/2, 1/2).
    CHECK(g.angle_points.minCoeff() >= -0.5);
    CHECK(g.angle_points.maxCoeff() < 0.5);
    for (int j = 0; j + 1 < cfg.N; ++j)
        CHECK(g.angle_points[j + 1] - g.angle_points[j] == doctest::Approx(g.angle_step));
}

TEST_CASE("standard grid atoms form an orthogonal dictionary with Gram N*M*I") {
    const ChannelConfig cfg = small_cfg();
    const GridSpec g = GridSpec::standard(cfg);
    PathSet grid_paths;
    grid_paths.taus.resize(cfg.M * cfg.N);
    grid_paths.thetas.resize(cfg.M * cfg.N);
    grid_paths.betas = CVec::Ones(cfg.M * cfg.N);
    int idx = 0;
    for (int i = 0; i < cfg.M; ++i)
        for (int j = 0; j < cfg.N; ++j) {
            grid_paths.taus[idx] = g.delay_points[i];
            grid_paths.thetas[idx] = g.angle_points[j];
            ++idx;
        }
    const Dictionary d = build_dictionary(grid_paths, cfg);
    const CMat gram = d.atoms.adjoint() * d.atoms;
    const double nm = static_cast<double>(cfg.dim());
    CHECK((gram - nm * CMat::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-9 * nm);
}

TEST_CASE("correlation_table equals naive inner products") {
    const ChannelConfig cfg = small_cfg();
    const CVec r = random_vector(cfg.dim(), 3);
    Vec taus(3), thetas(4);
    taus << 0.2 * cfg.delay_step(), 1.7 * cfg.delay_step(), 5.1 * cfg.delay_step();
    thetas << -0.41, -0.03, 0.18, 0.44;
    const CMat C = correlation_table(r, taus, thetas, cfg);
    REQUIRE(C.rows() == 3);
    REQUIRE(C.cols() == 4);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) {
            const CVec a = build_atom(taus[i], thetas[j], cfg);
            const cxd naive = a.dot(r);  // conjugates the atom
            CHECK(std::abs(C(i, j) - naive) < 1e-10 * r.norm());
        }
}

TEST_CASE("coarse_select recovers an exact grid atom with peak N*M") {
    const ChannelConfig cfg = small_cfg();
    const GridSpec g = GridSpec::standard(cfg);
    const double tau = g.delay_points[4];
    const double theta = g.angle_points[6];
    const CVec r = build_atom(tau, theta, cfg);
    const CoarseSelection sel = coarse_select(r, g, cfg);
    CHECK(sel.tau_hat == doctest::Approx(tau));
    CHECK(sel.theta_hat == doctest::Approx(theta));
    CHECK(sel.peak_magnitude == doctest::Approx(static_cast<double>(cfg.dim())).epsilon(1e-12));
}

TEST_CASE("coarse_select matches exhaustive evaluation for an off-grid path") {
    const ChannelConfig cfg = small_cfg();
    const GridSpec g = GridSpec::standard(cfg);
    const CVec r = cxd(0.8, -1.1) * build_atom(3.37 * cfg.delay_step(), 0.213, cfg);
    const CoarseSelection sel = coarse_select(r, g, cfg);
    // Exhaustive oracle over the full N*M grid.
    double best = -1.0;
    double bt = 0.0, bh = 0.0;
    for (int i = 0; i < cfg.M; ++i)
        for (int j = 0; j < cfg.N; ++j) {
            const double mag = std::abs(build_atom(g.delay_points[i], g.angle_points[j], cfg).dot(r));
            if (mag > best) {
                best = mag;
                bt = g.delay_points[i];
                bh = g.angle_points[j];
            }
        }
    CHECK(sel.tau_hat == doctest::Approx(bt));
    CHECK(sel.theta_hat == doctest::Approx(bh));
    CHECK(sel.peak_magnitude == doctest::Approx(best).epsilon(1e-10));
}

TEST_CASE("coarse_select prefers the dominant of two on-grid atoms") {
    const ChannelConfig cfg = small_cfg();
    const GridSpec g = GridSpec::standard(cfg);
    const CVec r = 2.0 * build_atom(g.delay_points[2], g.angle_points[1], cfg) +
                   0.7 * build_atom(g.delay_points[9], g.angle_points[5], cfg);
    const CoarseSelection sel = coarse_select(r, g, cfg);
    CHECK(sel.tau_hat == doctest::Approx(g.delay_points[2]));
    CHECK(sel.theta_hat == doctest::Approx(g.angle_points[1]));
}

TEST_CASE("local_refine achieves the documented one-level resolution") {
    const ChannelConfig cfg = small_cfg();
    const GridSpec g = GridSpec::standard(cfg);
    RefinementSpec spec;  // k1 = k2 = 10, n_lr = 1
    const double tau_true = 3.37 * cfg.delay_step();
    const double theta_true = g.angle_points[5] + 0.23 * cfg.angle_step();
    const CVec r = build_atom(tau_true, theta_true, cfg);
    const CoarseSelection sel = coarse_select(r, g, cfg);
    const auto [tau_hat, theta_hat] = local_refine(r, sel.tau_hat, sel.theta_hat, g, spec, cfg);
    // One level with rate 10 leaves at most half a refined cell of error.
    CHECK(std::abs(tau_hat - tau_true) <= 0.5 * cfg.delay_step() / 10 + 1e-15);
    CHECK(std::abs(theta_hat - theta_true) <= 0.5 * cfg.angle_step() / 10 + 1e-15);
}

TEST_CASE("local_refine returns a refined node exactly when the path sits on one") {
    const ChannelConfig cfg = small_cfg();
    const GridSpec g = GridSpec::standard(cfg);
    RefinementSpec spec;
    spec.k1 = 5;
    spec.k2 = 5;
    spec.n_lr = 1;
    // Place the path on a level-1 node: center + 2/5 of a coarse step.
    const double tau_true = g.delay_points[4] + 2.0 * cfg.delay_step() / 5.0;
    const double theta_true = g.angle_points[3] - 1.0 * cfg.angle_step() / 5.0;
    const CVec r = build_atom(tau_true, theta_true, cfg);
    const auto [tau_hat, theta_hat] = local_refine(r, g.delay_points[4], g.angle_points[3], g, spec, cfg);
    CHECK(tau_hat == doctest::Approx(tau_true).epsilon(1e-12));
    CHECK(theta_hat == doctest::Approx(theta_true).epsilon(1e-12));
}

TEST_CASE("local_refine equals a brute-force argmax over the refined grids") {
    const ChannelConfig cfg = small_cfg();
    const GridSpec g = GridSpec::standard(cfg);
    RefinementSpec spec;
    spec.k1 = 4;
    spec.k2 = 3;
    spec.n_lr = 2;
    const CVec r = random_vector(cfg.dim(), 17);
    const double tau0 = g.delay_points[5];
    const double theta0 = g.angle_points[2];
    const auto [tau_hat, theta_hat] = local_refine(r, tau0, theta0, g, spec, cfg);

    // Brute-force replay of the level scheme.
    double tau = tau0, theta = theta0;
    double dstep = g.delay_step, astep = g.angle_step;
    for (int level = 0; level < spec.n_lr; ++level) {
        dstep /= spec.k1;
        astep /= spec.k2;
        double best = -1.0, bt = tau, bh = theta;
        for (int i = -spec.k1; i <= spec.k1; ++i)
            for (int j = -spec.k2; j <= spec.k2; ++j) {
                const double t = tau + i * dstep;
                const double a = theta + j * astep;
                const double mag = std::abs(build_atom(t, a, cfg).dot(r));
                if (mag > best) {
                    best = mag;
                    bt = t;
                    bh = a;
                }
            }
        tau = bt;
        theta = bh;
    }
    CHECK(tau_hat == doctest::Approx(wrap_tau(tau, cfg)).epsilon(1e-12));
    CHECK(theta_hat == doctest::Approx(wrap_theta(theta)).epsilon(1e-12));
}

TEST_CASE("ls_gains closed forms: single atom and orthogonal atoms") {
    const ChannelConfig cfg = small_cfg();
    const GridSpec g = GridSpec::standard(cfg);
    PathSet one;
    one.taus = Vec::Constant(1, g.delay_points[3]);
    one.thetas = Vec::Constant(1, g.angle_points[2]);
    one.betas = CVec::Ones(1);
    const Dictionary d1 = build_dictionary(one, cfg);
    const CVec target = 2.0 * d1.atoms.col(0);
    const CVec beta1 = ls_gains(d1, target);
    CHECK(std::abs(beta1[0] - cxd(2.0, 0.0)) < 1e-12);

    PathSet two;
    two.taus = Vec(2);
    two.thetas = Vec(2);
    two.betas = CVec::Ones(2);
    two.taus << g.delay_points[1], g.delay_points[7];
    two.thetas << g.angle_points[0], g.angle_points[4];
    const Dictionary d2 = build_dictionary(two, cfg);
    const CVec t2 = cxd(1.0, 2.0) * d2.atoms.col(0) + cxd(-0.5, 0.25) * d2.atoms.col(1);
    const CVec beta2 = ls_gains(d2, t2);
    const CVec oracle = d2.atoms.adjoint() * t2 / static_cast<double>(cfg.dim());
    CHECK((beta2 - oracle).norm() < 1e-10);
}

TEST_CASE("ls_gains matches a normal-equation oracle on random atoms") {
    const ChannelConfig cfg = small_cfg();
    PathSet p;
    p.taus = Vec(3);
    p.thetas = Vec(3);
    p.betas = CVec::Ones(3);
    p.taus << 0.31 * cfg.delay_step(), 4.73 * cfg.delay_step(), 8.05 * cfg.delay_step();
    p.thetas << -0.33, 0.02, 0.41;
    const Dictionary d = build_dictionary(p, cfg);
    const CVec target = random_vector(cfg.dim(), 23);
    const CVec beta = ls_gains(d, target);
    // Independent oracle: dense solve of A^H A x = A^H t via full-pivot LU.
    const CMat G = d.atoms.adjoint() * d.atoms;
    const CVec oracle = G.fullPivLu().solve(d.atoms.adjoint() * target);
    CHECK((beta - oracle).norm() < 1e-8 * (oracle.norm() + 1.0));
}

TEST_CASE("ls_gains survives duplicated atoms via ridge jitter") {
    const ChannelConfig cfg = small_cfg();
    PathSet p;
    p.taus = Vec::Constant(2, 1.5 * cfg.delay_step());
    p.thetas = Vec::Constant(2, 0.17);
    p.betas = CVec::Ones(2);
    const Dictionary d = build_dictionary(p, cfg);
    const CVec target = d.atoms.col(0);
    const CVec beta = ls_gains(d, target);
    REQUIRE(beta.allFinite());
    // The fit itself must still be essentially exact.
    CHECK((d.atoms * beta - target).norm() < 1e-6 * target.norm());
}

TEST_CASE("update_residual subtracts the fit and is orthogonal to the span at the LS solution") {
    const ChannelConfig cfg = small_cfg();
    PathSet p;
    p.taus = Vec(2);
    p.thetas = Vec(2);
    p.betas = CVec::Ones(2);
    p.taus << 2.2 * cfg.delay_step(), 6.9 * cfg.delay_step();
    p.thetas << 0.11, -0.29;
    const Dictionary d = build_dictionary(p, cfg);
    const CVec h = random_vector(cfg.dim(), 31);
    const CVec beta = ls_gains(d, h);
    const CVec r = update_residual(h, d, beta);
    CHECK((r - (h - d.atoms * beta)).norm() < 1e-12 * h.norm());
    CHECK((d.atoms.adjoint() * r).cwiseAbs().maxCoeff() < 1e-8 * h.norm());
    CHECK(r.norm() <= h.norm() + 1e-12);
    // Empty dictionary passes the observation through.
    Dictionary empty;
    empty.atoms.resize(cfg.dim(), 0);
    CHECK((update_residual(h, empty, CVec(0)) - h).norm() == 0.0);
}
