#include "qnomp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "qnomp/core.hpp"

namespace qnomp {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr Eigen::Index kMaxGridCells = 4'000'000;

struct Refit {
    Dictionary dict;
    CVec beta;
    CVec residual;
};

Refit refit_all(const Vec& taus, const Vec& thetas, const CVec& h_prime, const ChannelConfig& cfg) {
    PathSet params;
    params.taus = taus;
    params.thetas = thetas;
    params.betas = CVec::Zero(taus.size());
    Refit out;
    out.dict = build_dictionary(params, cfg);
    out.beta = ls_gains(out.dict, h_prime);
    out.residual = update_residual(h_prime, out.dict, out.beta);
    return out;
}

EstimationResult finalize(Vec taus, Vec thetas, CVec beta, const CVec& residual, const ChannelConfig& cfg,
                          QnompDiagnostics diag) {
    EstimationResult result;
    const Eigen::Index n_p = taus.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n_p));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::norm(beta[a]) > std::norm(beta[b]); });
    PathSet sorted;
    sorted.taus.resize(n_p);
    sorted.thetas.resize(n_p);
    sorted.betas.resize(n_p);
    for (Eigen::Index i = 0; i < n_p; ++i) {
        sorted.taus[i] = taus[order[static_cast<std::size_t>(i)]];
        sorted.thetas[i] = thetas[order[static_cast<std::size_t>(i)]];
        sorted.betas[i] = beta[order[static_cast<std::size_t>(i)]];
    }
    result.paths = sorted.canonicalized(cfg);
    result.residual_norm = residual.norm();
    result.diagnostics = std::move(diag);
    return result;
}

// Shared greedy on-grid loop: CFAR stop statistic on the standard orthogonal
// grid, per-iteration detection delegated to `detect`, full LS refit after
// every detection.
EstimationResult greedy_omp(const Observation& obs, const ChannelConfig& cfg, double p_fa, int max_paths,
                            const std::function<std::pair<double, double>(const CVec&, const CoarseSelection&)>&
                                detect) {
    require_valid(cfg);
    if (obs.h_prime.size() != cfg.dim()) throw std::invalid_argument("omp: observation length != N*M");
    const double nm = static_cast<double>(cfg.dim());
    const double sigma2_eff = std::max(obs.sigma2, 1e-12 * obs.h_prime.squaredNorm() / nm);

    QnompDiagnostics diag;
    diag.sigma2_eff = sigma2_eff;
    diag.delay_step = cfg.delay_step();
    const double threshold = sigma2_eff > 0.0 ? cfar_threshold(cfg, sigma2_eff, p_fa) : 0.0;
    diag.cfar_threshold_value = threshold;

    const GridSpec grid = GridSpec::standard(cfg);
    Vec taus(0), thetas(0);
    CVec beta(0);
    CVec residual = obs.h_prime;
    while (true) {
        const CoarseSelection sel = coarse_select(residual, grid, cfg);
        const double peak_sq = sel.peak_magnitude * sel.peak_magnitude;
        diag.final_grid_peak_sq = peak_sq;
        if (peak_sq <= threshold) {
            diag.cfar_stopped = true;
            break;
        }
        if (taus.size() >= max_paths) {
            diag.truncated = true;
            break;
        }
        const auto [tau_new, theta_new] = detect(residual, sel);
        const Eigen::Index k = taus.size() + 1;
        taus.conservativeResize(k);
        thetas.conservativeResize(k);
        taus[k - 1] = tau_new;
        thetas[k - 1] = theta_new;
        const Refit fit = refit_all(taus, thetas, obs.h_prime, cfg);
        beta = fit.beta;
        residual = fit.residual;
        diag.residual_norms.push_back(residual.norm());
        ++diag.omp_iterations;
    }
    return finalize(std::move(taus), std::move(thetas), std::move(beta), residual, cfg, std::move(diag));
}

}  // namespace

EstimationResult omp_finegrid(const Observation& obs, const ChannelConfig& cfg, double grid_scale,
                              double p_fa, int max_paths) {
    require_valid(cfg);
    if (!(grid_scale > 0.0 && grid_scale <= 1.0))
        throw std::invalid_argument("omp_finegrid: grid_scale must be in (0,1]");
    const auto n_d = static_cast<Eigen::Index>(std::lround(cfg.M / grid_scale));
    const auto n_a = static_cast<Eigen::Index>(std::lround(cfg.N / grid_scale));
    if (n_d * n_a > kMaxGridCells)
        throw std::length_error("omp_finegrid: fine grid exceeds the cell budget");

    GridSpec fine;
    fine.delay_step = cfg.delay_step() * grid_scale;
    fine.angle_step = cfg.angle_step() * grid_scale;
    fine.delay_points.resize(n_d);
    for (Eigen::Index i = 0; i < n_d; ++i) fine.delay_points[i] = static_cast<double>(i) * fine.delay_step;
    fine.angle_points.resize(n_a);
    for (Eigen::Index j = 0; j < n_a; ++j) fine.angle_points[j] = -0.5 + static_cast<double>(j) * fine.angle_step;

    return greedy_omp(obs, cfg, p_fa, max_paths, [&](const CVec& residual, const CoarseSelection&) {
        const CoarseSelection sel = coarse_select(residual, fine, cfg);
        return std::pair<double, double>{sel.tau_hat, sel.theta_hat};
    });
}

EstimationResult omp_refined(const Observation& obs, const ChannelConfig& cfg, const RefinementSpec& spec,
                             double p_fa, int max_paths) {
    const GridSpec grid = GridSpec::standard(cfg);
    return greedy_omp(obs, cfg, p_fa, max_paths, [&](const CVec& residual, const CoarseSelection& sel) {
        return local_refine(residual, sel.tau_hat, sel.theta_hat, grid, spec, cfg);
    });
}

namespace {

// One ascent step on S(x, y) = |a(x, y)^H r|^2 in DFT-normalized coordinates
// x = tau/dt, y = theta/da. Newton when the 2x2 Hessian of S is negative
// definite and the step improves S; otherwise backtracking gradient ascent.
// Returns true when the gradient fallback fired.
bool single_path_step(double& tau, double& theta, const CVec& r_plus, const ChannelConfig& cfg) {
    const double dt = cfg.delay_step();
    const double da = cfg.angle_step();
    const auto S_of = [&](double t, double th) {
        const cxd z = build_atom(t, th, cfg).dot(r_plus);
        return std::norm(z);
    };

    const CVec a = build_atom(tau, theta, cfg);
    // Derivative factors in normalized coordinates: d/dx multiplies entry
    // (k*N + n) by -j*2pi*k/M, d/dy by -j*2pi*n/N.
    CVec ax(a.size()), ay(a.size()), axx(a.size()), ayy(a.size()), axy(a.size());
    for (int k = 0; k < cfg.M; ++k) {
        const double fx = kTwoPi * k / cfg.M;
        for (int n = 0; n < cfg.N; ++n) {
            const double fy = kTwoPi * n / cfg.N;
            const Eigen::Index idx = static_cast<Eigen::Index>(k) * cfg.N + n;
            const cxd v = a[idx];
            ax[idx] = cxd(0.0, -fx) * v;
            ay[idx] = cxd(0.0, -fy) * v;
            axx[idx] = -fx * fx * v;
            ayy[idx] = -fy * fy * v;
            axy[idx] = -fx * fy * v;
        }
    }
    const cxd z = a.dot(r_plus);
    const cxd zx = ax.dot(r_plus);
    const cxd zy = ay.dot(r_plus);
    const cxd zxx = axx.dot(r_plus);
    const cxd zyy = ayy.dot(r_plus);
    const cxd zxy = axy.dot(r_plus);

    const double s = std::norm(z);
    const double gx = 2.0 * (std::conj(z) * zx).real();
    const double gy = 2.0 * (std::conj(z) * zy).real();
    const double hxx = 2.0 * (std::norm(zx) + (std::conj(z) * zxx).real());
    const double hyy = 2.0 * (std::norm(zy) + (std::conj(z) * zyy).real());
    const double hxy = 2.0 * ((std::conj(zx) * zy).real() + (std::conj(z) * zxy).real());

    const double det = hxx * hyy - hxy * hxy;
    if (hxx < 0.0 && det > 0.0) {
        // Newton on the maximization: solve H d = -g.
        const double dx = (-gx * hyy + gy * hxy) / det;
        const double dy = (-gy * hxx + gx * hxy) / det;
        const double t_new = tau + dx * dt;
        const double th_new = theta + dy * da;
        if (S_of(t_new, th_new) >= s) {
            tau = t_new;
            theta = th_new;
            return false;
        }
    }
    const double gnorm = std::hypot(gx, gy);
    if (gnorm == 0.0) return true;
    double alpha = 0.5;
    for (int m = 0; m < 30; ++m, alpha *= 0.5) {
        const double t_new = tau + alpha * gx / gnorm * dt;
        const double th_new = theta + alpha * gy / gnorm * da;
        if (S_of(t_new, th_new) > s) {
            tau = t_new;
            theta = th_new;
            break;
        }
    }
    return true;
}

}  // namespace

EstimationResult nomp_run(const Observation& obs, const ChannelConfig& cfg, const NompConfig& ncfg) {
    require_valid(cfg);
    ncfg.validate();
    if (obs.h_prime.size() != cfg.dim()) throw std::invalid_argument("nomp_run: observation length != N*M");
    const double nm = static_cast<double>(cfg.dim());
    const double sigma2_eff = std::max(obs.sigma2, 1e-12 * obs.h_prime.squaredNorm() / nm);

    QnompDiagnostics diag;
    diag.sigma2_eff = sigma2_eff;
    diag.delay_step = cfg.delay_step();
    const double threshold = sigma2_eff > 0.0 ? cfar_threshold(cfg, sigma2_eff, ncfg.p_fa) : 0.0;
    diag.cfar_threshold_value = threshold;

    const GridSpec grid = GridSpec::standard(cfg);
    Vec taus(0), thetas(0);
    CVec beta(0);
    CVec residual = obs.h_prime;

    // One cyclic pass: single ascent step per path in descending-|beta|
    // order, full LS refit after each move.
    const auto cyclic_round = [&]() {
        const Eigen::Index k = taus.size();
        std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](Eigen::Index a, Eigen::Index b) { return std::norm(beta[a]) > std::norm(beta[b]); });
        for (const Eigen::Index i : order) {
            const CVec r_plus = residual + build_atom(taus[i], thetas[i], cfg) * beta[i];
            if (single_path_step(taus[i], thetas[i], r_plus, cfg)) ++diag.newton_fallbacks;
            const Refit fit = refit_all(taus, thetas, obs.h_prime, cfg);
            beta = fit.beta;
            residual = fit.residual;
        }
    };

    while (true) {
        const CoarseSelection sel = coarse_select(residual, grid, cfg);
        const double peak_sq = sel.peak_magnitude * sel.peak_magnitude;
        diag.final_grid_peak_sq = peak_sq;
        if (peak_sq <= threshold) {
            diag.cfar_stopped = true;
            break;
        }
        if (taus.size() >= ncfg.max_paths) {
            diag.truncated = true;
            break;
        }
        auto [tau_new, theta_new] = local_refine(residual, sel.tau_hat, sel.theta_hat, grid,
                                                 ncfg.refinement, cfg);
        for (int s = 0; s < ncfg.Rs; ++s)
            if (single_path_step(tau_new, theta_new, residual, cfg)) ++diag.newton_fallbacks;

        const Eigen::Index k = taus.size() + 1;
        taus.conservativeResize(k);
        thetas.conservativeResize(k);
        taus[k - 1] = tau_new;
        thetas[k - 1] = theta_new;
        const Refit fit = refit_all(taus, thetas, obs.h_prime, cfg);
        beta = fit.beta;
        residual = fit.residual;

        for (int round = 0; round < ncfg.Rc; ++round) cyclic_round();
        diag.residual_norms.push_back(residual.norm());
        ++diag.omp_iterations;
    }

    for (int round = 0; round < ncfg.n_out; ++round)
        if (taus.size() > 0) cyclic_round();

    return finalize(std::move(taus), std::move(thetas), std::move(beta), residual, cfg, std::move(diag));
}

Vec delay_crb(const PathSet& paths, const ChannelConfig& cfg, double sigma2) {
    require_valid(cfg);
    if (!paths.consistent() || paths.size() == 0) throw std::invalid_argument("delay_crb: invalid path set");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("delay_crb: sigma2 must be > 0");
    const Eigen::Index L = paths.size();

    // Delay columns are scaled to delay-step units (and angle columns to
    // angle-step units) so the information matrix is comparably conditioned
    // across blocks; seconds-vs-gain scales otherwise differ by ~1e14 and
    // make any relative singularity test meaningless.
    const double dt = cfg.delay_step();
    const double da = cfg.angle_step();
    CMat J(cfg.dim(), 4 * L);
    for (Eigen::Index i = 0; i < L; ++i) {
        const CVec a = build_atom(paths.taus[i], paths.thetas[i], cfg);
        J.col(i) = (paths.betas[i] * dt) * build_atom_dtau(paths.taus[i], paths.thetas[i], cfg);
        J.col(L + i) = (paths.betas[i] * da) * build_atom_dtheta(paths.taus[i], paths.thetas[i], cfg);
        J.col(2 * L + i) = a;
        J.col(3 * L + i) = cxd(0.0, 1.0) * a;
    }
    const Mat fim = (2.0 / sigma2) * (J.adjoint() * J).real();

    Eigen::SelfAdjointEigenSolver<Mat> eig(fim);
    if (eig.info() != Eigen::Success) throw std::runtime_error("delay_crb: eigen-decomposition failed");
    const Vec& ev = eig.eigenvalues();
    if (!(ev.minCoeff() > 1e-12 * ev.maxCoeff()))
        throw std::domain_error("delay_crb: singular Fisher information (coincident paths?)");
    const Mat inv = eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    return dt * dt * inv.diagonal().head(L);
}

}  // namespace qnomp
