#include "qnomp/qnomp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qnomp/core.hpp"

namespace qnomp {

double cfar_threshold(const ChannelConfig& cfg, double sigma2, double p_fa) {
    require_valid(cfg);
    if (!(p_fa > 0.0 && p_fa < 1.0)) throw std::domain_error("cfar_threshold: p_fa must be in (0,1)");
    if (!(sigma2 > 0.0)) throw std::domain_error("cfar_threshold: sigma2 must be > 0");
    const double nm = static_cast<double>(cfg.dim());
    // P(max_i X_i > t) = p_fa for NM i.i.d. Exp(1) variables, solved exactly:
    // t = log(NM) - log(-log(1 - p_fa)) up to the (1 - p/NM)^NM ~ e^-p step.
    const double t = std::log(nm) - std::log(-std::log1p(-p_fa));
    return nm * sigma2 * t;
}

EstimationResult qnomp_run(const Observation& obs, const ChannelConfig& cfg, const QnompConfig& qcfg) {
    require_valid(cfg);
    qcfg.validate();
    if (obs.h_prime.size() != cfg.dim()) throw std::invalid_argument("qnomp_run: observation length != N*M");

    const double nm = static_cast<double>(cfg.dim());
    const double sigma2_eff = std::max(obs.sigma2, 1e-12 * obs.h_prime.squaredNorm() / nm);
    Observation work{obs.h_prime, sigma2_eff};

    EstimationResult result;
    result.diagnostics.sigma2_eff = sigma2_eff;
    result.diagnostics.delay_step = cfg.delay_step();
    const double threshold =
        sigma2_eff > 0.0 ? cfar_threshold(cfg, sigma2_eff, qcfg.p_fa) : 0.0;  // zero only for h' = 0
    result.diagnostics.cfar_threshold_value = threshold;

    const GridSpec grid = GridSpec::standard(cfg);

    // --- OMP stage: detect, refine locally, refine all paths jointly, refit.
    Vec taus(0), thetas(0);
    CVec beta(0);
    CVec residual = obs.h_prime;
    while (true) {
        const CoarseSelection sel = coarse_select(residual, grid, cfg);
        const double peak_sq = sel.peak_magnitude * sel.peak_magnitude;
        result.diagnostics.final_grid_peak_sq = peak_sq;
        if (peak_sq <= threshold) {
            result.diagnostics.cfar_stopped = true;
            break;
        }
        if (taus.size() >= qcfg.max_paths) {
            result.diagnostics.truncated = true;
            break;
        }

        const auto [tau_new, theta_new] = local_refine(residual, sel.tau_hat, sel.theta_hat, grid,
                                                       qcfg.refinement, cfg);
        const Eigen::Index k = taus.size() + 1;
        taus.conservativeResize(k);
        thetas.conservativeResize(k);
        taus[k - 1] = tau_new;
        thetas[k - 1] = theta_new;

        RefineOptions opts;
        opts.joint_blocks = qcfg.joint_blocks;
        opts.scale_first_update = qcfg.scale_first_update;
        const RefineOutcome ref = refine_offgrid(taus, thetas, work, cfg, qcfg.n_in, std::nullopt, opts);
        taus = ref.taus;
        thetas = ref.thetas;
        result.diagnostics.curvature_skips += ref.state.curvature_skips;
        result.diagnostics.hessian_resets += ref.state.hessian_resets;

        PathSet params;
        params.taus = taus;
        params.thetas = thetas;
        params.betas = CVec::Zero(k);
        const Dictionary dict = build_dictionary(params, cfg);
        beta = ls_gains(dict, obs.h_prime);
        residual = update_residual(obs.h_prime, dict, beta);
        result.diagnostics.residual_norms.push_back(residual.norm());
        ++result.diagnostics.omp_iterations;
    }

    const Eigen::Index n_p = taus.size();
    if (n_p == 0) {
        result.residual_norm = obs.h_prime.norm();
        return result;
    }

    // --- Joint stage: n_out BFGS iterations on the regularized loss with
    // E = lambda*I, then final regularized gains.
    const double lambda = qcfg.lambda ? *qcfg.lambda
                                      : std::max(beta.squaredNorm() / static_cast<double>(n_p),
                                                 1e-300);  // all-zero gains cannot happen past CFAR
    result.diagnostics.lambda_used = lambda;
    const Regularizer reg = Regularizer::scalar(lambda);

    RefineOptions jopts;
    jopts.grad_tol = 1e-8;
    jopts.joint_blocks = qcfg.joint_blocks;
    jopts.scale_first_update = qcfg.scale_first_update;
    const RefineOutcome joint = refine_offgrid(taus, thetas, work, cfg, qcfg.n_out, reg, jopts);
    taus = joint.taus;
    thetas = joint.thetas;
    result.diagnostics.joint_iterations = joint.state.iterations;
    result.diagnostics.curvature_skips += joint.state.curvature_skips;
    result.diagnostics.hessian_resets += joint.state.hessian_resets;

    PathSet params;
    params.taus = taus;
    params.thetas = thetas;
    params.betas = CVec::Zero(n_p);
    const Dictionary dict = build_dictionary(params, cfg);
    params.betas = regularized_gains(dict, work, reg);

    // Posterior-variance surrogate: diagonal of the joint-stage inverse
    // Hessian tau-block (normalized units). A stage that never accepted a
    // step leaves H at the initial identity, which carries no curvature
    // information, so nothing is reported and the posterior degrades to a
    // delta downstream.
    const bool have_curvature = joint.state.iterations > 0;
    Vec hdiag = Vec::Zero(n_p);
    if (have_curvature)
        for (Eigen::Index i = 0; i < n_p; ++i)
            hdiag[i] = std::max(joint.state.H_tau(i, i), 0.0);

    // Sort by descending |beta|, carrying the Hessian diagonal along.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n_p));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::norm(params.betas[a]) > std::norm(params.betas[b]);
    });
    PathSet sorted;
    sorted.taus.resize(n_p);
    sorted.thetas.resize(n_p);
    sorted.betas.resize(n_p);
    result.delay_inv_hessian_diag.resize(have_curvature ? n_p : 0);
    for (Eigen::Index i = 0; i < n_p; ++i) {
        sorted.taus[i] = params.taus[order[static_cast<std::size_t>(i)]];
        sorted.thetas[i] = params.thetas[order[static_cast<std::size_t>(i)]];
        sorted.betas[i] = params.betas[order[static_cast<std::size_t>(i)]];
        if (have_curvature) result.delay_inv_hessian_diag[i] = hdiag[order[static_cast<std::size_t>(i)]];
    }
    result.paths = sorted.canonicalized(cfg);
    result.residual_norm = (obs.h_prime - dict.atoms * params.betas).norm();
    return result;
}

CVec extrapolate_plugin(const EstimationResult& result, const ChannelConfig& cfg) {
    require_valid(cfg);
    return synthesize_extrapolated(result.paths, cfg);
}

}  // namespace qnomp
