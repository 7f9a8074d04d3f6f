#pragma once

#include <optional>
#include <vector>

#include "qnomp/offgrid.hpp"
#include "qnomp/ongrid.hpp"
#include "qnomp/types.hpp"

namespace qnomp {

// Knobs of the two-stage estimator: the greedy OMP stage (coarse select +
// local refine + n_in joint BFGS steps per detection, CFAR stopping) and the
// final joint stage (n_out regularized BFGS iterations over all paths).
struct QnompConfig {
    RefinementSpec refinement;
    int n_in = 3;
    int n_out = 40;
    double p_fa = 1e-2;
    // Gain prior E = lambda*I for the joint stage. Unset: lambda is taken as
    // the mean estimated path energy |beta|^2/N_p when entering the stage.
    std::optional<double> lambda;
    int max_paths = 32;  // safety cap on detections
    bool joint_blocks = false;
    bool scale_first_update = true;

    void validate() const {
        if (!(p_fa > 0.0 && p_fa < 1.0)) throw std::invalid_argument("QnompConfig: p_fa must be in (0,1)");
        if (n_in < 0 || n_out < 0) throw std::invalid_argument("QnompConfig: iteration budgets must be >= 0");
        if (lambda && !(*lambda > 0.0)) throw std::invalid_argument("QnompConfig: lambda must be > 0");
        if (max_paths < 1) throw std::invalid_argument("QnompConfig: max_paths must be >= 1");
    }
};

struct QnompDiagnostics {
    int omp_iterations = 0;
    int joint_iterations = 0;        // accepted joint-stage BFGS steps
    bool cfar_stopped = false;       // loop ended because the peak fell below threshold
    bool truncated = false;          // loop ended at max_paths with the peak still above
    double final_grid_peak_sq = 0.0; // |<a,r>|^2 peak of the pre-joint-stage residual
    double cfar_threshold_value = 0.0;
    double sigma2_eff = 0.0;         // floored sigma2 actually used
    double lambda_used = 0.0;        // joint-stage prior (0 when the stage never ran)
    double delay_step = 0.0;         // normalization constant for the Hessian diagonal
    std::vector<double> residual_norms;  // after each OMP detection
    int curvature_skips = 0;
    int hessian_resets = 0;
    int newton_fallbacks = 0;  // NOMP only: gradient steps taken in place of Newton
};

// Output of any estimator in this project: recovered paths (sorted by
// descending |beta|) plus whatever posterior information the method carries.
struct EstimationResult {
    PathSet paths;
    // Diagonal of the final joint-stage inverse-Hessian tau-block, in
    // normalized (delay-step) units; empty when the method has no curvature
    // information (on-grid OMP, NOMP, or a joint stage that converged
    // without accepting a step).
    Vec delay_inv_hessian_diag;
    double residual_norm = 0.0;  // ||h' - A beta|| of the returned estimate
    QnompDiagnostics diagnostics;
};

// Detection threshold on the squared grid correlation peak |<a, r>|^2:
// N*M*sigma2*(log(NM) - log(-log(1 - p_fa))). Under pure noise the peak
// statistic |<a,r>|^2/(NM sigma2) is unit-rate exponential per orthogonal
// grid atom, so the max over the NM grid atoms exceeds this threshold with
// probability p_fa exactly.
double cfar_threshold(const ChannelConfig& cfg, double sigma2, double p_fa);

// The full two-stage estimator.
EstimationResult qnomp_run(const Observation& obs, const ChannelConfig& cfg, const QnompConfig& qcfg);

// Model evaluation on the extrapolation bands at the estimated parameters
// (length N*K*M; empty for K = 0).
CVec extrapolate_plugin(const EstimationResult& result, const ChannelConfig& cfg);

}  // namespace qnomp
