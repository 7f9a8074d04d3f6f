#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "qnomp/types.hpp"

namespace qnomp {

// Gain prior E for the regularized profiled loss; either a scalar lambda
// (E = lambda*I) or a per-path diagonal. All entries must be positive.
struct Regularizer {
    double lambda = 0.0;
    Vec E_diag;  // used when non-empty, overrides lambda

    static Regularizer scalar(double lambda) {
        Regularizer r;
        r.lambda = lambda;
        return r;
    }
    static Regularizer diagonal(Vec e) {
        Regularizer r;
        r.E_diag = std::move(e);
        return r;
    }
    double prior(Eigen::Index i) const { return E_diag.size() > 0 ? E_diag[i] : lambda; }
};

// State carried between BFGS iterations. Parameters, gradients and the
// inverse-Hessian blocks all live in normalized units (delays divided by the
// delay DFT step, angles by the angle DFT step) so the two blocks are
// comparably conditioned; conversion happens at the refine_offgrid boundary.
struct BfgsState {
    Vec taus, thetas;            // current iterate (normalized units)
    Vec prev_taus, prev_thetas;  // iterate before the last accepted step
    Mat H_tau, H_theta;          // inverse-Hessian approximations per block
    Vec grad_tau, grad_theta;    // gradient at the current iterate
    Vec prev_grad_tau, prev_grad_theta;
    double loss = 0.0;           // loss at the current iterate
    double delay_step = 0.0;     // normalization constants
    double angle_step = 0.0;
    bool joint_blocks = false;   // single 2k x 2k block (stored in H_tau)
    bool scale_first_update = true;  // rescale H on the first accepted update
    bool h_fresh_tau = true, h_fresh_theta = true;
    int iterations = 0;  // accepted steps
    int curvature_skips = 0;
    int hessian_resets = 0;
    bool stalled = false;
};

// Joint loss callable in normalized units.
using LossFn = std::function<double(const Vec& taus_scaled, const Vec& thetas_scaled)>;

// Profiled loss (1/sigma2)||h' - A beta_hat||^2 with beta_hat the LS gains;
// with a regularizer, beta_hat comes from regularized_gains and the penalty
// beta^H E^{-1} beta is added. sigma2 is floored at 1e-12*||h'||^2/(NM) so
// noiseless observations stay finite.
double loss_profile(const Vec& taus, const Vec& thetas, const Observation& obs, const ChannelConfig& cfg,
                    const std::optional<Regularizer>& reg = std::nullopt);

// Analytic gradients (natural units: d/dtau in 1/seconds, d/dtheta
// dimensionless): g_tau[i] = (2/sigma2) Re[conj(beta_i) da_i^H (A beta - h')],
// evaluated at the profiled beta_hat (the envelope property makes this the
// total derivative).
std::pair<Vec, Vec> grad_profile(const Vec& taus, const Vec& thetas, const Observation& obs,
                                 const ChannelConfig& cfg,
                                 const std::optional<Regularizer>& reg = std::nullopt);

// Backtracking Armijo line search along the supplied descent direction:
// largest alpha in {alpha0 * rho^m} with
// loss(x + alpha d) <= loss(x) + c1 * alpha * g.d  (c1 = 1e-4, rho = 0.5,
// alpha0 = 1, at most 30 backtracks). Returns 0 when no step is admissible
// (stalled); throws std::invalid_argument on an ascent direction.
double armijo_step(const Vec& direction_tau, const Vec& direction_theta, const BfgsState& state,
                   const LossFn& loss_fn);

// Standard inverse-BFGS rank-two update applied independently to the tau and
// theta blocks (or once to the joint block). The state must already hold the
// new iterate in taus/thetas and the pre-step values in prev_*. Updates with
// curvature dg.dx <= 1e-10*||dg||*||dx|| are skipped and counted.
BfgsState bfgs_update(BfgsState state, const Vec& new_grad_tau, const Vec& new_grad_theta);

struct RefineOptions {
    double grad_tol = 0.0;      // early exit when the joint gradient norm
                                // (normalized units) drops below this
    bool joint_blocks = false;  // one joint inverse-Hessian instead of two
    bool scale_first_update = true;
};

struct RefineOutcome {
    Vec taus;     // natural units (seconds / directional cosine)
    Vec thetas;
    BfgsState state;
};

// n_in BFGS iterations jointly over all paths, minimizing the (optionally
// regularized) profiled loss. Loss is non-increasing across accepted steps;
// a stalled line search returns early with the current parameters.
RefineOutcome refine_offgrid(const Vec& initial_taus, const Vec& initial_thetas, const Observation& obs,
                             const ChannelConfig& cfg, int n_in,
                             const std::optional<Regularizer>& reg = std::nullopt,
                             const RefineOptions& options = {});

// beta = (A^H A + sigma2 E^{-1})^{-1} A^H h'.
CVec regularized_gains(const Dictionary& dictionary, const Observation& obs, const Regularizer& reg);

}  // namespace qnomp
