#pragma once

#include <utility>

#include "qnomp/qnomp.hpp"
#include "qnomp/types.hpp"

namespace qnomp {

// Gaussian approximation of the per-path delay posterior: mean at the MAP
// estimate, variance read off the BFGS inverse-Hessian diagonal.
struct DelayPosterior {
    Vec map_taus;    // seconds
    Vec variances;   // seconds^2, clipped to <= (delay_step/2)^2
    bool delta_fallback = false;  // set when Hessian info was missing
};

enum class QuadratureConvention {
    Exact,  // normalized Gauss-Hermite weights
    Paper,  // the reference pipeline's constants (S = 3: 1/4, 1/2, 1/4)
};

// Quadrature rule for E[f(tau)] under tau ~ N(mu, delta): nodes are placed at
// mu + sqrt(2*delta)*x_k.
struct QuadratureRule {
    Vec nodes;    // x_k, symmetric about 0
    Vec weights;  // w_k
};

// Linear optimal extrapolation operator: per-path quadrature nodes lifted
// into pilot-band (B0) and extrapolation-band (Be) dictionaries, with the
// diagonal prior D = diag(E (x) w) (path-major: entry i*S+k is E_i * w_k).
struct LoxOperator {
    CMat B0;  // M x S*N_p
    CMat Be;  // K*M x S*N_p
    Vec D;
};

// Read the delay posterior out of an estimation result. Missing curvature
// information (baselines, or n_out = 0) degrades to a delta posterior with
// the fallback flag set.
DelayPosterior posterior_from_bfgs(const EstimationResult& result);

// S-point rule, S in {1, 3, 5}. The paper convention is only distinguished
// for S = 3 (weights 1/4, 1/2, 1/4); S = 5 falls back to the exact weights.
QuadratureRule gauss_hermite_rule(int S, QuadratureConvention convention = QuadratureConvention::Paper);

// Assemble B0, Be, D from the posterior, per-path prior energies E_i and the
// quadrature rule. Node i,k sits at map_taus[i] + sqrt(2*variances[i])*x_k.
LoxOperator build_lox_operator(const DelayPosterior& posterior, const Vec& energies,
                               const QuadratureRule& rule, const ChannelConfig& cfg);

// h_tilde = Be (B0^H B0 + sigma2 D^{-1})^{-1} B0^H obs_freq, the LMMSE
// extrapolation under the quadrature prior (right-hand algebraic form; the
// equivalent covariance form Be D B0^H (B0 D B0^H + sigma2 I)^{-1} is used
// when D has zero entries). sigma2 is floored like the loss so a noiseless
// call stays well posed.
CVec lox_extrapolate(const LoxOperator& op, const CVec& obs_freq, double sigma2);

// Rank-r restriction of LOX: the pilot-side solve is confined to the span of
// the M x r orthonormal basis, h_tilde = Be D B0^H U (U^H (B0 D B0^H +
// sigma2 I) U)^{-1} U^H obs_freq. r = M with any orthonormal basis recovers
// full LOX; r = 0 gives the zero vector. A non-orthonormal basis is
// re-orthonormalized with a warning on stderr.
CVec lowrank_lox(const LoxOperator& op, const CVec& obs_freq, double sigma2, int r, const CMat& basis);

// Top-r eigenvectors of the pilot-band prior covariance B0 D B0^H (the
// sigma2 I shift leaves eigenvectors unchanged), descending eigenvalue
// order, each column phase-normalized for determinism.
CMat optimal_basis(const LoxOperator& op, double sigma2, int r);

// Eigen-decomposition of the sinc-kernel Toeplitz matrix
// T(c) = (c/m) Toeplitz(u), u_k = sin(pi k c/m)/(pi k c/m), u_0 = 1.
// Returns (eigenvalues descending in (0,1), orthonormal eigenvectors); the
// eigenvectors are the DPSS family with time-bandwidth parameter c.
std::pair<Vec, Mat> dpss_toeplitz(int m, double c);

// Predicted NMSE of the k-basis LMMSE estimator for a single path with
// uniform delay prior: 1 - sum_{i<k} (lambda_i/c)^2 / (lambda_i/c +
// sigma2/(m E)). eigenvalues must be the DPSS spectrum, descending.
double lowrank_nmse_formula(const Vec& eigenvalues, double c, int k, double sigma2, int m, double E);

// Full-channel LOX: quadrature over delay only, angles pinned at their MAP
// values, atoms a(tau_i^k) (x) a_theta(theta_i^MAP). Energies default to the
// estimated |beta_i|^2. Output length N*K*M.
CVec lox_extrapolate_2d(const EstimationResult& result, const Observation& obs, const ChannelConfig& cfg,
                        const QuadratureRule& rule);

}  // namespace qnomp
