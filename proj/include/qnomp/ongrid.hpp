#pragma once

#include "qnomp/types.hpp"

namespace qnomp {

// The standard DFT grid: delay_points = dtau * [0..M-1] covering [0, 1/df),
// angle_points = dtheta * [-N/2 .. N/2-1] covering [-1/2, 1/2).
struct GridSpec {
    double delay_step = 0.0;
    double angle_step = 0.0;
    Vec delay_points;
    Vec angle_points;

    static GridSpec standard(const ChannelConfig& cfg);
};

// Multi-resolution refinement parameters: at level n (1-based) the local grid
// spans the current estimate +- k*step with step = dft_step / k^n.
struct RefinementSpec {
    int k1 = 10;
    int k2 = 10;
    int n_lr = 1;
};

// Correlation table <a(tau_i, theta_j), r> for all pairs of the given delay
// and angle values, computed with two small matrix products instead of one
// inner product per atom (the atoms factor as a Kronecker product).
CMat correlation_table(const CVec& residual, const Vec& taus, const Vec& thetas, const ChannelConfig& cfg);

struct CoarseSelection {
    double tau_hat = 0.0;
    double theta_hat = 0.0;
    double peak_magnitude = 0.0;  // |<a, r>| at the argmax
};

// Argmax of |<a(tau_i, theta_j), residual>| over the standard grid.
// Ties break toward the lowest linear index, delay-major.
CoarseSelection coarse_select(const CVec& residual, const GridSpec& grid, const ChannelConfig& cfg);

// Multi-resolution local refinement around a coarse estimate: n_lr levels of
// (2k1+1)x(2k2+1) local grids with geometrically shrinking spacing; final
// resolution delay_step/k1^n_lr x angle_step/k2^n_lr.
std::pair<double, double> local_refine(const CVec& residual, double tau0, double theta0, const GridSpec& grid,
                                       const RefinementSpec& spec, const ChannelConfig& cfg);

// Minimum-norm least squares gains beta = A^+ target. Near-singular Gram
// matrices are solved with a tiny ridge jitter instead of aborting (nearly
// duplicate atoms occur when the greedy loop re-selects a region).
CVec ls_gains(const Dictionary& dictionary, const CVec& target);

// r = h' - A * gains.
CVec update_residual(const CVec& h_prime, const Dictionary& dictionary, const CVec& gains);

}  // namespace qnomp
