#pragma once

#include "qnomp/types.hpp"

namespace qnomp {

// Frequency response atom. band_offset = 0: pilot band, entries
// exp(-j2pi*tau*k*delta_f) for k = 0..M-1. band_offset = 1: the one-sided
// extrapolation span, k replaced by M..M*(K+1)-1 (length K*M).
CVec build_freq_atom(double tau, const ChannelConfig& cfg, int band_offset = 0);

// ULA steering atom, entries exp(-j2pi*n*theta) for n = 0..N-1.
CVec build_steering_atom(double theta, const ChannelConfig& cfg);

// Full 2-D atom a(tau, theta) = a_tau(tau) (x) a_theta(theta), length N*M,
// entry (k*N + n) = exp(-j2pi*(tau*k*delta_f + n*theta)).
CVec build_atom(double tau, double theta, const ChannelConfig& cfg);

// Derivatives of the 2-D atom with respect to tau / theta (used by the
// off-grid stage, NOMP and the CRB).
CVec build_atom_dtau(double tau, double theta, const ChannelConfig& cfg);
CVec build_atom_dtheta(double tau, double theta, const ChannelConfig& cfg);

// Atom matrix for a whole path set (pilot band).
Dictionary build_dictionary(const PathSet& paths, const ChannelConfig& cfg);

// h = A(tau, theta) * beta over the pilot band.
CVec synthesize_channel(const PathSet& paths, const ChannelConfig& cfg);

// Same model evaluated on the one-sided extrapolation bands
// f = (M .. M*(K+1)-1) * delta_f; length N*K*M (empty for K = 0).
CVec synthesize_extrapolated(const PathSet& paths, const ChannelConfig& cfg);

// ||truth - estimate||^2 / ||truth||^2. Throws std::domain_error on
// zero-norm truth or length mismatch.
double channel_nmse(const CVec& truth, const CVec& estimate);

enum class DelayMatching {
    NearestWithReplacement,  // default: each true delay matched to its closest estimate
    OneToOne,                // optional greedy one-to-one assignment
};

// Normalized squared delay error: for each true delay take the closest
// estimate (wrapped metric, period 1/delta_f implied by dft_resolution * M is
// not known here, so the caller passes the resolution and the count L), and
// return sum (tau - tau_hat)^2 / (L * dft_resolution^2).
double delay_nmse(const Vec& true_taus, const Vec& est_taus, double dft_resolution, Eigen::Index L,
                  DelayMatching mode = DelayMatching::NearestWithReplacement,
                  double period = 0.0);

}  // namespace qnomp
