#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace qnomp {

using cxd = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

// Static system dimensions: M pilot subcarriers with spacing delta_f, N ULA
// antennas, and K extra M-subcarrier-wide bands beyond the pilots that the
// extrapolators fill in.
struct ChannelConfig {
    int M = 24;
    int N = 64;
    double delta_f = 240e3;  // Hz
    int K = 0;

    bool valid() const { return M >= 1 && N >= 1 && delta_f > 0.0 && K >= 0; }

    // DFT resolutions of the standard grid.
    double delay_step() const { return 1.0 / (static_cast<double>(M) * delta_f); }
    double angle_step() const { return 1.0 / static_cast<double>(N); }
    // One delay period (delays are identifiable modulo 1/delta_f).
    double delay_period() const { return 1.0 / delta_f; }
    Eigen::Index dim() const { return static_cast<Eigen::Index>(M) * N; }
};

inline void require_valid(const ChannelConfig& cfg) {
    if (!cfg.valid()) throw std::invalid_argument("ChannelConfig: M,N >= 1, delta_f > 0, K >= 0 required");
}

// Wrap a delay into the canonical period [0, 1/delta_f).
inline double wrap_tau(double tau, const ChannelConfig& cfg) {
    const double period = cfg.delay_period();
    double t = tau - std::floor(tau / period) * period;
    if (t >= period) t -= period;  // guard against floor rounding at the edge
    if (t < 0.0) t += period;
    return t;
}

// Wrap a directional cosine into [-1/2, 1/2).
inline double wrap_theta(double theta) {
    double t = theta - std::floor(theta + 0.5);
    if (t >= 0.5) t -= 1.0;
    if (t < -0.5) t += 1.0;
    return t;
}

// The estimand: L propagation paths, each a (delay, directional cosine,
// complex gain) triple.
struct PathSet {
    Vec taus;     // seconds
    Vec thetas;   // dimensionless directional cosines
    CVec betas;   // complex gains

    Eigen::Index size() const { return taus.size(); }

    bool consistent() const { return taus.size() == thetas.size() && taus.size() == betas.size(); }

    // Canonically wrapped copy: taus in [0, 1/delta_f), thetas in [-1/2, 1/2).
    PathSet canonicalized(const ChannelConfig& cfg) const {
        PathSet out = *this;
        for (Eigen::Index i = 0; i < out.taus.size(); ++i) out.taus[i] = wrap_tau(out.taus[i], cfg);
        for (Eigen::Index i = 0; i < out.thetas.size(); ++i) out.thetas[i] = wrap_theta(out.thetas[i]);
        return out;
    }
};

// Noisy least-squares channel h' = h + w', w' ~ CN(0, sigma2 I), stored
// subcarrier-major: h = [h_1^T ... h_M^T]^T with h_k the N antenna entries
// of subcarrier k.
struct Observation {
    CVec h_prime;
    double sigma2 = 0.0;
};

// Atom matrix A(tau, theta) together with the parameters that generated it.
struct Dictionary {
    CMat atoms;          // N*M rows, one column per path
    PathSet source_params;
};

}  // namespace qnomp
