#include "qnomp/ongrid.hpp"

#include <cmath>

#include "qnomp/core.hpp"

namespace qnomp {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Frequency-side factor F_tau (M x P): column i is a_tau(taus[i]).
CMat freq_factor(const Vec& taus, const ChannelConfig& cfg) {
    CMat F(cfg.M, taus.size());
    for (Eigen::Index i = 0; i < taus.size(); ++i)
        for (int k = 0; k < cfg.M; ++k) {
            const double phase = -kTwoPi * taus[i] * k * cfg.delta_f;
            F(k, i) = cxd(std::cos(phase), std::sin(phase));
        }
    return F;
}

// Antenna-side factor F_theta (N x Q): column j is a_theta(thetas[j]).
CMat steer_factor(const Vec& thetas, const ChannelConfig& cfg) {
    CMat F(cfg.N, thetas.size());
    for (Eigen::Index j = 0; j < thetas.size(); ++j)
        for (int n = 0; n < cfg.N; ++n) {
            const double phase = -kTwoPi * n * thetas[j];
            F(n, j) = cxd(std::cos(phase), std::sin(phase));
        }
    return F;
}

// Delay-major argmax of |C| with lowest-linear-index tie-breaking.
std::pair<Eigen::Index, Eigen::Index> argmax_abs(const CMat& C) {
    Eigen::Index bi = 0, bj = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < C.rows(); ++i)
        for (Eigen::Index j = 0; j < C.cols(); ++j) {
            const double v = std::norm(C(i, j));
            if (v > best) { best = v; bi = i; bj = j; }
        }
    return {bi, bj};
}

}  // namespace

GridSpec GridSpec::standard(const ChannelConfig& cfg) {
    require_valid(cfg);
    GridSpec g;
    g.delay_step = cfg.delay_step();
    g.angle_step = cfg.angle_step();
    g.delay_points.resize(cfg.M);
    for (int i = 0; i < cfg.M; ++i) g.delay_points[i] = i * g.delay_step;
    g.angle_points.resize(cfg.N);
    for (int j = 0; j < cfg.N; ++j) g.angle_points[j] = (j - cfg.N / 2) * g.angle_step;
    return g;
}

CMat correlation_table(const CVec& residual, const Vec& taus, const Vec& thetas, const ChannelConfig& cfg) {
    if (residual.size() != cfg.dim()) throw std::invalid_argument("correlation_table: residual length != N*M");
    // <a(tau_i, theta_j), r> = sum_k conj(a_tau[k]) sum_n conj(a_theta[n]) R(k, n)
    // with R the M x N subcarrier-by-antenna reshape of r, so the whole table
    // is F_tau^H * R * conj(F_theta).
    Eigen::Map<const Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> R(
        residual.data(), cfg.M, cfg.N);
    const CMat Ft = freq_factor(taus, cfg);
    const CMat Fs = steer_factor(thetas, cfg);
    return Ft.adjoint() * (R * Fs.conjugate());
}

CoarseSelection coarse_select(const CVec& residual, const GridSpec& grid, const ChannelConfig& cfg) {
    const CMat C = correlation_table(residual, grid.delay_points, grid.angle_points, cfg);
    const auto [i, j] = argmax_abs(C);
    CoarseSelection sel;
    sel.tau_hat = grid.delay_points[i];
    sel.theta_hat = grid.angle_points[j];
    sel.peak_magnitude = std::abs(C(i, j));
    return sel;
}

std::pair<double, double> local_refine(const CVec& residual, double tau0, double theta0, const GridSpec& grid,
                                       const RefinementSpec& spec, const ChannelConfig& cfg) {
    if (spec.k1 < 1 || spec.k2 < 1 || spec.n_lr < 0)
        throw std::invalid_argument("local_refine: need k1, k2 >= 1 and n_lr >= 0");
    double tau = tau0, theta = theta0;
    double dstep = grid.delay_step, astep = grid.angle_step;
    for (int level = 0; level < spec.n_lr; ++level) {
        dstep /= spec.k1;
        astep /= spec.k2;
        Vec taus(2 * spec.k1 + 1), thetas(2 * spec.k2 + 1);
        for (int i = -spec.k1; i <= spec.k1; ++i) taus[i + spec.k1] = tau + i * dstep;
        for (int j = -spec.k2; j <= spec.k2; ++j) thetas[j + spec.k2] = theta + j * astep;
        const CMat C = correlation_table(residual, taus, thetas, cfg);
        const auto [bi, bj] = argmax_abs(C);
        tau = taus[bi];
        theta = thetas[bj];
    }
    // Atoms are periodic in both variables; report the canonical point.
    return {wrap_tau(tau, cfg), wrap_theta(theta)};
}

CVec ls_gains(const Dictionary& dictionary, const CVec& target) {
    const CMat& A = dictionary.atoms;
    if (A.cols() < 1) throw std::invalid_argument("ls_gains: dictionary must have at least one column");
    if (A.rows() != target.size()) throw std::invalid_argument("ls_gains: row count != target length");
    const CMat G = A.adjoint() * A;
    const CVec rhs = A.adjoint() * target;
    CVec beta = G.ldlt().solve(rhs);
    // Nearly duplicate atoms make G effectively singular; re-solve with a
    // small ridge so the pipeline never aborts on a bad selection.
    const double scale = G.diagonal().real().mean();
    if (!beta.allFinite() || (G * beta - rhs).norm() > 1e-8 * (rhs.norm() + scale)) {
        const double jitter = 1e-12 * scale;
        CMat Gj = G;
        Gj.diagonal().array() += jitter;
        beta = Gj.ldlt().solve(rhs);
    }
    return beta;
}

CVec update_residual(const CVec& h_prime, const Dictionary& dictionary, const CVec& gains) {
    if (dictionary.atoms.cols() == 0) return h_prime;
    if (dictionary.atoms.rows() != h_prime.size() || dictionary.atoms.cols() != gains.size())
        throw std::invalid_argument("update_residual: inconsistent shapes");
    return h_prime - dictionary.atoms * gains;
}

}  // namespace qnomp
