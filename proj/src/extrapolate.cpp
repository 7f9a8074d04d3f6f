#include "qnomp/extrapolate.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "qnomp/core.hpp"

namespace qnomp {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

double floored_sigma2(double sigma2, const CVec& obs) {
    return std::max(sigma2, 1e-12 * obs.squaredNorm() / static_cast<double>(obs.size()));
}

// Shared solve for both LOX forms. The right-hand form works in the small
// S*N_p dimension and needs D > 0; the covariance form tolerates zero prior
// entries (their columns simply drop out).
CVec lox_apply(const CMat& B0, const CMat& Be, const Vec& D, const CVec& obs, double sigma2) {
    const double s2 = floored_sigma2(sigma2, obs);
    const bool d_positive = D.size() == 0 || D.minCoeff() > 0.0;
    if (d_positive) {
        CMat G = B0.adjoint() * B0;
        for (Eigen::Index i = 0; i < D.size(); ++i) G(i, i) += s2 / D[i];
        return Be * G.ldlt().solve(B0.adjoint() * obs);
    }
    CMat C = B0 * D.asDiagonal() * B0.adjoint();
    C += s2 * CMat::Identity(C.rows(), C.cols());
    return Be * (D.asDiagonal() * (B0.adjoint() * C.ldlt().solve(obs)));
}

// Rotate each column so its largest-magnitude entry is real positive; makes
// eigenvector output reproducible and sign-stable.
void normalize_phases(CMat& U) {
    for (Eigen::Index c = 0; c < U.cols(); ++c) {
        Eigen::Index imax = 0;
        U.col(c).cwiseAbs().maxCoeff(&imax);
        const cxd pivot = U(imax, c);
        if (std::abs(pivot) > 0.0) U.col(c) *= std::conj(pivot) / std::abs(pivot);
    }
}

void normalize_signs(Mat& U) {
    for (Eigen::Index c = 0; c < U.cols(); ++c) {
        Eigen::Index imax = 0;
        U.col(c).cwiseAbs().maxCoeff(&imax);
        if (U(imax, c) < 0.0) U.col(c) = -U.col(c);
    }
}

}  // namespace

DelayPosterior posterior_from_bfgs(const EstimationResult& result) {
    const Eigen::Index n_p = result.paths.size();
    DelayPosterior post;
    post.map_taus = result.paths.taus;
    post.variances = Vec::Zero(n_p);
    const double dt = result.diagnostics.delay_step;
    if (result.delay_inv_hessian_diag.size() != n_p || !(dt > 0.0)) {
        post.delta_fallback = true;
        return post;
    }
    const double clip = 0.25 * dt * dt;  // (delay_step/2)^2
    for (Eigen::Index i = 0; i < n_p; ++i) {
        const double var = result.delay_inv_hessian_diag[i] * dt * dt;
        post.variances[i] = std::clamp(var, 0.0, clip);
    }
    return post;
}

QuadratureRule gauss_hermite_rule(int S, QuadratureConvention convention) {
    QuadratureRule rule;
    switch (S) {
        case 1:
            rule.nodes = Vec::Zero(1);
            rule.weights = Vec::Ones(1);
            return rule;
        case 3: {
            const double x = std::sqrt(1.5);
            rule.nodes.resize(3);
            rule.nodes << -x, 0.0, x;
            rule.weights.resize(3);
            if (convention == QuadratureConvention::Paper) {
                rule.weights << 0.25, 0.5, 0.25;
            } else {
                rule.weights << 1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0;
            }
            return rule;
        }
        case 5: {
            // Exact normalized Gauss-Hermite constants in closed form:
            // nodes^2 = (5 -+ sqrt(10))/2, weights 0.3/(14 -+ 4 sqrt(10)),
            // center 8/15. (No distinct paper convention at this order.)
            const double s10 = std::sqrt(10.0);
            const double xi = std::sqrt((5.0 - s10) / 2.0);
            const double xo = std::sqrt((5.0 + s10) / 2.0);
            const double wi = 0.3 / (14.0 - 4.0 * s10);
            const double wo = 0.3 / (14.0 + 4.0 * s10);
            rule.nodes.resize(5);
            rule.nodes << -xo, -xi, 0.0, xi, xo;
            rule.weights.resize(5);
            rule.weights << wo, wi, 8.0 / 15.0, wi, wo;
            return rule;
        }
        default:
            throw std::domain_error("gauss_hermite_rule: order must be 1, 3 or 5");
    }
}

LoxOperator build_lox_operator(const DelayPosterior& posterior, const Vec& energies,
                               const QuadratureRule& rule, const ChannelConfig& cfg) {
    require_valid(cfg);
    const Eigen::Index n_p = posterior.map_taus.size();
    if (posterior.variances.size() != n_p || energies.size() != n_p)
        throw std::invalid_argument("build_lox_operator: posterior/energies length mismatch");
    const Eigen::Index S = rule.nodes.size();

    LoxOperator op;
    op.B0.resize(cfg.M, S * n_p);
    op.Be.resize(static_cast<Eigen::Index>(cfg.K) * cfg.M, S * n_p);
    op.D.resize(S * n_p);
    for (Eigen::Index i = 0; i < n_p; ++i) {
        const double spread = std::sqrt(2.0 * std::max(posterior.variances[i], 0.0));
        for (Eigen::Index k = 0; k < S; ++k) {
            const double tau = posterior.map_taus[i] + spread * rule.nodes[k];
            const Eigen::Index col = i * S + k;
            op.B0.col(col) = build_freq_atom(tau, cfg, 0);
            op.Be.col(col) = build_freq_atom(tau, cfg, 1);
            op.D[col] = energies[i] * rule.weights[k];
        }
    }
    return op;
}

CVec lox_extrapolate(const LoxOperator& op, const CVec& obs_freq, double sigma2) {
    if (op.B0.rows() != obs_freq.size()) throw std::invalid_argument("lox_extrapolate: observation length != M");
    return lox_apply(op.B0, op.Be, op.D, obs_freq, sigma2);
}

CVec lowrank_lox(const LoxOperator& op, const CVec& obs_freq, double sigma2, int r, const CMat& basis) {
    const Eigen::Index m = op.B0.rows();
    if (obs_freq.size() != m) throw std::invalid_argument("lowrank_lox: observation length != M");
    if (r < 0 || r > m) throw std::invalid_argument("lowrank_lox: rank must be in [0, M]");
    if (r == 0) return CVec::Zero(op.Be.rows());
    if (basis.rows() != m || basis.cols() != r) throw std::invalid_argument("lowrank_lox: basis must be M x r");

    CMat U = basis;
    if ((U.adjoint() * U - CMat::Identity(r, r)).norm() > 1e-8) {
        std::cerr << "lowrank_lox: basis not orthonormal, re-orthonormalizing\n";
        Eigen::HouseholderQR<CMat> qr(U);
        U = CMat(qr.householderQ()) * CMat::Identity(m, r);
    }

    const double s2 = floored_sigma2(sigma2, obs_freq);
    CMat C = op.B0 * op.D.asDiagonal() * op.B0.adjoint();
    C += s2 * CMat::Identity(m, m);
    const CMat Cr = U.adjoint() * C * U;  // r x r
    const CVec coeff = U * Cr.ldlt().solve(U.adjoint() * obs_freq);
    return op.Be * (op.D.asDiagonal() * (op.B0.adjoint() * coeff));
}

CMat optimal_basis(const LoxOperator& op, double sigma2, int r) {
    (void)sigma2;  // shifts the spectrum, not the eigenvectors
    const Eigen::Index m = op.B0.rows();
    if (r < 1 || r > m) throw std::invalid_argument("optimal_basis: rank must be in [1, M]");
    const CMat C = op.B0 * op.D.asDiagonal() * op.B0.adjoint();
    Eigen::SelfAdjointEigenSolver<CMat> eig(C);
    if (eig.info() != Eigen::Success) throw std::runtime_error("optimal_basis: eigen-decomposition failed");
    CMat U(m, r);
    for (int k = 0; k < r; ++k) U.col(k) = eig.eigenvectors().col(m - 1 - k);  // Eigen sorts ascending
    normalize_phases(U);
    return U;
}

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] via Newton iteration on P_n.
void gauss_legendre(int n, Vec& nodes, Vec& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            // Legendre recurrence for P_n(x) and its derivative.
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

// Band energy 2 * \int_a^b |sum_d v_d e^{-j2pi f d}|^2 df, computed as a sum
// of nonnegative terms so it cannot go negative however small it is.
double band_energy(const Vec& v, double a, double b, const Vec& nodes, const Vec& weights) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (Eigen::Index q = 0; q < nodes.size(); ++q) {
        const double f = mid + half * nodes[q];
        cxd p(0.0, 0.0);
        for (Eigen::Index d = 0; d < v.size(); ++d) p += v[d] * cxd(std::cos(kTwoPi * f * d), -std::sin(kTwoPi * f * d));
        acc += weights[q] * std::norm(p);
    }
    return 2.0 * half * acc;
}

}  // namespace

std::pair<Vec, Mat> dpss_toeplitz(int m, double c) {
    if (m < 1) throw std::domain_error("dpss_toeplitz: m must be >= 1");
    if (!(c > 0.0 && c < m)) throw std::domain_error("dpss_toeplitz: need 0 < c < m");
    // Eigenvectors via Slepian's commuting tridiagonal: its spectrum is well
    // separated, so the eigenvectors are accurate even where the Toeplitz
    // eigenvalues cluster exponentially close to 0 and 1.
    const double W = c / (2.0 * m);
    Mat tri = Mat::Zero(m, m);
    for (int t = 0; t < m; ++t) {
        const double half_offset = 0.5 * (m - 1.0 - 2.0 * t);
        tri(t, t) = half_offset * half_offset * std::cos(kTwoPi * W);
        if (t + 1 < m) tri(t, t + 1) = tri(t + 1, t) = 0.5 * (t + 1.0) * (m - 1.0 - t);
    }
    Eigen::SelfAdjointEigenSolver<Mat> eig(tri);
    if (eig.info() != Eigen::Success) throw std::runtime_error("dpss_toeplitz: eigen-decomposition failed");
    // Descending tridiagonal eigenvalue order = descending band concentration.
    Mat vectors(m, m);
    for (int k = 0; k < m; ++k) vectors.col(k) = eig.eigenvectors().col(m - 1 - k);
    normalize_signs(vectors);
    // Concentrations as the in-band / total energy ratio. Evaluating both
    // integrals by positive-weight quadrature keeps every eigenvalue strictly
    // inside (0,1), which the direct quadratic form v'Tv loses to cancellation
    // once the true eigenvalue drops below machine epsilon.
    Vec gl_nodes, gl_weights;
    gauss_legendre(2 * m + 40, gl_nodes, gl_weights);
    Vec values(m);
    for (int k = 0; k < m; ++k) {
        const Vec v = vectors.col(k);
        const double in_band = band_energy(v, 0.0, W, gl_nodes, gl_weights);
        const double out_band = band_energy(v, W, 0.5, gl_nodes, gl_weights);
        values[k] = in_band / (in_band + out_band);
    }
    // Deep-tail concentrations sit below the cancellation floor of the
    // in-band integrand (~1e-32 for unit vectors), where the computed ratio
    // is rounding residue and can invert the structurally decreasing order;
    // clamping restores it without leaving (0,1).
    for (int k = 1; k < m; ++k) values[k] = std::min(values[k], values[k - 1]);
    return {std::move(values), std::move(vectors)};
}

double lowrank_nmse_formula(const Vec& eigenvalues, double c, int k, double sigma2, int m, double E) {
    if (k < 0 || k > eigenvalues.size()) throw std::invalid_argument("lowrank_nmse_formula: k out of range");
    if (!(c > 0.0) || m < 1 || !(E > 0.0)) throw std::invalid_argument("lowrank_nmse_formula: bad parameters");
    double captured = 0.0;
    const double noise = sigma2 / (static_cast<double>(m) * E);
    for (int i = 0; i < k; ++i) {
        const double lc = eigenvalues[i] / c;
        captured += lc * lc / (lc + noise);
    }
    return std::max(1.0 - captured, 0.0);
}

CVec lox_extrapolate_2d(const EstimationResult& result, const Observation& obs, const ChannelConfig& cfg,
                        const QuadratureRule& rule) {
    require_valid(cfg);
    if (obs.h_prime.size() != cfg.dim()) throw std::invalid_argument("lox_extrapolate_2d: observation length != N*M");
    const Eigen::Index n_p = result.paths.size();
    const Eigen::Index out_len = static_cast<Eigen::Index>(cfg.N) * cfg.K * cfg.M;
    if (n_p == 0) return CVec::Zero(out_len);

    const DelayPosterior post = posterior_from_bfgs(result);
    const Eigen::Index S = rule.nodes.size();
    CMat B0(cfg.dim(), S * n_p);
    CMat Be(out_len, S * n_p);
    Vec D(S * n_p);
    for (Eigen::Index i = 0; i < n_p; ++i) {
        const double spread = std::sqrt(2.0 * std::max(post.variances[i], 0.0));
        const CVec steer = build_steering_atom(result.paths.thetas[i], cfg);
        for (Eigen::Index k = 0; k < S; ++k) {
            const double tau = post.map_taus[i] + spread * rule.nodes[k];
            const Eigen::Index col = i * S + k;
            const CVec f0 = build_freq_atom(tau, cfg, 0);
            const CVec fe = build_freq_atom(tau, cfg, 1);
            for (Eigen::Index q = 0; q < f0.size(); ++q)
                B0.col(col).segment(q * cfg.N, cfg.N) = f0[q] * steer;
            for (Eigen::Index q = 0; q < fe.size(); ++q)
                Be.col(col).segment(q * cfg.N, cfg.N) = fe[q] * steer;
            D[col] = std::norm(result.paths.betas[i]) * rule.weights[k];
        }
    }
    return lox_apply(B0, Be, D, obs.h_prime, obs.sigma2);
}

}  // namespace qnomp
