#include "qnomp/core.hpp"

#include <cmath>
#include <limits>

namespace qnomp {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline cxd cis(double phase) { return cxd(std::cos(phase), std::sin(phase)); }

}  // namespace

CVec build_freq_atom(double tau, const ChannelConfig& cfg, int band_offset) {
    require_valid(cfg);
    if (band_offset != 0 && band_offset != 1)
        throw std::invalid_argument("build_freq_atom: band_offset must be 0 (pilots) or 1 (extrapolation)");
    const int len = band_offset == 0 ? cfg.M : cfg.K * cfg.M;
    const int first = band_offset == 0 ? 0 : cfg.M;
    CVec a(len);
    for (int k = 0; k < len; ++k) a[k] = cis(-kTwoPi * tau * static_cast<double>(first + k) * cfg.delta_f);
    return a;
}

CVec build_steering_atom(double theta, const ChannelConfig& cfg) {
    require_valid(cfg);
    CVec a(cfg.N);
    for (int n = 0; n < cfg.N; ++n) a[n] = cis(-kTwoPi * static_cast<double>(n) * theta);
    return a;
}

CVec build_atom(double tau, double theta, const ChannelConfig& cfg) {
    const CVec at = build_freq_atom(tau, cfg, 0);
    const CVec an = build_steering_atom(theta, cfg);
    CVec a(cfg.dim());
    for (int k = 0; k < cfg.M; ++k) a.segment(static_cast<Eigen::Index>(k) * cfg.N, cfg.N) = at[k] * an;
    return a;
}

CVec build_atom_dtau(double tau, double theta, const ChannelConfig& cfg) {
    const CVec an = build_steering_atom(theta, cfg);
    CVec a(cfg.dim());
    for (int k = 0; k < cfg.M; ++k) {
        const double f = static_cast<double>(k) * cfg.delta_f;
        const cxd dat = cxd(0.0, -kTwoPi * f) * cis(-kTwoPi * tau * f);
        a.segment(static_cast<Eigen::Index>(k) * cfg.N, cfg.N) = dat * an;
    }
    return a;
}

CVec build_atom_dtheta(double tau, double theta, const ChannelConfig& cfg) {
    const CVec at = build_freq_atom(tau, cfg, 0);
    CVec a(cfg.dim());
    for (int k = 0; k < cfg.M; ++k) {
        for (int n = 0; n < cfg.N; ++n) {
            const cxd dan = cxd(0.0, -kTwoPi * n) * cis(-kTwoPi * n * theta);
            a[static_cast<Eigen::Index>(k) * cfg.N + n] = at[k] * dan;
        }
    }
    return a;
}

Dictionary build_dictionary(const PathSet& paths, const ChannelConfig& cfg) {
    if (!paths.consistent()) throw std::invalid_argument("build_dictionary: inconsistent PathSet lengths");
    Dictionary d;
    d.source_params = paths;
    d.atoms.resize(cfg.dim(), paths.size());
    for (Eigen::Index i = 0; i < paths.size(); ++i)
        d.atoms.col(i) = build_atom(paths.taus[i], paths.thetas[i], cfg);
    return d;
}

CVec synthesize_channel(const PathSet& paths, const ChannelConfig& cfg) {
    if (!paths.consistent()) throw std::invalid_argument("synthesize_channel: inconsistent PathSet lengths");
    CVec h = CVec::Zero(cfg.dim());
    for (Eigen::Index i = 0; i < paths.size(); ++i)
        h += paths.betas[i] * build_atom(paths.taus[i], paths.thetas[i], cfg);
    return h;
}

CVec synthesize_extrapolated(const PathSet& paths, const ChannelConfig& cfg) {
    if (!paths.consistent()) throw std::invalid_argument("synthesize_extrapolated: inconsistent PathSet lengths");
    const Eigen::Index len = static_cast<Eigen::Index>(cfg.N) * cfg.K * cfg.M;
    CVec h = CVec::Zero(len);
    if (cfg.K == 0) return h;
    for (Eigen::Index i = 0; i < paths.size(); ++i) {
        const CVec at = build_freq_atom(paths.taus[i], cfg, 1);
        const CVec an = build_steering_atom(paths.thetas[i], cfg);
        for (int k = 0; k < cfg.K * cfg.M; ++k)
            h.segment(static_cast<Eigen::Index>(k) * cfg.N, cfg.N) += paths.betas[i] * at[k] * an;
    }
    return h;
}

double channel_nmse(const CVec& truth, const CVec& estimate) {
    if (truth.size() != estimate.size()) throw std::domain_error("channel_nmse: length mismatch");
    const double denom = truth.squaredNorm();
    if (denom == 0.0) throw std::domain_error("channel_nmse: zero-norm truth");
    return (truth - estimate).squaredNorm() / denom;
}

namespace {

// Distance between two delays, optionally on the circle of the given period.
inline double delay_dist(double a, double b, double period) {
    double d = std::abs(a - b);
    if (period > 0.0) {
        d = std::fmod(d, period);
        d = std::min(d, period - d);
    }
    return d;
}

}  // namespace

double delay_nmse(const Vec& true_taus, const Vec& est_taus, double dft_resolution, Eigen::Index L,
                  DelayMatching mode, double period) {
    if (true_taus.size() < 1 || L < 1) throw std::domain_error("delay_nmse: need at least one true delay");
    if (est_taus.size() == 0) throw std::domain_error("delay_nmse: empty estimate set");
    if (!(dft_resolution > 0.0)) throw std::domain_error("delay_nmse: dft_resolution must be positive");

    double sum = 0.0;
    if (mode == DelayMatching::NearestWithReplacement) {
        for (Eigen::Index i = 0; i < true_taus.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < est_taus.size(); ++j)
                best = std::min(best, delay_dist(true_taus[i], est_taus[j], period));
            sum += best * best;
        }
    } else {
        // Greedy one-to-one: repeatedly match the globally closest
        // (true, estimate) pair and retire both. Unmatched true delays (more
        // truths than estimates) fall back to their nearest estimate.
        std::vector<bool> used_t(true_taus.size(), false), used_e(est_taus.size(), false);
        const Eigen::Index n_match = std::min(true_taus.size(), est_taus.size());
        for (Eigen::Index m = 0; m < n_match; ++m) {
            double best = std::numeric_limits<double>::infinity();
            Eigen::Index bi = -1, bj = -1;
            for (Eigen::Index i = 0; i < true_taus.size(); ++i) {
                if (used_t[i]) continue;
                for (Eigen::Index j = 0; j < est_taus.size(); ++j) {
                    if (used_e[j]) continue;
                    const double d = delay_dist(true_taus[i], est_taus[j], period);
                    if (d < best) { best = d; bi = i; bj = j; }
                }
            }
            used_t[bi] = true;
            used_e[bj] = true;
            sum += best * best;
        }
        for (Eigen::Index i = 0; i < true_taus.size(); ++i) {
            if (used_t[i]) continue;
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < est_taus.size(); ++j)
                best = std::min(best, delay_dist(true_taus[i], est_taus[j], period));
            sum += best * best;
        }
    }
    return sum / (static_cast<double>(L) * dft_resolution * dft_resolution);
}

}  // namespace qnomp
