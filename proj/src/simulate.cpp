#include "qnomp/simulate.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace qnomp {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// splitmix64 (Steele et al.); used to hash (seed, trial) into independent
// engine seeds so substreams are order-independent.
std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double uniform_in(std::mt19937_64& eng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(eng);
}

// Draw the constellation anchor so the whole span [0, extent] sits inside one
// period with a small margin, matching the uniform-draw convention; collapses
// to the lower margin when the scenario does not fit (wrapping then applies).
double draw_anchor(std::mt19937_64& eng, double margin, double extent, double period) {
    const double lo = margin;
    const double hi = period - extent;
    if (hi <= lo) return lo;
    return uniform_in(eng, lo, hi);
}

CVec unit_gains(std::mt19937_64& eng, int count) {
    CVec betas(count);
    for (int i = 0; i < count; ++i) {
        const double phase = kTwoPi * uniform_in(eng, 0.0, 1.0);
        betas[i] = cxd(std::cos(phase), std::sin(phase));
    }
    return betas;
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t trial_index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(trial_index + 0x632BE59BD9B4E019ULL));
}

PathSet gen_multipath(const ScenarioSpec& spec, const ChannelConfig& cfg) {
    require_valid(cfg);
    if (spec.kind != ScenarioKind::Multipath) throw std::invalid_argument("gen_multipath: spec.kind mismatch");
    if (spec.n_paths < 1 || spec.C1 <= 0.0 || spec.C2 <= 0.0)
        throw std::invalid_argument("gen_multipath: need n_paths >= 1 and positive C1, C2");

    const int L = spec.n_paths;
    const double dt = cfg.delay_step();
    const double da = cfg.angle_step();
    std::mt19937_64 eng(splitmix64(spec.seed));

    // Draw order is fixed (tau anchor, theta anchor, gain phases) so the
    // stream is reproducible bit-for-bit.
    double tau0, theta0;
    if (spec.base_tau) {
        tau0 = *spec.base_tau;
    } else {
        tau0 = draw_anchor(eng, 2.0 * dt, (L + 2) * spec.C1 * dt, cfg.delay_period());
    }
    if (spec.base_theta) {
        theta0 = *spec.base_theta;
    } else {
        theta0 = -0.5 + draw_anchor(eng, 2.0 * da, (L + 2) * spec.C2 * da, 1.0);
    }

    PathSet paths;
    paths.taus.resize(L);
    paths.thetas.resize(L);
    for (int k = 0; k < L; ++k) {
        paths.taus[k] = tau0 + k * spec.C1 * dt;
        paths.thetas[k] = theta0 + k * spec.C2 * da;
    }
    paths.betas = unit_gains(eng, L);
    return paths.canonicalized(cfg);
}

PathSet gen_clustered(const ScenarioSpec& spec, const ChannelConfig& cfg) {
    require_valid(cfg);
    if (spec.kind != ScenarioKind::Clustered) throw std::invalid_argument("gen_clustered: spec.kind mismatch");
    if (spec.n_clusters < 1 || spec.subpaths_per_cluster < 1 || spec.C1 <= 0.0 || spec.C2 <= 0.0)
        throw std::invalid_argument("gen_clustered: need positive cluster counts and C1, C2");

    const int nc = spec.n_clusters;
    const int ns = spec.subpaths_per_cluster;
    const double dt = cfg.delay_step();
    const double da = cfg.angle_step();
    // Sub-paths occupy theta_i + j*C2*da for j = -half..half; adjacent
    // cluster centers are separated by one extra sub-path slot.
    const int half = (ns - 1) / 2;
    const double block_gap = (2.0 * half + 2.0) * spec.C2 * da;
    std::mt19937_64 eng(splitmix64(spec.seed));

    double tau0, theta0;
    if (spec.base_tau) {
        tau0 = *spec.base_tau;
    } else {
        tau0 = draw_anchor(eng, 2.0 * dt, (nc + 2) * spec.C1 * dt, cfg.delay_period());
    }
    if (spec.base_theta) {
        theta0 = *spec.base_theta;
    } else {
        const double extent = (nc - 1) * block_gap + 2.0 * (half + 2.0) * spec.C2 * da;
        theta0 = -0.5 + draw_anchor(eng, 2.0 * da + half * spec.C2 * da, extent, 1.0);
    }

    PathSet paths;
    const int total = nc * ns;
    paths.taus.resize(total);
    paths.thetas.resize(total);
    int idx = 0;
    for (int i = 0; i < nc; ++i) {
        const double tau_i = tau0 + i * spec.C1 * dt;
        const double theta_i = theta0 + i * block_gap;
        for (int j = -half; j < ns - half; ++j) {
            paths.taus[idx] = tau_i;
            paths.thetas[idx] = theta_i + j * spec.C2 * da;
            ++idx;
        }
    }
    paths.betas = unit_gains(eng, total);
    return paths.canonicalized(cfg);
}

PathSet gen_paths(const ScenarioSpec& spec, const ChannelConfig& cfg) {
    return spec.kind == ScenarioKind::Multipath ? gen_multipath(spec, cfg) : gen_clustered(spec, cfg);
}

NoisySample add_noise(const CVec& h, double sigma2, std::uint64_t seed) {
    if (sigma2 < 0.0) throw std::invalid_argument("add_noise: sigma2 must be nonnegative");
    NoisySample out;
    out.truth = h;
    out.observation.sigma2 = sigma2;
    if (sigma2 == 0.0) {
        out.observation.h_prime = h;
        out.snr_linear = std::numeric_limits<double>::infinity();
        return out;
    }
    std::mt19937_64 eng(splitmix64(seed));
    std::normal_distribution<double> gauss(0.0, std::sqrt(sigma2 / 2.0));
    CVec noisy(h.size());
    for (Eigen::Index i = 0; i < h.size(); ++i) {
        const double re = gauss(eng);
        const double im = gauss(eng);
        noisy[i] = h[i] + cxd(re, im);
    }
    out.observation.h_prime = noisy;
    out.snr_linear = h.squaredNorm() / (sigma2 * static_cast<double>(h.size()));
    return out;
}

}  // namespace qnomp
