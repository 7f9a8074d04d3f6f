#include "qnomp/blocksparse.hpp"

#include <algorithm>

#include "qnomp/core.hpp"
#include "qnomp/offgrid.hpp"

namespace qnomp {

namespace {

Vec floored(const Vec& energies) {
    const double top = energies.maxCoeff();
    if (!(top > 0.0)) throw std::invalid_argument("reweight: all sub-path energies are zero");
    return energies.cwiseMax(1e-8 * top);
}

CVec lmmse_pass(const Dictionary& dict, const Observation& obs, const Vec& energies) {
    return regularized_gains(dict, obs, Regularizer::diagonal(floored(energies)));
}

}  // namespace

SubPathSet expand_blocks(const PathSet& paths, const BlockConfig& bcfg) {
    bcfg.validate();
    if (!paths.consistent()) throw std::invalid_argument("expand_blocks: inconsistent path set");
    const Eigen::Index n_p = paths.size();

    // Smallest prefix of the (already energy-sorted) paths holding more than
    // (1-epsilon) of the total energy; everything if no prefix qualifies
    // (epsilon = 0 with exact arithmetic lands here).
    const double total = paths.betas.squaredNorm();
    Eigen::Index n_high = n_p;
    double cum = 0.0;
    for (Eigen::Index i = 0; i < n_p; ++i) {
        cum += std::norm(paths.betas[i]);
        if (cum > (1.0 - bcfg.epsilon) * total) {
            n_high = i + 1;
            break;
        }
    }

    const Eigen::Index width = 2 * static_cast<Eigen::Index>(bcfg.gamma) + 1;
    const Eigen::Index n_sub = n_high * width + (n_p - n_high);
    SubPathSet subs;
    subs.taus.resize(n_sub);
    subs.thetas.resize(n_sub);
    subs.energies.resize(n_sub);
    subs.origin.reserve(static_cast<std::size_t>(n_sub));

    Eigen::Index pos = 0;
    for (Eigen::Index i = 0; i < n_p; ++i) {
        const double energy = std::norm(paths.betas[i]);
        if (i < n_high) {
            for (Eigen::Index j = -bcfg.gamma; j <= bcfg.gamma; ++j, ++pos) {
                subs.taus[pos] = paths.taus[i];
                subs.thetas[pos] = wrap_theta(paths.thetas[i] + static_cast<double>(j) * bcfg.delta_theta);
                subs.energies[pos] = energy / static_cast<double>(width);
                subs.origin.push_back(i);
            }
        } else {
            subs.taus[pos] = paths.taus[i];
            subs.thetas[pos] = wrap_theta(paths.thetas[i]);
            subs.energies[pos] = energy;
            subs.origin.push_back(i);
            ++pos;
        }
    }
    return subs;
}

SubPathSet reweight(const SubPathSet& subs, const Observation& obs, const ChannelConfig& cfg) {
    require_valid(cfg);
    if (subs.size() == 0) throw std::invalid_argument("reweight: empty sub-path set");
    if (obs.h_prime.size() != cfg.dim()) throw std::invalid_argument("reweight: observation length != N*M");

    PathSet params;
    params.taus = subs.taus;
    params.thetas = subs.thetas;
    params.betas = CVec::Zero(subs.size());
    const Dictionary dict = build_dictionary(params, cfg);

    const double nm = static_cast<double>(cfg.dim());
    Observation work{obs.h_prime, std::max(obs.sigma2, 1e-12 * obs.h_prime.squaredNorm() / nm)};

    // Pass 1 under the uniform block prior, pass 2 under the reweighted
    // (squared first-pass gain) prior. Reweighting once is the full
    // procedure; further passes are not applied.
    const CVec first = lmmse_pass(dict, work, subs.energies);
    SubPathSet out = subs;
    out.energies = floored(first.cwiseAbs2());
    out.gains = lmmse_pass(dict, work, out.energies);
    return out;
}

}  // namespace qnomp
