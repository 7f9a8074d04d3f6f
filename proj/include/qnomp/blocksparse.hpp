#pragma once

#include <vector>

#include "qnomp/types.hpp"

namespace qnomp {

// Angular-block expansion parameters. delta_theta has no sensible
// channel-free default; set it from the channel's angle step (the clustered
// simulation scenario uses half that).
struct BlockConfig {
    int gamma = 4;             // half-width: expanded paths get 2*gamma+1 sub-paths
    double delta_theta = 0.0;  // angular spacing between sub-paths
    double epsilon = 0.0;      // high-energy cutoff; 0 expands every path
    // Accepted for interface fidelity with the reference procedure, which
    // lists these inputs but never uses them.
    double epsilon1 = 0.0;
    double epsilon2 = 0.0;

    void validate() const {
        if (gamma < 0) throw std::invalid_argument("BlockConfig: gamma must be >= 0");
        if (!(delta_theta > 0.0)) throw std::invalid_argument("BlockConfig: delta_theta must be > 0");
        if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("BlockConfig: epsilon must be in [0,1)");
    }
};

// Expanded sub-path grid with per-sub-path prior energies. Sub-paths of one
// parent share its delay; origin maps each sub-path back to the parent index.
struct SubPathSet {
    Vec taus;
    Vec thetas;
    Vec energies;
    std::vector<Eigen::Index> origin;
    CVec gains;  // empty until reweight fills it

    Eigen::Index size() const { return taus.size(); }
};

// Expand paths (sorted by descending |beta|) into angular blocks: the
// smallest prefix holding more than (1-epsilon) of the total energy becomes
// 2*gamma+1 sub-paths each at (tau_i, theta_i + j*delta_theta) with the
// parent energy split uniformly; the remaining paths stay singletons.
SubPathSet expand_blocks(const PathSet& paths, const BlockConfig& bcfg);

// Two regularized LMMSE passes over the sub-path dictionary: solve with the
// prior energies, reset the energies to the (floored) squared first-pass
// gains, solve again. Returns the sub-paths with the reweighted energies and
// final gains.
SubPathSet reweight(const SubPathSet& subs, const Observation& obs, const ChannelConfig& cfg);

}  // namespace qnomp
