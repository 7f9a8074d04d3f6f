#pragma once

#include <cstdint>
#include <optional>

#include "qnomp/types.hpp"

namespace qnomp {

enum class ScenarioKind { Multipath, Clustered };

// Declarative scenario description. C1/C2 are the delay/angle spacings in
// units of the DFT resolutions. base_tau/base_theta pin the constellation
// anchor when set; otherwise anchors are drawn uniformly per trial from the
// seeded generator.
struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::Multipath;
    double C1 = 2.0;
    double C2 = 0.5;
    int n_paths = 7;                 // multipath
    int n_clusters = 3;              // clustered
    int subpaths_per_cluster = 5;    // clustered
    std::optional<double> base_tau;
    std::optional<double> base_theta;
    std::uint64_t seed = 0;
};

struct NoisySample {
    CVec truth;
    Observation observation;
    double snr_linear = 0.0;
};

// Order-independent substream seed for (seed, trial_index) pairs; trials can
// be generated concurrently in any order with identical results.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t trial_index);

// Equally spaced multipath constellation: tau_{k+1} - tau_k = C1*dtau,
// theta_{k+1} - theta_k = C2*dtheta, unit-modulus gains with i.i.d. uniform
// phases. Parameters falling outside one period wrap, never reject.
PathSet gen_multipath(const ScenarioSpec& spec, const ChannelConfig& cfg);

// n_clusters clusters of subpaths_per_cluster sub-paths; sub-paths of
// cluster i share its delay and occupy theta_i + j*C2*dtheta for
// j = -(S-1)/2 .. (S-1)/2.
PathSet gen_clustered(const ScenarioSpec& spec, const ChannelConfig& cfg);

// Dispatch on spec.kind.
PathSet gen_paths(const ScenarioSpec& spec, const ChannelConfig& cfg);

// h' = h + w', w' circularly-symmetric complex Gaussian with per-entry
// variance sigma2. snr_linear = ||h||^2 / (sigma2 * len); infinity sentinel
// for sigma2 = 0.
NoisySample add_noise(const CVec& h, double sigma2, std::uint64_t seed);

}  // namespace qnomp
