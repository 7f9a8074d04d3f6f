#pragma once

#include "qnomp/ongrid.hpp"
#include "qnomp/qnomp.hpp"
#include "qnomp/types.hpp"

namespace qnomp {

// Newtonized-OMP parameters. Detection runs on the standard grid followed by
// the same multi-resolution local refinement the other estimators use (final
// resolution dft_step/k^n_lr, matching the conventional 10x-oversampled
// detection grid at the default k = 10, n_lr = 1); Newton steps then polish
// continuously.
struct NompConfig {
    int Rs = 1;      // Newton steps right after each detection
    int Rc = 3;      // cyclic single-path refinement rounds per detection
    int n_out = 0;   // extra cyclic rounds after the CFAR stop
    double p_fa = 1e-2;
    RefinementSpec refinement;
    int max_paths = 32;

    void validate() const {
        if (Rs < 0 || Rc < 0 || n_out < 0) throw std::invalid_argument("NompConfig: budgets must be >= 0");
        if (!(p_fa > 0.0 && p_fa < 1.0)) throw std::invalid_argument("NompConfig: p_fa must be in (0,1)");
        if (max_paths < 1) throw std::invalid_argument("NompConfig: max_paths must be >= 1");
    }
};

// Conventional on-grid OMP over a uniform grid with spacing grid_scale *
// dft_step in both coordinates; no off-grid refinement. The CFAR statistic
// is still evaluated on the standard orthogonal grid, where its calibration
// holds. Grids above the cell budget are refused.
EstimationResult omp_finegrid(const Observation& obs, const ChannelConfig& cfg, double grid_scale,
                              double p_fa, int max_paths = 32);

// OMP with multi-resolution local refinement only (no quasi-Newton polish):
// the cheap replacement for a uniform fine grid at matched final resolution.
EstimationResult omp_refined(const Observation& obs, const ChannelConfig& cfg, const RefinementSpec& spec,
                             double p_fa, int max_paths = 32);

// Newtonized OMP: per-detection Newton steps on the single-path objective
// |a(tau, theta)^H r|^2 plus cyclic single-path refinement rounds, gains
// refit by LS after every move.
EstimationResult nomp_run(const Observation& obs, const ChannelConfig& cfg, const NompConfig& ncfg);

// Per-path delay CRB (seconds^2): Fisher information over all real
// parameters (tau, theta, Re beta, Im beta), inverted, delay block diagonal.
// Throws std::domain_error when the FIM is numerically singular (coincident
// paths).
Vec delay_crb(const PathSet& paths, const ChannelConfig& cfg, double sigma2);

}  // namespace qnomp
