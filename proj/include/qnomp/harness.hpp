#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qnomp/baselines.hpp"
#include "qnomp/blocksparse.hpp"
#include "qnomp/extrapolate.hpp"
#include "qnomp/qnomp.hpp"
#include "qnomp/simulate.hpp"
#include "qnomp/types.hpp"

namespace qnomp {

enum class EstimatorKind { OmpFinegrid, OmpRefined, Nomp, Qnomp, QnompBlock, Lox, LowrankLox };

const char* estimator_name(EstimatorKind kind);
EstimatorKind estimator_from_name(const std::string& name);  // throws on unknown names

// One Monte-Carlo sweep: scenario x SNR grid x bandwidth factors x
// estimators, `trials` seeded repetitions per cell.
struct ExperimentConfig {
    ChannelConfig channel;
    ScenarioSpec scenario;
    std::vector<EstimatorKind> estimators{EstimatorKind::Qnomp};
    std::vector<double> snr_grid_db{10.0};  // +infinity means noiseless
    int trials = 100;
    std::vector<int> bandwidth_factors{0};  // K values; K = 0 is the pilot band itself
    std::string output_path = "results.csv";
    std::uint64_t seed = 0;

    // Per-estimator knobs. omp_finegrid/omp_refined share the qnomp CFAR and
    // refinement settings.
    QnompConfig qnomp;
    NompConfig nomp;
    BlockConfig block;  // delta_theta resolved at run time (see scale below)
    double block_delta_theta_scale = 1.0;  // sub-path spacing in units of the angle step
    double omp_grid_scale = 0.1;
    int lox_order = 3;
    QuadratureConvention lox_convention = QuadratureConvention::Paper;
    int lowrank_rank = 12;

    void validate() const;
};

// One aggregated cell of the sweep. trials counts the successful repetitions
// (estimator threw or returned zero paths -> excluded from every mean).
struct ResultRow {
    std::string estimator;
    std::string scenario;
    double snr_db = 0.0;      // realized average over successful trials
    int bandwidth_label = 0;  // M*(K+1) subcarriers
    double channel_nmse = 0.0;
    double delay_nmse = 0.0;
    double crb = 0.0;  // mean normalized delay CRB of the true constellation
    double cpu_seconds = 0.0;
    double n_paths_mean = 0.0;
    int trials = 0;

    static const char* csv_header();
};

// Run the full sweep. Deterministic for a fixed config (timings aside):
// trials draw from per-trial substreams and are reduced in fixed order, so
// the worker count never changes the numbers.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

// Fixed-order CSV with 6-significant-digit numeric fields.
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);

// Thread-CPU seconds spent in a single estimator invocation (estimate plus
// its extrapolation); the estimate itself is discarded.
double timing_probe(EstimatorKind kind, const Observation& obs, const ExperimentConfig& cfg);

// Parse the declarative JSON experiment description. Unknown keys anywhere
// are an error; SNR entries may be numbers or the string "inf".
ExperimentConfig load_config(const std::string& path);

// Worker-pool width: QNOMP_WORKERS when set (>= 1), else the hardware
// concurrency.
int worker_count();

}  // namespace qnomp
