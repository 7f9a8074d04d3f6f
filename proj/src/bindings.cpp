#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qnomp/baselines.hpp"
#include "qnomp/blocksparse.hpp"
#include "qnomp/core.hpp"
#include "qnomp/extrapolate.hpp"
#include "qnomp/harness.hpp"
#include "qnomp/qnomp.hpp"
#include "qnomp/simulate.hpp"

namespace py = pybind11;
using namespace qnomp;

PYBIND11_MODULE(_qnomp, m) {
    m.doc() = "Two-stage super-resolution estimation and extrapolation for 2-D multipath channels";

    py::class_<ChannelConfig>(m, "ChannelConfig")
        .def(py::init<>())
        .def(py::init([](int M, int N, double delta_f, int K) {
                 ChannelConfig c;
                 c.M = M;
                 c.N = N;
                 c.delta_f = delta_f;
                 c.K = K;
                 return c;
             }),
             py::arg("M") = 24, py::arg("N") = 64, py::arg("delta_f") = 240e3, py::arg("K") = 0)
        .def_readwrite("M", &ChannelConfig::M)
        .def_readwrite("N", &ChannelConfig::N)
        .def_readwrite("delta_f", &ChannelConfig::delta_f)
        .def_readwrite("K", &ChannelConfig::K)
        .def_property_readonly("delay_step", &ChannelConfig::delay_step)
        .def_property_readonly("angle_step", &ChannelConfig::angle_step)
        .def_property_readonly("delay_period", &ChannelConfig::delay_period)
        .def_property_readonly("dim", &ChannelConfig::dim);

    py::class_<PathSet>(m, "PathSet")
        .def(py::init<>())
        .def(py::init([](Vec taus, Vec thetas, CVec betas) {
                 PathSet p;
                 p.taus = std::move(taus);
                 p.thetas = std::move(thetas);
                 p.betas = std::move(betas);
                 if (!p.consistent()) throw std::invalid_argument("PathSet: length mismatch");
                 return p;
             }),
             py::arg("taus"), py::arg("thetas"), py::arg("betas"))
        .def_readwrite("taus", &PathSet::taus)
        .def_readwrite("thetas", &PathSet::thetas)
        .def_readwrite("betas", &PathSet::betas)
        .def("__len__", &PathSet::size);

    py::class_<Observation>(m, "Observation")
        .def(py::init<>())
        .def(py::init([](CVec h_prime, double sigma2) {
                 return Observation{std::move(h_prime), sigma2};
             }),
             py::arg("h_prime"), py::arg("sigma2"))
        .def_readwrite("h_prime", &Observation::h_prime)
        .def_readwrite("sigma2", &Observation::sigma2);

    py::class_<RefinementSpec>(m, "RefinementSpec")
        .def(py::init<>())
        .def_readwrite("k1", &RefinementSpec::k1)
        .def_readwrite("k2", &RefinementSpec::k2)
        .def_readwrite("n_lr", &RefinementSpec::n_lr);

    py::class_<QnompConfig>(m, "QnompConfig")
        .def(py::init<>())
        .def_readwrite("refinement", &QnompConfig::refinement)
        .def_readwrite("n_in", &QnompConfig::n_in)
        .def_readwrite("n_out", &QnompConfig::n_out)
        .def_readwrite("p_fa", &QnompConfig::p_fa)
        .def_readwrite("lambda_", &QnompConfig::lambda)
        .def_readwrite("max_paths", &QnompConfig::max_paths)
        .def_readwrite("joint_blocks", &QnompConfig::joint_blocks)
        .def_readwrite("scale_first_update", &QnompConfig::scale_first_update);

    py::class_<QnompDiagnostics>(m, "QnompDiagnostics")
        .def_readonly("omp_iterations", &QnompDiagnostics::omp_iterations)
        .def_readonly("joint_iterations", &QnompDiagnostics::joint_iterations)
        .def_readonly("cfar_stopped", &QnompDiagnostics::cfar_stopped)
        .def_readonly("truncated", &QnompDiagnostics::truncated)
        .def_readonly("final_grid_peak_sq", &QnompDiagnostics::final_grid_peak_sq)
        .def_readonly("cfar_threshold_value", &QnompDiagnostics::cfar_threshold_value)
        .def_readonly("sigma2_eff", &QnompDiagnostics::sigma2_eff)
        .def_readonly("lambda_used", &QnompDiagnostics::lambda_used)
        .def_readonly("residual_norms", &QnompDiagnostics::residual_norms);

    py::class_<EstimationResult>(m, "EstimationResult")
        .def_readonly("paths", &EstimationResult::paths)
        .def_readonly("delay_inv_hessian_diag", &EstimationResult::delay_inv_hessian_diag)
        .def_readonly("residual_norm", &EstimationResult::residual_norm)
        .def_readonly("diagnostics", &EstimationResult::diagnostics);

    py::enum_<ScenarioKind>(m, "ScenarioKind")
        .value("Multipath", ScenarioKind::Multipath)
        .value("Clustered", ScenarioKind::Clustered);

    py::class_<ScenarioSpec>(m, "ScenarioSpec")
        .def(py::init<>())
        .def_readwrite("kind", &ScenarioSpec::kind)
        .def_readwrite("C1", &ScenarioSpec::C1)
        .def_readwrite("C2", &ScenarioSpec::C2)
        .def_readwrite("n_paths", &ScenarioSpec::n_paths)
        .def_readwrite("n_clusters", &ScenarioSpec::n_clusters)
        .def_readwrite("subpaths_per_cluster", &ScenarioSpec::subpaths_per_cluster)
        .def_readwrite("base_tau", &ScenarioSpec::base_tau)
        .def_readwrite("base_theta", &ScenarioSpec::base_theta)
        .def_readwrite("seed", &ScenarioSpec::seed);

    py::class_<NoisySample>(m, "NoisySample")
        .def_readonly("truth", &NoisySample::truth)
        .def_readonly("observation", &NoisySample::observation)
        .def_readonly("snr_linear", &NoisySample::snr_linear);

    py::class_<NompConfig>(m, "NompConfig")
        .def(py::init<>())
        .def_readwrite("Rs", &NompConfig::Rs)
        .def_readwrite("Rc", &NompConfig::Rc)
        .def_readwrite("n_out", &NompConfig::n_out)
        .def_readwrite("p_fa", &NompConfig::p_fa)
        .def_readwrite("refinement", &NompConfig::refinement)
        .def_readwrite("max_paths", &NompConfig::max_paths);

    py::class_<BlockConfig>(m, "BlockConfig")
        .def(py::init<>())
        .def_readwrite("gamma", &BlockConfig::gamma)
        .def_readwrite("delta_theta", &BlockConfig::delta_theta)
        .def_readwrite("epsilon", &BlockConfig::epsilon);

    py::class_<SubPathSet>(m, "SubPathSet")
        .def_readonly("taus", &SubPathSet::taus)
        .def_readonly("thetas", &SubPathSet::thetas)
        .def_readonly("energies", &SubPathSet::energies)
        .def_readonly("origin", &SubPathSet::origin)
        .def_readonly("gains", &SubPathSet::gains)
        .def("__len__", &SubPathSet::size);

    py::enum_<QuadratureConvention>(m, "QuadratureConvention")
        .value("Exact", QuadratureConvention::Exact)
        .value("Paper", QuadratureConvention::Paper);

    py::class_<QuadratureRule>(m, "QuadratureRule")
        .def_readonly("nodes", &QuadratureRule::nodes)
        .def_readonly("weights", &QuadratureRule::weights);

    py::class_<DelayPosterior>(m, "DelayPosterior")
        .def_readonly("map_taus", &DelayPosterior::map_taus)
        .def_readonly("variances", &DelayPosterior::variances)
        .def_readonly("delta_fallback", &DelayPosterior::delta_fallback);

    py::class_<LoxOperator>(m, "LoxOperator")
        .def_readonly("B0", &LoxOperator::B0)
        .def_readonly("Be", &LoxOperator::Be)
        .def_readonly("D", &LoxOperator::D);

    // Core model evaluation.
    m.def("build_atom", &build_atom, py::arg("tau"), py::arg("theta"), py::arg("cfg"));
    m.def("synthesize_channel", &synthesize_channel, py::arg("paths"), py::arg("cfg"));
    m.def("synthesize_extrapolated", &synthesize_extrapolated, py::arg("paths"), py::arg("cfg"));
    m.def("channel_nmse", &channel_nmse, py::arg("truth"), py::arg("estimate"));
    m.def(
        "delay_nmse",
        [](const Vec& true_taus, const Vec& est_taus, double dft_resolution, Eigen::Index L, bool one_to_one,
           double period) {
            return delay_nmse(true_taus, est_taus, dft_resolution, L,
                              one_to_one ? DelayMatching::OneToOne : DelayMatching::NearestWithReplacement,
                              period);
        },
        py::arg("true_taus"), py::arg("est_taus"), py::arg("dft_resolution"), py::arg("L"),
        py::arg("one_to_one") = false, py::arg("period") = 0.0);

    // Simulation.
    m.def("gen_paths", &gen_paths, py::arg("spec"), py::arg("cfg"));
    m.def("add_noise", &add_noise, py::arg("h"), py::arg("sigma2"), py::arg("seed"));

    // Estimators.
    m.def("cfar_threshold", &cfar_threshold, py::arg("cfg"), py::arg("sigma2"), py::arg("p_fa"));
    m.def("qnomp_run", &qnomp_run, py::arg("obs"), py::arg("cfg"), py::arg("qcfg") = QnompConfig{});
    m.def("extrapolate_plugin", &extrapolate_plugin, py::arg("result"), py::arg("cfg"));
    m.def("nomp_run", &nomp_run, py::arg("obs"), py::arg("cfg"), py::arg("ncfg") = NompConfig{});
    m.def("omp_finegrid", &omp_finegrid, py::arg("obs"), py::arg("cfg"), py::arg("grid_scale"),
          py::arg("p_fa"), py::arg("max_paths") = 32);
    m.def("omp_refined", &omp_refined, py::arg("obs"), py::arg("cfg"), py::arg("spec"), py::arg("p_fa"),
          py::arg("max_paths") = 32);
    m.def("delay_crb", &delay_crb, py::arg("paths"), py::arg("cfg"), py::arg("sigma2"));

    // Extrapolation.
    m.def("posterior_from_bfgs", &posterior_from_bfgs, py::arg("result"));
    m.def("gauss_hermite_rule", &gauss_hermite_rule, py::arg("S"),
          py::arg("convention") = QuadratureConvention::Paper);
    m.def("build_lox_operator", &build_lox_operator, py::arg("posterior"), py::arg("energies"),
          py::arg("rule"), py::arg("cfg"));
    m.def("lox_extrapolate", &lox_extrapolate, py::arg("op"), py::arg("obs_freq"), py::arg("sigma2"));
    m.def("lowrank_lox", &lowrank_lox, py::arg("op"), py::arg("obs_freq"), py::arg("sigma2"), py::arg("r"),
          py::arg("basis"));
    m.def("optimal_basis", &optimal_basis, py::arg("op"), py::arg("sigma2"), py::arg("r"));
    m.def("dpss_toeplitz", &dpss_toeplitz, py::arg("m"), py::arg("c"));
    m.def("lowrank_nmse_formula", &lowrank_nmse_formula, py::arg("eigenvalues"), py::arg("c"), py::arg("k"),
          py::arg("sigma2"), py::arg("m"), py::arg("E"));
    m.def("lox_extrapolate_2d", &lox_extrapolate_2d, py::arg("result"), py::arg("obs"), py::arg("cfg"),
          py::arg("rule"));

    // Block reweighting.
    m.def("expand_blocks", &expand_blocks, py::arg("paths"), py::arg("bcfg"));
    m.def("reweight", &reweight, py::arg("subs"), py::arg("obs"), py::arg("cfg"));

    // Harness entry points.
    py::enum_<EstimatorKind>(m, "EstimatorKind")
        .value("OmpFinegrid", EstimatorKind::OmpFinegrid)
        .value("OmpRefined", EstimatorKind::OmpRefined)
        .value("Nomp", EstimatorKind::Nomp)
        .value("Qnomp", EstimatorKind::Qnomp)
        .value("QnompBlock", EstimatorKind::QnompBlock)
        .value("Lox", EstimatorKind::Lox)
        .value("LowrankLox", EstimatorKind::LowrankLox);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("channel", &ExperimentConfig::channel)
        .def_readwrite("scenario", &ExperimentConfig::scenario)
        .def_readwrite("estimators", &ExperimentConfig::estimators)
        .def_readwrite("snr_grid_db", &ExperimentConfig::snr_grid_db)
        .def_readwrite("trials", &ExperimentConfig::trials)
        .def_readwrite("bandwidth_factors", &ExperimentConfig::bandwidth_factors)
        .def_readwrite("output_path", &ExperimentConfig::output_path)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("qnomp", &ExperimentConfig::qnomp)
        .def_readwrite("nomp", &ExperimentConfig::nomp)
        .def_readwrite("block", &ExperimentConfig::block)
        .def_readwrite("block_delta_theta_scale", &ExperimentConfig::block_delta_theta_scale)
        .def_readwrite("omp_grid_scale", &ExperimentConfig::omp_grid_scale)
        .def_readwrite("lox_order", &ExperimentConfig::lox_order)
        .def_readwrite("lox_convention", &ExperimentConfig::lox_convention)
        .def_readwrite("lowrank_rank", &ExperimentConfig::lowrank_rank);

    py::class_<ResultRow>(m, "ResultRow")
        .def_readonly("estimator", &ResultRow::estimator)
        .def_readonly("scenario", &ResultRow::scenario)
        .def_readonly("snr_db", &ResultRow::snr_db)
        .def_readonly("bandwidth_label", &ResultRow::bandwidth_label)
        .def_readonly("channel_nmse", &ResultRow::channel_nmse)
        .def_readonly("delay_nmse", &ResultRow::delay_nmse)
        .def_readonly("crb", &ResultRow::crb)
        .def_readonly("cpu_seconds", &ResultRow::cpu_seconds)
        .def_readonly("n_paths_mean", &ResultRow::n_paths_mean)
        .def_readonly("trials", &ResultRow::trials);
    m.def("load_config", &load_config, py::arg("path"));
    m.def("run_experiment", &run_experiment, py::arg("cfg"));
    m.def("emit_csv", &emit_csv, py::arg("rows"), py::arg("path"));
    m.def(
        "run_experiment_file",
        [](const std::string& config_path) {
            const ExperimentConfig cfg = load_config(config_path);
            const std::vector<ResultRow> rows = run_experiment(cfg);
            emit_csv(rows, cfg.output_path);
            return rows;
        },
        py::arg("config_path"), "Load a config, run the sweep, write the CSV, return the rows");
}
