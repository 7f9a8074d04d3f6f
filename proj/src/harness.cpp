#include "qnomp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <thread>

#include <json.hpp>

#include "qnomp/core.hpp"

namespace qnomp {

namespace {

using nlohmann::json;

double thread_cpu_seconds() {
    timespec ts{};
    clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
    return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

constexpr const char* kEstimatorNames[] = {"omp_finegrid", "omp_refined", "nomp",
                                           "qnomp",        "qnomp_block", "lox",
                                           "lowrank_lox"};

}  // namespace

const char* estimator_name(EstimatorKind kind) { return kEstimatorNames[static_cast<int>(kind)]; }

EstimatorKind estimator_from_name(const std::string& name) {
    for (int i = 0; i < 7; ++i)
        if (name == kEstimatorNames[i]) return static_cast<EstimatorKind>(i);
    throw std::invalid_argument("unknown estimator '" + name + "'");
}

void ExperimentConfig::validate() const {
    require_valid(channel);
    if (estimators.empty()) throw std::invalid_argument("config: estimator list is empty");
    if (snr_grid_db.empty()) throw std::invalid_argument("config: snr_grid_db is empty");
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (bandwidth_factors.empty()) throw std::invalid_argument("config: bandwidth_factors is empty");
    for (const int k : bandwidth_factors)
        if (k < 0) throw std::invalid_argument("config: bandwidth factors must be >= 0");
    if (!(omp_grid_scale > 0.0 && omp_grid_scale <= 1.0))
        throw std::invalid_argument("config: omp.grid_scale must be in (0,1]");
    if (lox_order != 1 && lox_order != 3 && lox_order != 5)
        throw std::invalid_argument("config: lox.order must be 1, 3 or 5");
    if (lowrank_rank < 1) throw std::invalid_argument("config: lowrank.rank must be >= 1");
    if (block.gamma < 0) throw std::invalid_argument("config: block.gamma must be >= 0");
    if (!(block.epsilon >= 0.0 && block.epsilon < 1.0))
        throw std::invalid_argument("config: block.epsilon must be in [0,1)");
    if (!(block_delta_theta_scale > 0.0))
        throw std::invalid_argument("config: block.delta_theta_scale must be > 0");
    if (scenario.kind == ScenarioKind::Multipath && scenario.n_paths < 1)
        throw std::invalid_argument("config: scenario.n_paths must be >= 1");
    if (scenario.kind == ScenarioKind::Clustered &&
        (scenario.n_clusters < 1 || scenario.subpaths_per_cluster < 1))
        throw std::invalid_argument("config: cluster counts must be >= 1");
    qnomp.validate();
    nomp.validate();
}

namespace {

struct EstimateOutput {
    EstimationResult result;
    CVec ext;  // extrapolation over all K_max bands (length N*K_max*M)
};

EstimateOutput run_estimator(EstimatorKind kind, const Observation& obs, const ExperimentConfig& cfg,
                             const ChannelConfig& chan) {
    EstimateOutput out;
    switch (kind) {
        case EstimatorKind::OmpFinegrid:
            out.result = omp_finegrid(obs, chan, cfg.omp_grid_scale, cfg.qnomp.p_fa, cfg.qnomp.max_paths);
            out.ext = extrapolate_plugin(out.result, chan);
            return out;
        case EstimatorKind::OmpRefined:
            out.result = omp_refined(obs, chan, cfg.qnomp.refinement, cfg.qnomp.p_fa, cfg.qnomp.max_paths);
            out.ext = extrapolate_plugin(out.result, chan);
            return out;
        case EstimatorKind::Nomp:
            out.result = nomp_run(obs, chan, cfg.nomp);
            out.ext = extrapolate_plugin(out.result, chan);
            return out;
        case EstimatorKind::Qnomp:
            out.result = qnomp_run(obs, chan, cfg.qnomp);
            out.ext = extrapolate_plugin(out.result, chan);
            return out;
        case EstimatorKind::QnompBlock: {
            const EstimationResult base = qnomp_run(obs, chan, cfg.qnomp);
            if (base.paths.size() == 0) return {base, CVec::Zero(chan.dim() * chan.K)};
            BlockConfig bcfg = cfg.block;
            bcfg.delta_theta = cfg.block_delta_theta_scale * chan.angle_step();
            const SubPathSet subs = reweight(expand_blocks(base.paths, bcfg), obs, chan);
            out.result.paths.taus = subs.taus;
            out.result.paths.thetas = subs.thetas;
            out.result.paths.betas = subs.gains;
            out.result.diagnostics = base.diagnostics;
            const Dictionary dict = build_dictionary(out.result.paths, chan);
            out.result.residual_norm = (obs.h_prime - dict.atoms * subs.gains).norm();
            out.ext = extrapolate_plugin(out.result, chan);
            return out;
        }
        case EstimatorKind::Lox: {
            out.result = qnomp_run(obs, chan, cfg.qnomp);
            const QuadratureRule rule = gauss_hermite_rule(cfg.lox_order, cfg.lox_convention);
            out.ext = lox_extrapolate_2d(out.result, obs, chan, rule);
            return out;
        }
        case EstimatorKind::LowrankLox: {
            out.result = qnomp_run(obs, chan, cfg.qnomp);
            const Eigen::Index n_p = out.result.paths.size();
            out.ext = CVec::Zero(chan.dim() * chan.K);
            if (n_p == 0) return out;
            const QuadratureRule rule = gauss_hermite_rule(cfg.lox_order, cfg.lox_convention);
            const DelayPosterior post = posterior_from_bfgs(out.result);
            const Vec energies = out.result.paths.betas.cwiseAbs2();
            const LoxOperator op = build_lox_operator(post, energies, rule, chan);
            const int r = std::min(cfg.lowrank_rank, chan.M);
            const double s2 = std::max(obs.sigma2,
                                       1e-12 * obs.h_prime.squaredNorm() / static_cast<double>(chan.dim()));
            const CMat basis = optimal_basis(op, s2, r);
            // The delay posterior is antenna-independent; extrapolate each
            // antenna's frequency column with the shared operator.
            CVec col(chan.M);
            for (int n = 0; n < chan.N; ++n) {
                for (int k = 0; k < chan.M; ++k) col[k] = obs.h_prime[static_cast<Eigen::Index>(k) * chan.N + n];
                const CVec ext_col = lowrank_lox(op, col, s2, r, basis);
                for (Eigen::Index q = 0; q < ext_col.size(); ++q) out.ext[q * chan.N + n] = ext_col[q];
            }
            return out;
        }
    }
    throw std::logic_error("run_estimator: unhandled estimator kind");
}

struct EstimatorTrial {
    bool ok = false;
    std::vector<double> nmse_per_band;
    double delay = 0.0;
    double cpu = 0.0;
    double n_paths = 0.0;
};

struct Trial {
    bool valid = false;
    double snr_linear = 0.0;
    bool crb_ok = false;
    double crb_norm = 0.0;
    std::vector<EstimatorTrial> per_estimator;
};

Trial run_trial(const ExperimentConfig& cfg, const ChannelConfig& chan, int snr_idx, int t) {
    Trial trial;
    trial.per_estimator.resize(cfg.estimators.size());
    try {
        const auto global = static_cast<std::uint64_t>(snr_idx) * static_cast<std::uint64_t>(cfg.trials) +
                            static_cast<std::uint64_t>(t);
        ScenarioSpec scen = cfg.scenario;
        scen.seed = substream_seed(cfg.seed, 2 * global);
        const std::uint64_t noise_seed = substream_seed(cfg.seed, 2 * global + 1);

        const PathSet truth = gen_paths(scen, chan);
        const CVec h = synthesize_channel(truth, chan);
        const CVec h_ext = synthesize_extrapolated(truth, chan);

        const double snr_db = cfg.snr_grid_db[static_cast<std::size_t>(snr_idx)];
        const double snr_target = std::isinf(snr_db) ? 0.0 : std::pow(10.0, snr_db / 10.0);
        const double sigma2 =
            snr_target > 0.0 ? h.squaredNorm() / (snr_target * static_cast<double>(chan.dim())) : 0.0;
        const NoisySample sample = add_noise(h, sigma2, noise_seed);
        trial.snr_linear = sample.snr_linear;
        trial.valid = true;

        const double dt = chan.delay_step();
        const auto L = truth.size();
        if (sigma2 > 0.0) {
            try {
                trial.crb_norm = delay_crb(truth, chan, sigma2).sum() / (static_cast<double>(L) * dt * dt);
                trial.crb_ok = true;
            } catch (const std::exception&) {
                trial.crb_ok = false;
            }
        } else {
            trial.crb_norm = 0.0;
            trial.crb_ok = true;
        }

        for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
            EstimatorTrial& et = trial.per_estimator[e];
            et.nmse_per_band.assign(cfg.bandwidth_factors.size(), 0.0);
            try {
                const double cpu0 = thread_cpu_seconds();
                const EstimateOutput est = run_estimator(cfg.estimators[e], sample.observation, cfg, chan);
                et.cpu = thread_cpu_seconds() - cpu0;
                if (est.result.paths.size() == 0) continue;  // counted as a failure
                const CVec h_hat = synthesize_channel(est.result.paths, chan);
                for (std::size_t b = 0; b < cfg.bandwidth_factors.size(); ++b) {
                    const int K = cfg.bandwidth_factors[b];
                    if (K == 0) {
                        et.nmse_per_band[b] = channel_nmse(h, h_hat);
                    } else {
                        const Eigen::Index len = static_cast<Eigen::Index>(chan.N) * K * chan.M;
                        et.nmse_per_band[b] = channel_nmse(h_ext.head(len), est.ext.head(len));
                    }
                }
                et.delay = delay_nmse(truth.taus, est.result.paths.taus, dt, L, DelayMatching::OneToOne,
                                      chan.delay_period());
                et.n_paths = static_cast<double>(est.result.paths.size());
                et.ok = true;
            } catch (const std::exception&) {
                et.ok = false;
            }
        }
    } catch (const std::exception&) {
        trial.valid = false;
    }
    return trial;
}

}  // namespace

int worker_count() {
    if (const char* env = std::getenv("QNOMP_WORKERS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ChannelConfig chan = cfg.channel;
    chan.K = *std::max_element(cfg.bandwidth_factors.begin(), cfg.bandwidth_factors.end());

    const int n_snr = static_cast<int>(cfg.snr_grid_db.size());
    const int total = n_snr * cfg.trials;
    std::vector<Trial> trials(static_cast<std::size_t>(total));

    const int workers = std::min(worker_count(), total);
    if (workers <= 1) {
        for (int idx = 0; idx < total; ++idx)
            trials[static_cast<std::size_t>(idx)] = run_trial(cfg, chan, idx / cfg.trials, idx % cfg.trials);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (int idx = next.fetch_add(1); idx < total; idx = next.fetch_add(1))
                    trials[static_cast<std::size_t>(idx)] =
                        run_trial(cfg, chan, idx / cfg.trials, idx % cfg.trials);
            });
        }
        for (std::thread& th : pool) th.join();
    }

    // Fixed-order reduction over the trial index, independent of how the
    // pool scheduled the work.
    std::vector<ResultRow> rows;
    rows.reserve(cfg.estimators.size() * static_cast<std::size_t>(n_snr) * cfg.bandwidth_factors.size());
    for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
        for (int s = 0; s < n_snr; ++s) {
            int n_ok = 0, n_crb = 0;
            double snr_sum = 0.0, delay_sum = 0.0, cpu_sum = 0.0, paths_sum = 0.0, crb_sum = 0.0;
            std::vector<double> nmse_sum(cfg.bandwidth_factors.size(), 0.0);
            for (int t = 0; t < cfg.trials; ++t) {
                const Trial& trial = trials[static_cast<std::size_t>(s * cfg.trials + t)];
                if (!trial.valid) continue;
                if (trial.crb_ok) {
                    crb_sum += trial.crb_norm;
                    ++n_crb;
                }
                const EstimatorTrial& et = trial.per_estimator[e];
                if (!et.ok) continue;
                ++n_ok;
                snr_sum += trial.snr_linear;
                delay_sum += et.delay;
                cpu_sum += et.cpu;
                paths_sum += et.n_paths;
                for (std::size_t b = 0; b < nmse_sum.size(); ++b) nmse_sum[b] += et.nmse_per_band[b];
            }
            for (std::size_t b = 0; b < cfg.bandwidth_factors.size(); ++b) {
                ResultRow row;
                row.estimator = estimator_name(cfg.estimators[e]);
                row.scenario = cfg.scenario.kind == ScenarioKind::Multipath ? "multipath" : "clustered";
                row.snr_db = 10.0 * std::log10(snr_sum / n_ok);
                row.bandwidth_label = cfg.channel.M * (cfg.bandwidth_factors[b] + 1);
                row.channel_nmse = nmse_sum[b] / n_ok;
                row.delay_nmse = delay_sum / n_ok;
                row.crb = n_crb > 0 ? crb_sum / n_crb : 0.0;
                row.cpu_seconds = cpu_sum / n_ok;
                row.n_paths_mean = paths_sum / n_ok;
                row.trials = n_ok;
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

const char* ResultRow::csv_header() {
    return "estimator,scenario,snr_db,bandwidth_label,channel_nmse,delay_nmse,crb,cpu_seconds,"
           "n_paths_mean,trials";
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("emit_csv: cannot open '" + path + "' for writing");
    out << ResultRow::csv_header() << '\n';
    char buf[512];
    for (const ResultRow& row : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%.6g,%d,%.6g,%.6g,%.6g,%.6g,%.6g,%d", row.estimator.c_str(),
                      row.scenario.c_str(), row.snr_db, row.bandwidth_label, row.channel_nmse,
                      row.delay_nmse, row.crb, row.cpu_seconds, row.n_paths_mean, row.trials);
        out << buf << '\n';
    }
    if (!out) throw std::runtime_error("emit_csv: write failed for '" + path + "'");
}

double timing_probe(EstimatorKind kind, const Observation& obs, const ExperimentConfig& cfg) {
    ChannelConfig chan = cfg.channel;
    if (!cfg.bandwidth_factors.empty())
        chan.K = *std::max_element(cfg.bandwidth_factors.begin(), cfg.bandwidth_factors.end());
    const double cpu0 = thread_cpu_seconds();
    (void)run_estimator(kind, obs, cfg, chan);
    return thread_cpu_seconds() - cpu0;
}

namespace {

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                ok = true;
                break;
            }
        if (!ok)
            throw std::invalid_argument("config: unknown key '" +
                                        (section.empty() ? it.key() : section + "." + it.key()) + "'");
    }
}

template <typename T>
T get_field(const json& j, const std::string& section, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument("config: bad value for '" +
                                    (section.empty() ? std::string(key) : section + "." + key) + "'");
    }
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw std::invalid_argument("config: parse error in '" + path + "': " + ex.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");

    ExperimentConfig cfg;
    check_keys(j, "", {"channel", "scenario", "estimators", "snr_grid_db", "trials", "bandwidth_factors",
                       "output_path", "seed", "qnomp", "nomp", "block", "omp", "lox", "lowrank"});

    if (j.contains("channel")) {
        const json& c = j.at("channel");
        check_keys(c, "channel", {"M", "N", "delta_f"});
        cfg.channel.M = get_field(c, "channel", "M", cfg.channel.M);
        cfg.channel.N = get_field(c, "channel", "N", cfg.channel.N);
        cfg.channel.delta_f = get_field(c, "channel", "delta_f", cfg.channel.delta_f);
    }
    if (j.contains("scenario")) {
        const json& s = j.at("scenario");
        check_keys(s, "scenario", {"kind", "C1", "C2", "n_paths", "n_clusters", "subpaths_per_cluster",
                                   "base_tau", "base_theta"});
        const std::string kind = get_field<std::string>(s, "scenario", "kind", "multipath");
        if (kind == "multipath")
            cfg.scenario.kind = ScenarioKind::Multipath;
        else if (kind == "clustered")
            cfg.scenario.kind = ScenarioKind::Clustered;
        else
            throw std::invalid_argument("config: scenario.kind must be 'multipath' or 'clustered'");
        cfg.scenario.C1 = get_field(s, "scenario", "C1", cfg.scenario.C1);
        cfg.scenario.C2 = get_field(s, "scenario", "C2", cfg.scenario.C2);
        cfg.scenario.n_paths = get_field(s, "scenario", "n_paths", cfg.scenario.n_paths);
        cfg.scenario.n_clusters = get_field(s, "scenario", "n_clusters", cfg.scenario.n_clusters);
        cfg.scenario.subpaths_per_cluster =
            get_field(s, "scenario", "subpaths_per_cluster", cfg.scenario.subpaths_per_cluster);
        if (s.contains("base_tau") && !s.at("base_tau").is_null())
            cfg.scenario.base_tau = get_field<double>(s, "scenario", "base_tau", 0.0);
        if (s.contains("base_theta") && !s.at("base_theta").is_null())
            cfg.scenario.base_theta = get_field<double>(s, "scenario", "base_theta", 0.0);
    }
    if (j.contains("estimators")) {
        const json& e = j.at("estimators");
        if (!e.is_array()) throw std::invalid_argument("config: estimators must be an array of names");
        cfg.estimators.clear();
        for (const json& item : e) {
            if (!item.is_string()) throw std::invalid_argument("config: estimators must be an array of names");
            cfg.estimators.push_back(estimator_from_name(item.get<std::string>()));
        }
    }
    if (j.contains("snr_grid_db")) {
        const json& g = j.at("snr_grid_db");
        if (!g.is_array()) throw std::invalid_argument("config: snr_grid_db must be an array");
        cfg.snr_grid_db.clear();
        for (const json& item : g) {
            if (item.is_number())
                cfg.snr_grid_db.push_back(item.get<double>());
            else if (item.is_string() && item.get<std::string>() == "inf")
                cfg.snr_grid_db.push_back(std::numeric_limits<double>::infinity());
            else
                throw std::invalid_argument("config: snr_grid_db entries must be numbers or \"inf\"");
        }
    }
    cfg.trials = get_field(j, "", "trials", cfg.trials);
    if (j.contains("bandwidth_factors")) {
        cfg.bandwidth_factors = get_field(j, "", "bandwidth_factors", cfg.bandwidth_factors);
    }
    cfg.output_path = get_field(j, "", "output_path", cfg.output_path);
    cfg.seed = get_field(j, "", "seed", cfg.seed);

    if (j.contains("qnomp")) {
        const json& q = j.at("qnomp");
        check_keys(q, "qnomp", {"k1", "k2", "n_lr", "n_in", "n_out", "p_fa", "lambda", "max_paths",
                                "joint_blocks", "scale_first_update"});
        cfg.qnomp.refinement.k1 = get_field(q, "qnomp", "k1", cfg.qnomp.refinement.k1);
        cfg.qnomp.refinement.k2 = get_field(q, "qnomp", "k2", cfg.qnomp.refinement.k2);
        cfg.qnomp.refinement.n_lr = get_field(q, "qnomp", "n_lr", cfg.qnomp.refinement.n_lr);
        cfg.qnomp.n_in = get_field(q, "qnomp", "n_in", cfg.qnomp.n_in);
        cfg.qnomp.n_out = get_field(q, "qnomp", "n_out", cfg.qnomp.n_out);
        cfg.qnomp.p_fa = get_field(q, "qnomp", "p_fa", cfg.qnomp.p_fa);
        if (q.contains("lambda") && !q.at("lambda").is_null())
            cfg.qnomp.lambda = get_field<double>(q, "qnomp", "lambda", 0.0);
        cfg.qnomp.max_paths = get_field(q, "qnomp", "max_paths", cfg.qnomp.max_paths);
        cfg.qnomp.joint_blocks = get_field(q, "qnomp", "joint_blocks", cfg.qnomp.joint_blocks);
        cfg.qnomp.scale_first_update =
            get_field(q, "qnomp", "scale_first_update", cfg.qnomp.scale_first_update);
    }
    if (j.contains("nomp")) {
        const json& n = j.at("nomp");
        check_keys(n, "nomp", {"Rs", "Rc", "n_out", "p_fa", "k1", "k2", "n_lr", "max_paths"});
        cfg.nomp.Rs = get_field(n, "nomp", "Rs", cfg.nomp.Rs);
        cfg.nomp.Rc = get_field(n, "nomp", "Rc", cfg.nomp.Rc);
        cfg.nomp.n_out = get_field(n, "nomp", "n_out", cfg.nomp.n_out);
        cfg.nomp.p_fa = get_field(n, "nomp", "p_fa", cfg.nomp.p_fa);
        cfg.nomp.refinement.k1 = get_field(n, "nomp", "k1", cfg.nomp.refinement.k1);
        cfg.nomp.refinement.k2 = get_field(n, "nomp", "k2", cfg.nomp.refinement.k2);
        cfg.nomp.refinement.n_lr = get_field(n, "nomp", "n_lr", cfg.nomp.refinement.n_lr);
        cfg.nomp.max_paths = get_field(n, "nomp", "max_paths", cfg.nomp.max_paths);
    }
    if (j.contains("block")) {
        const json& b = j.at("block");
        check_keys(b, "block", {"gamma", "delta_theta_scale", "epsilon", "epsilon1", "epsilon2"});
        cfg.block.gamma = get_field(b, "block", "gamma", cfg.block.gamma);
        cfg.block_delta_theta_scale = get_field(b, "block", "delta_theta_scale", cfg.block_delta_theta_scale);
        cfg.block.epsilon = get_field(b, "block", "epsilon", cfg.block.epsilon);
        cfg.block.epsilon1 = get_field(b, "block", "epsilon1", cfg.block.epsilon1);
        cfg.block.epsilon2 = get_field(b, "block", "epsilon2", cfg.block.epsilon2);
    }
    if (j.contains("omp")) {
        const json& o = j.at("omp");
        check_keys(o, "omp", {"grid_scale"});
        cfg.omp_grid_scale = get_field(o, "omp", "grid_scale", cfg.omp_grid_scale);
    }
    if (j.contains("lox")) {
        const json& l = j.at("lox");
        check_keys(l, "lox", {"order", "convention"});
        cfg.lox_order = get_field(l, "lox", "order", cfg.lox_order);
        const std::string conv = get_field<std::string>(l, "lox", "convention",
                                                        cfg.lox_convention == QuadratureConvention::Paper
                                                            ? "paper"
                                                            : "exact");
        if (conv == "paper")
            cfg.lox_convention = QuadratureConvention::Paper;
        else if (conv == "exact")
            cfg.lox_convention = QuadratureConvention::Exact;
        else
            throw std::invalid_argument("config: lox.convention must be 'paper' or 'exact'");
    }
    if (j.contains("lowrank")) {
        const json& l = j.at("lowrank");
        check_keys(l, "lowrank", {"rank"});
        cfg.lowrank_rank = get_field(l, "lowrank", "rank", cfg.lowrank_rank);
    }

    cfg.validate();
    return cfg;
}

}  // namespace qnomp
