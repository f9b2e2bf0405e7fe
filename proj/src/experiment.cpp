#include "sslgraph/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace sslgraph {

using json = nlohmann::json;

void ExperimentConfig::validate() const {
    if (dataset_kind != "sbm" && dataset_kind != "files")
        throw ConfigError("dataset_kind must be 'sbm' or 'files'");
    if (dataset_kind == "sbm") sbm.validate();
    if (dataset_kind == "files") {
        for (const std::string* p : {&edge_list_path, &features_path}) {
            if (p->empty()) throw ConfigError("files dataset requires edge_list and features paths");
            if (!std::ifstream(*p)) throw ConfigError("dataset file not found: " + *p);
        }
        if (!labels_path.empty() && !std::ifstream(labels_path))
            throw ConfigError("dataset file not found: " + labels_path);
    }
    aug.validate();
    weights.validate();
    if (!(node_ratio > 0.0) || node_ratio > 1.0 || !(dim_ratio > 0.0) || dim_ratio > 1.0)
        throw ConfigError("sampling ratios must be in (0,1]");
    for (double r : node_ratio_grid)
        if (!(r > 0.0) || r > 1.0) throw ConfigError("node ratio grid values must be in (0,1]");
    for (double r : dim_ratio_grid)
        if (!(r > 0.0) || r > 1.0) throw ConfigError("dim ratio grid values must be in (0,1]");
    if (optimizer != "adam" && optimizer != "sgd") throw ConfigError("optimizer must be adam or sgd");
    if (precision != "f64" && precision != "f32") throw ConfigError("precision must be f64 or f32");
    if (expander_dim < 1 || encoder_out < 1) throw ConfigError("model dimensions must be >= 1");
}

namespace {

std::string fmt(double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (double x : v) {
        if (!s.empty()) s += ",";
        s += fmt(x);
    }
    return s;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.find_first_not_of(" \t") == std::string::npos) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

}  // namespace

std::map<std::string, std::string> ExperimentConfig::echo() const {
    std::map<std::string, std::string> m;
    m["dataset.kind"] = dataset_kind;
    m["dataset.sbm.nodes_per_block"] = std::to_string(sbm.nodes_per_block);
    m["dataset.sbm.num_blocks"] = std::to_string(sbm.num_blocks);
    m["dataset.sbm.p_intra"] = fmt(sbm.p_intra);
    m["dataset.sbm.p_inter"] = fmt(sbm.p_inter);
    m["dataset.sbm.feature_dim"] = std::to_string(sbm.feature_dim);
    m["dataset.sbm.feature_noise"] = fmt(sbm.feature_noise);
    m["dataset.edge_list"] = edge_list_path;
    m["dataset.features"] = features_path;
    m["dataset.labels"] = labels_path;
    m["augmentation.feature_mask_prob"] = fmt(aug.feature_mask_prob);
    m["augmentation.edge_drop_prob"] = fmt(aug.edge_drop_prob);
    m["augmentation.row_wise_mask"] = aug.row_wise_mask ? "true" : "false";
    m["model.encoder_hidden"] = std::to_string(encoder_hidden);
    m["model.encoder_out"] = std::to_string(encoder_out);
    m["model.expander_hidden"] = std::to_string(expander_hidden);
    m["model.expander_dim"] = std::to_string(expander_dim);
    m["loss.lambda_inv"] = fmt(weights.lambda_inv);
    m["loss.mu_var"] = fmt(weights.mu_var);
    m["loss.nu_cov"] = fmt(weights.nu_cov);
    m["loss.epsilon"] = fmt(weights.epsilon);
    m["loss.mode"] = to_string(mode);
    m["sampling.node_method"] =
        node_method == NodeSamplingMethod::kUniform ? "uniform" : "ricci";
    m["sampling.node_ratio"] = fmt(node_ratio);
    m["sampling.dim_ratio"] = fmt(dim_ratio);
    m["sampling.node_ratio_grid"] = join(node_ratio_grid);
    m["sampling.dim_ratio_grid"] = join(dim_ratio_grid);
    m["training.epochs"] = std::to_string(epochs);
    m["training.patience"] = std::to_string(patience);
    m["training.optimizer"] = optimizer;
    m["training.adam_lr"] = fmt(adam.lr);
    m["training.sgd_lr"] = fmt(sgd_lr);
    m["probe.trials"] = std::to_string(probe_trials);
    m["probe.train_frac"] = fmt(train_frac);
    m["probe.val_frac"] = fmt(val_frac);
    m["probe.l2"] = fmt(probe.l2);
    m["run.seed"] = std::to_string(seed);
    m["run.out_dir"] = out_dir;
    m["run.precision"] = precision;
    m["run.threads"] = std::to_string(threads);
    return m;
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& section, const std::string& key,
                        const std::string& value) {
    const std::string k = section.empty() ? key : section + "." + key;
    if (k == "dataset.kind") cfg.dataset_kind = value;
    else if (k == "dataset.nodes_per_block") cfg.sbm.nodes_per_block = std::stoul(value);
    else if (k == "dataset.num_blocks") cfg.sbm.num_blocks = std::stoul(value);
    else if (k == "dataset.p_intra") cfg.sbm.p_intra = std::stod(value);
    else if (k == "dataset.p_inter") cfg.sbm.p_inter = std::stod(value);
    else if (k == "dataset.feature_dim") cfg.sbm.feature_dim = std::stoul(value);
    else if (k == "dataset.feature_noise") cfg.sbm.feature_noise = std::stod(value);
    else if (k == "dataset.edge_list") cfg.edge_list_path = value;
    else if (k == "dataset.features") cfg.features_path = value;
    else if (k == "dataset.labels") cfg.labels_path = value;
    else if (k == "augmentation.feature_mask_prob") cfg.aug.feature_mask_prob = std::stod(value);
    else if (k == "augmentation.edge_drop_prob") cfg.aug.edge_drop_prob = std::stod(value);
    else if (k == "augmentation.row_wise_mask") cfg.aug.row_wise_mask = value == "true";
    else if (k == "model.encoder_hidden") cfg.encoder_hidden = std::stoul(value);
    else if (k == "model.encoder_out") cfg.encoder_out = std::stoul(value);
    else if (k == "model.expander_hidden") cfg.expander_hidden = std::stoul(value);
    else if (k == "model.expander_dim") cfg.expander_dim = std::stoul(value);
    else if (k == "loss.lambda_inv") cfg.weights.lambda_inv = std::stod(value);
    else if (k == "loss.mu_var") cfg.weights.mu_var = std::stod(value);
    else if (k == "loss.nu_cov") cfg.weights.nu_cov = std::stod(value);
    else if (k == "loss.epsilon") cfg.weights.epsilon = std::stod(value);
    else if (k == "loss.mode") cfg.mode = loss_mode_from_string(value);
    else if (k == "sampling.node_method") {
        if (value == "uniform") cfg.node_method = NodeSamplingMethod::kUniform;
        else if (value == "ricci") cfg.node_method = NodeSamplingMethod::kRicci;
        else throw ConfigError("unknown node sampling method: " + value);
    }
    else if (k == "sampling.node_ratio") cfg.node_ratio = std::stod(value);
    else if (k == "sampling.dim_ratio") cfg.dim_ratio = std::stod(value);
    else if (k == "sampling.node_ratio_grid") cfg.node_ratio_grid = parse_double_list(value);
    else if (k == "sampling.dim_ratio_grid") cfg.dim_ratio_grid = parse_double_list(value);
    else if (k == "training.epochs") cfg.epochs = std::stoul(value);
    else if (k == "training.patience") cfg.patience = std::stoul(value);
    else if (k == "training.optimizer") cfg.optimizer = value;
    else if (k == "training.adam_lr") cfg.adam.lr = std::stod(value);
    else if (k == "training.sgd_lr") cfg.sgd_lr = std::stod(value);
    else if (k == "probe.trials") cfg.probe_trials = std::stoul(value);
    else if (k == "probe.train_frac") cfg.train_frac = std::stod(value);
    else if (k == "probe.val_frac") cfg.val_frac = std::stod(value);
    else if (k == "probe.l2") cfg.probe.l2 = std::stod(value);
    else if (k == "probe.max_iters") cfg.probe.max_iters = std::stoul(value);
    else if (k == "run.seed") cfg.seed = std::stoull(value);
    else if (k == "run.out_dir") cfg.out_dir = value;
    else if (k == "run.precision") cfg.precision = value;
    else if (k == "run.threads") cfg.threads = std::stoul(value);
    else throw ConfigError("unknown config key: " + k);
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ExperimentConfig cfg;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        const auto end = line.find_last_not_of(" \t\r");
        line = line.substr(start, end - start + 1);
        if (line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        try {
            apply_config_entry(cfg, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

Graph load_dataset(const ExperimentConfig& cfg) {
    if (cfg.dataset_kind == "sbm") {
        SbmConfig sbm = cfg.sbm;
        sbm.seed = cfg.seed;
        return generate_sbm(sbm);
    }
    std::optional<std::string> labels;
    if (!cfg.labels_path.empty()) labels = cfg.labels_path;
    return load_graph(cfg.edge_list_path, cfg.features_path, labels);
}

namespace {

double ms_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

SamplingPlan build_plan(const ExperimentConfig& cfg, std::size_t n, std::size_t d,
                        std::uint64_t epoch, const std::vector<double>* ricci_probs) {
    SamplingPlan plan;
    plan.epoch = epoch;
    plan.node_ratio = cfg.node_ratio;
    plan.dim_ratio = cfg.dim_ratio;
    plan.method = cfg.node_method;
    const bool wants_nodes = cfg.mode == LossMode::kNodeSampled || cfg.mode == LossMode::kJoint;
    const bool wants_dims = cfg.mode == LossMode::kDimSampledCovOnly ||
                            cfg.mode == LossMode::kDimSampledAll || cfg.mode == LossMode::kJoint;
    if (wants_nodes && cfg.node_ratio < 1.0) {
        Rng rng = Rng::derive(cfg.seed, epoch, 3);
        if (cfg.node_method == NodeSamplingMethod::kRicci && ricci_probs)
            plan.node_indices = ricci_node_sample(*ricci_probs, cfg.node_ratio, rng);
        else
            plan.node_indices = uniform_node_sample(n, cfg.node_ratio, rng);
    }
    if (wants_dims && cfg.dim_ratio < 1.0) {
        Rng rng = Rng::derive(cfg.seed, epoch, 4);
        plan.dim_indices = uniform_dim_sample(d, cfg.dim_ratio, rng);
    }
    return plan;
}

}  // namespace

PretrainResult pretrain(const ExperimentConfig& cfg, const Graph& g) {
    cfg.validate();
    PretrainResult result;
    result.report.config_echo = cfg.echo();
    result.report.precision = cfg.precision;
    result.report.threads = cfg.threads;

    Rng init_rng = Rng::derive(cfg.seed, 100);
    result.params.encoder =
        GcnEncoderParams::init(g.feature_dim(), cfg.encoder_hidden, cfg.encoder_out, init_rng);
    result.params.expander =
        ExpanderParams::init(cfg.encoder_out, cfg.expander_hidden, cfg.expander_dim, init_rng);

    std::vector<double> ricci_probs;
    if (cfg.node_method == NodeSamplingMethod::kRicci)
        ricci_probs = ricci_scores(g).probs;  // offline, on the un-augmented graph

    AugmentationConfig aug = cfg.aug;
    aug.seed = cfg.seed;

    AdamState adam_state;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const ViewPair views = augment(g, aug, epoch);
        const NormalizedAdjacency a1(views.view1);
        const NormalizedAdjacency a2(views.view2);

        Tape tape;
        const ModelTapeIds ids1 = forward_model(tape, a1, views.view1.features(), result.params);
        const ModelTapeIds ids2 = forward_model_shared(tape, a2, views.view2.features(), ids1);

        const SamplingPlan plan =
            build_plan(cfg, g.num_nodes(), cfg.expander_dim, epoch,
                       ricci_probs.empty() ? nullptr : &ricci_probs);

        const auto t_loss = std::chrono::steady_clock::now();
        const Tape::Id loss = tape.vicreg(ids1.z, ids2.z, cfg.weights, plan, cfg.mode);
        EpochRecord rec;
        rec.loss_ms = ms_since(t_loss);
        rec.epoch = epoch;
        rec.breakdown = tape.breakdown(loss);

        if (!std::isfinite(rec.breakdown.total)) {
            result.report.aborted = true;
            result.report.abort_reason = "non-finite loss at epoch " + std::to_string(epoch);
            result.report.epochs.push_back(rec);
            return result;
        }

        // standalone term timings for the report
        {
            const DenseMatrix& z1 = tape.value(ids1.z);
            const DenseMatrix& z2 = tape.value(ids2.z);
            const IndexSet* nodes = plan.node_indices ? &*plan.node_indices : nullptr;
            const IndexSet* dims = plan.dim_indices ? &*plan.dim_indices : nullptr;
            const bool node_terms = cfg.mode == LossMode::kNodeSampled || cfg.mode == LossMode::kJoint;
            const bool dim_all = cfg.mode == LossMode::kDimSampledAll || cfg.mode == LossMode::kJoint;
            const bool dim_cov = dim_all || cfg.mode == LossMode::kDimSampledCovOnly;
            auto t0 = std::chrono::steady_clock::now();
            invariance_loss(z1, z2, node_terms ? nodes : nullptr, dim_all ? dims : nullptr);
            rec.invariance_ms = ms_since(t0);
            t0 = std::chrono::steady_clock::now();
            variance_loss(z1, cfg.weights.epsilon, node_terms ? nodes : nullptr,
                          dim_all ? dims : nullptr);
            variance_loss(z2, cfg.weights.epsilon, node_terms ? nodes : nullptr,
                          dim_all ? dims : nullptr);
            rec.variance_ms = ms_since(t0);
            t0 = std::chrono::steady_clock::now();
            covariance_loss(z1, node_terms ? nodes : nullptr, dim_cov ? dims : nullptr);
            covariance_loss(z2, node_terms ? nodes : nullptr, dim_cov ? dims : nullptr);
            rec.covariance_ms = ms_since(t0);
        }

        tape.backward(loss);
        const auto grads = model_grads(tape, ids1);
        const auto tensors = result.params.tensors();
        if (cfg.optimizer == "adam") adam_step(tensors, grads, cfg.adam, adam_state);
        else sgd_step(tensors, grads, cfg.sgd_lr);

        result.report.epochs.push_back(rec);

        if (rec.breakdown.total < best_loss - 1e-9) {
            best_loss = rec.breakdown.total;
            best_epoch = epoch;
        } else if (cfg.patience > 0 && epoch - best_epoch >= cfg.patience) {
            break;  // loss plateau
        }
    }
    return result;
}

PretrainResult run_experiment(const ExperimentConfig& cfg, const Graph& g) {
    PretrainResult result = pretrain(cfg, g);
    if (!result.report.aborted && g.labels() && cfg.probe_trials > 0) {
        result.report.probe = evaluate(result.params.encoder, g, cfg.train_frac, cfg.val_frac,
                                       cfg.probe_trials, cfg.seed, cfg.probe);
        result.report.probe_valid = true;
    }
    return result;
}

std::vector<SweepCell> sweep(const ExperimentConfig& cfg, const Graph& g) {
    cfg.validate();
    std::vector<SweepCell> cells;
    auto with_baseline = [](std::vector<double> grid) {
        if (std::find(grid.begin(), grid.end(), 1.0) == grid.end()) grid.push_back(1.0);
        return grid;
    };
    switch (cfg.mode) {
        case LossMode::kFull:
            cells.push_back({cfg.mode, 1.0, 1.0, {}, false, {}});
            break;
        case LossMode::kNodeSampled:
            for (double p : with_baseline(cfg.node_ratio_grid))
                cells.push_back({cfg.mode, p, 1.0, {}, false, {}});
            break;
        case LossMode::kDimSampledCovOnly:
        case LossMode::kDimSampledAll:
            for (double q : with_baseline(cfg.dim_ratio_grid))
                cells.push_back({cfg.mode, 1.0, q, {}, false, {}});
            break;
        case LossMode::kJoint:
            for (double p : with_baseline(cfg.node_ratio_grid))
                for (double q : with_baseline(cfg.dim_ratio_grid))
                    cells.push_back({cfg.mode, p, q, {}, false, {}});
            break;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            ExperimentConfig cell_cfg = cfg;
            cell_cfg.node_ratio = cells[i].p;
            cell_cfg.dim_ratio = cells[i].q;
            cell_cfg.threads = 1;
            try {
                cells[i].report = run_experiment(cell_cfg, g).report;
            } catch (const std::exception& e) {
                cells[i].failed = true;
                cells[i].error = e.what();
            }
        }
    };
    const std::size_t nthreads = std::max<std::size_t>(1, cfg.threads);
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return cells;
}

void write_sweep_csv(const std::vector<SweepCell>& cells, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "mode,node_ratio,dim_ratio,final_total_loss,probe_mean,probe_std,mean_loss_ms,status\n";
    for (const auto& c : cells) {
        double final_loss = std::numeric_limits<double>::quiet_NaN();
        double mean_ms = 0.0;
        if (!c.report.epochs.empty()) {
            final_loss = c.report.epochs.back().breakdown.total;
            for (const auto& e : c.report.epochs) mean_ms += e.loss_ms;
            mean_ms /= static_cast<double>(c.report.epochs.size());
        }
        out << to_string(c.mode) << ',' << c.p << ',' << c.q << ',' << final_loss << ','
            << (c.report.probe_valid ? c.report.probe.accuracy_mean : 0.0) << ','
            << (c.report.probe_valid ? c.report.probe.accuracy_std : 0.0) << ',' << mean_ms << ','
            << (c.failed ? "failed:" + c.error : "ok") << '\n';
    }
}

namespace {

json to_json(const LossBreakdown& b) {
    return json{{"invariance", b.invariance},
                {"variance_view1", b.variance_view1},
                {"variance_view2", b.variance_view2},
                {"covariance_view1", b.covariance_view1},
                {"covariance_view2", b.covariance_view2},
                {"total", b.total},
                {"nodes_used", b.nodes_used},
                {"dims_used", b.dims_used}};
}

LossBreakdown breakdown_from_json(const json& j) {
    LossBreakdown b;
    b.invariance = j.at("invariance");
    b.variance_view1 = j.at("variance_view1");
    b.variance_view2 = j.at("variance_view2");
    b.covariance_view1 = j.at("covariance_view1");
    b.covariance_view2 = j.at("covariance_view2");
    b.total = j.at("total");
    b.nodes_used = j.at("nodes_used");
    b.dims_used = j.at("dims_used");
    return b;
}

}  // namespace

void emit_report(const ExperimentReport& report, const std::string& path) {
    json j;
    j["config"] = report.config_echo;
    j["precision"] = report.precision;
    j["threads"] = report.threads;
    j["aborted"] = report.aborted;
    j["abort_reason"] = report.abort_reason;
    j["epochs"] = json::array();
    for (const auto& e : report.epochs) {
        json je = to_json(e.breakdown);
        je["epoch"] = e.epoch;
        je["loss_ms"] = e.loss_ms;
        je["invariance_ms"] = e.invariance_ms;
        je["variance_ms"] = e.variance_ms;
        je["covariance_ms"] = e.covariance_ms;
        j["epochs"].push_back(je);
    }
    j["probe_valid"] = report.probe_valid;
    if (report.probe_valid) {
        j["probe"] = {{"accuracy_mean", report.probe.accuracy_mean},
                      {"accuracy_std", report.probe.accuracy_std},
                      {"per_trial", report.probe.per_trial},
                      {"l2", report.probe.l2}};
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open report for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("report write failed: " + path);
}

ExperimentReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError("malformed report JSON in " + path + ": " + e.what());
    }
    ExperimentReport report;
    report.config_echo = j.at("config").get<std::map<std::string, std::string>>();
    report.precision = j.at("precision");
    report.threads = j.at("threads");
    report.aborted = j.at("aborted");
    report.abort_reason = j.at("abort_reason");
    for (const auto& je : j.at("epochs")) {
        EpochRecord e;
        e.breakdown = breakdown_from_json(je);
        e.epoch = je.at("epoch");
        e.loss_ms = je.at("loss_ms");
        e.invariance_ms = je.at("invariance_ms");
        e.variance_ms = je.at("variance_ms");
        e.covariance_ms = je.at("covariance_ms");
        report.epochs.push_back(e);
    }
    report.probe_valid = j.at("probe_valid");
    if (report.probe_valid) {
        report.probe.accuracy_mean = j.at("probe").at("accuracy_mean");
        report.probe.accuracy_std = j.at("probe").at("accuracy_std");
        report.probe.per_trial = j.at("probe").at("per_trial").get<std::vector<double>>();
        report.probe.l2 = j.at("probe").at("l2");
    }
    return report;
}

}  // namespace sslgraph
