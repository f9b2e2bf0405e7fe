#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sslgraph/autodiff.hpp"
#include "sslgraph/bench.hpp"
#include "sslgraph/gcn.hpp"
#include "sslgraph/graph.hpp"
#include "sslgraph/probe.hpp"
#include "sslgraph/samplers.hpp"
#include "sslgraph/vicreg.hpp"

namespace sslgraph {

struct ExperimentConfig {
    // dataset
    std::string dataset_kind = "sbm";  // "sbm" | "files"
    SbmConfig sbm;
    std::string edge_list_path, features_path, labels_path;

    // augmentation (seed is tied to the run seed at validate() time)
    AugmentationConfig aug;

    // model
    std::size_t encoder_hidden = 256;
    std::size_t encoder_out = 256;
    std::size_t expander_hidden = 512;
    std::size_t expander_dim = 512;

    // loss + sampling
    LossWeights weights;
    LossMode mode = LossMode::kFull;
    NodeSamplingMethod node_method = NodeSamplingMethod::kUniform;
    double node_ratio = 1.0;
    double dim_ratio = 1.0;
    std::vector<double> node_ratio_grid = {0.01, 0.1, 0.25, 0.5, 0.75, 1.0};
    std::vector<double> dim_ratio_grid = {0.01, 0.1, 0.25, 0.5, 0.75, 1.0};

    // training
    std::size_t epochs = 500;
    std::size_t patience = 50;
    std::string optimizer = "adam";  // "adam" | "sgd"
    AdamConfig adam;
    double sgd_lr = 0.01;

    // probe
    std::size_t probe_trials = 10;
    double train_frac = 0.1;
    double val_frac = 0.1;
    ProbeConfig probe;

    // run
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    std::string precision = "f64";  // f32 affects the bench kernel only
    std::size_t threads = 1;

    void validate() const;
    std::map<std::string, std::string> echo() const;
};

// Flat "[section]\nkey = value" config file; unknown keys are an error.
ExperimentConfig parse_config_file(const std::string& path);
void apply_config_entry(ExperimentConfig& cfg, const std::string& section, const std::string& key,
                        const std::string& value);

struct EpochRecord {
    std::size_t epoch = 0;
    LossBreakdown breakdown;
    double loss_ms = 0.0;  // combined objective forward
    double invariance_ms = 0.0;
    double variance_ms = 0.0;
    double covariance_ms = 0.0;
};

struct ExperimentReport {
    std::map<std::string, std::string> config_echo;
    std::vector<EpochRecord> epochs;
    ProbeResult probe;
    bool probe_valid = false;
    bool aborted = false;
    std::string abort_reason;
    std::string precision = "f64";
    std::size_t threads = 1;
};

struct PretrainResult {
    ModelParams params;
    ExperimentReport report;
};

Graph load_dataset(const ExperimentConfig& cfg);

// Full-graph encoding each epoch; sampling applies only inside the loss.
PretrainResult pretrain(const ExperimentConfig& cfg, const Graph& g);

// pretrain + linear evaluation on the encoder representations.
PretrainResult run_experiment(const ExperimentConfig& cfg, const Graph& g);

struct SweepCell {
    LossMode mode = LossMode::kFull;
    double p = 1.0;
    double q = 1.0;
    ExperimentReport report;
    bool failed = false;
    std::string error;
};

// One pretrain+evaluate per grid point; the p=q=1 baseline cell is always
// included. Cells run on cfg.threads worker threads; per-cell failures are
// recorded and the sweep continues.
std::vector<SweepCell> sweep(const ExperimentConfig& cfg, const Graph& g);

void write_sweep_csv(const std::vector<SweepCell>& cells, const std::string& path);

void emit_report(const ExperimentReport& report, const std::string& path);
ExperimentReport load_report(const std::string& path);

}  // namespace sslgraph
