#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sslgraph/bench.hpp"
#include "sslgraph/experiment.hpp"
#include "sslgraph/nystrom.hpp"
#include "sslgraph/samplers.hpp"

namespace fs = std::filesystem;
using namespace sslgraph;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string precision;
    std::size_t threads = 0;
};

ExperimentConfig make_config(const CommonOpts& opts) {
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) cfg = parse_config_file(opts.config_path);
    if (opts.seed_set) cfg.seed = opts.seed;
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (!opts.precision.empty()) cfg.precision = opts.precision;
    if (opts.threads > 0) cfg.threads = opts.threads;
    cfg.validate();
    fs::create_directories(cfg.out_dir);
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "config file path");
    cmd->add_option("--seed", opts.seed, "RNG seed (overrides config)")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--precision", opts.precision, "f32 or f64")
        ->check(CLI::IsMember({"f32", "f64"}));
    cmd->add_option("--threads", opts.threads, "worker threads for sweeps");
}

int cmd_pretrain(const CommonOpts& opts) {
    const ExperimentConfig cfg = make_config(opts);
    const Graph g = load_dataset(cfg);
    std::cout << "dataset: N=" << g.num_nodes() << " E=" << g.num_edges()
              << " F=" << g.feature_dim() << "\n";
    const PretrainResult result = run_experiment(cfg, g);
    const std::string report_path = cfg.out_dir + "/report.json";
    emit_report(result.report, report_path);
    save_checkpoint(result.params, cfg.out_dir + "/checkpoint.bin");
    if (result.report.aborted) {
        std::cerr << "aborted: " << result.report.abort_reason << "\n";
        return 1;
    }
    std::cout << "epochs run: " << result.report.epochs.size()
              << ", final loss: " << result.report.epochs.back().breakdown.total << "\n";
    if (result.report.probe_valid)
        std::cout << "probe accuracy: " << result.report.probe.accuracy_mean << " +/- "
                  << result.report.probe.accuracy_std << "\n";
    std::cout << "report: " << report_path << "\n";
    return 0;
}

int cmd_sweep(const CommonOpts& opts) {
    const ExperimentConfig cfg = make_config(opts);
    const Graph g = load_dataset(cfg);
    const auto cells = sweep(cfg, g);
    const std::string csv_path = cfg.out_dir + "/sweep.csv";
    write_sweep_csv(cells, csv_path);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        emit_report(c.report, cfg.out_dir + "/report_cell" + std::to_string(i) + ".json");
        std::cout << to_string(c.mode) << " p=" << c.p << " q=" << c.q << ": "
                  << (c.failed ? "FAILED " + c.error
                               : c.report.probe_valid
                                     ? "acc " + std::to_string(c.report.probe.accuracy_mean)
                                     : "done")
                  << "\n";
    }
    std::cout << "sweep table: " << csv_path << "\n";
    return 0;
}

int cmd_bench(const CommonOpts& opts, std::vector<std::size_t> n_list,
              std::vector<std::size_t> d_list, std::size_t reps) {
    const ExperimentConfig cfg = make_config(opts);
    const ScalingTable table =
        bench_loss_scaling(n_list, d_list, reps, cfg.precision == "f32", cfg.seed);
    const std::string csv_path = cfg.out_dir + "/scaling.csv";
    write_scaling_csv(table, csv_path);
    for (const auto& c : table.cells)
        std::printf("N=%-8zu d=%-6zu median %.3f ms (%zu reps, cov buffer %zu entries)\n", c.n,
                    c.d, c.median_ms, c.reps, c.cov_buffer_entries);
    std::cout << "scaling table: " << csv_path << "\n";
    return 0;
}

int cmd_ricci(const CommonOpts& opts) {
    const ExperimentConfig cfg = make_config(opts);
    const Graph g = load_dataset(cfg);
    const RicciScores scores = ricci_scores(g);
    const std::string csv_path = cfg.out_dir + "/ricci.csv";
    write_ricci_csv(scores, csv_path);
    std::cout << "curvature for " << scores.edges.size() << " edges written to " << csv_path
              << "\n";
    return 0;
}

int cmd_verify(const CommonOpts& opts) {
    const ExperimentConfig cfg = make_config(opts);
    int failures = 0;
    auto check = [&](const std::string& name, bool ok) {
        std::cout << (ok ? "PASS  " : "FAIL  ") << name << "\n";
        if (!ok) ++failures;
    };

    // Nystrom exactness on a constructed rank-deficient instance.
    {
        Rng rng(cfg.seed + 1);
        const std::size_t n = 64, d = 16, m = 8;
        DenseMatrix basis(n, m);
        for (std::size_t i = 0; i < basis.size(); ++i) basis.data()[i] = rng.normal();
        DenseMatrix mix(m, d);
        for (std::size_t i = 0; i < mix.size(); ++i) mix.data()[i] = rng.normal();
        DenseMatrix z = matmul(basis, mix);  // rank <= m
        DenseMatrix cov = covariance_matrix(z);
        std::vector<std::uint32_t> landmarks(m);
        for (std::size_t i = 0; i < m; ++i) landmarks[i] = static_cast<std::uint32_t>(i);
        const CovBlocks blocks = split_blocks(cov, landmarks);
        const DenseMatrix approx = nystrom_reconstruct(blocks);
        DenseMatrix err = approx;
        err -= blocks.c_exact;
        const double rel = frobenius_norm(err) / frobenius_norm(blocks.c_exact);
        check("nystrom exactness (rank <= M), rel err < 1e-8 [" + std::to_string(rel) + "]",
              rel < 1e-8);
    }

    // Cov^2 = 2 Cov for A = I, B orthonormal.
    {
        const double c = std::cos(0.7), s = std::sin(0.7);
        DenseMatrix b(2, 2);
        b(0, 0) = c; b(0, 1) = -s; b(1, 0) = s; b(1, 1) = c;
        const FixedPointReport report = check_cov_fixed_point(DenseMatrix::identity(2), b, 1e-12);
        check("cov fixed point residual < 1e-12 [" + std::to_string(report.residual) + "]",
              report.passed);
    }

    // Rotating-partition whitening trend.
    {
        Rng rng(cfg.seed + 2);
        // correlated columns rescaled to unit variance
        DenseMatrix base(64, 8), mix(8, 8);
        for (std::size_t i = 0; i < base.size(); ++i) base.data()[i] = rng.normal();
        for (std::size_t i = 0; i < mix.size(); ++i) mix.data()[i] = rng.normal();
        DenseMatrix z0 = matmul(base, mix);
        for (std::size_t j = 0; j < 8; ++j) {
            double mean = 0.0, var = 0.0;
            for (std::size_t i = 0; i < 64; ++i) mean += z0(i, j);
            mean /= 64.0;
            for (std::size_t i = 0; i < 64; ++i) var += (z0(i, j) - mean) * (z0(i, j) - mean);
            var /= 63.0;
            for (std::size_t i = 0; i < 64; ++i) z0(i, j) = (z0(i, j) - mean) / std::sqrt(var);
        }
        const WhitenTrajectory traj = rotating_whiten_experiment(z0, 4, 3000, 0.3);
        write_trajectory_csv(traj, cfg.out_dir + "/trajectory.csv");
        bool whiteness_ok = !traj.diverged;
        for (double w : traj.final_split_whiteness) whiteness_ok = whiteness_ok && w < 0.1;
        check("rotating partition: off-diag energy decreased",
              traj.final_offdiag_energy < traj.initial_offdiag_energy);
        check("rotating partition: per-split whiteness < 0.1", whiteness_ok);
    }

    std::cout << (failures == 0 ? "verify: all checks passed" : "verify: FAILURES") << "\n";
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph VICReg pre-training with node/dimension-sampled losses"};
    app.require_subcommand(1);

    CommonOpts pretrain_opts, sweep_opts, bench_opts, ricci_opts, verify_opts;
    auto* pretrain_cmd = app.add_subcommand("pretrain", "run one pre-training experiment");
    add_common(pretrain_cmd, pretrain_opts);
    auto* sweep_cmd = app.add_subcommand("sweep", "ratio-grid sweep of pretrain+evaluate");
    add_common(sweep_cmd, sweep_opts);
    auto* bench_cmd = app.add_subcommand("bench", "covariance-loss scaling benchmark");
    add_common(bench_cmd, bench_opts);
    std::vector<std::size_t> n_list = {10000, 20000};
    std::vector<std::size_t> d_list = {64, 128, 256, 512};
    std::size_t reps = 20;
    bench_cmd->add_option("--n-list", n_list, "row counts to benchmark");
    bench_cmd->add_option("--d-list", d_list, "dimension counts to benchmark");
    bench_cmd->add_option("--reps", reps, "timing repetitions per cell");
    auto* ricci_cmd = app.add_subcommand("ricci", "dump Forman curvature CSV for the dataset");
    add_common(ricci_cmd, ricci_opts);
    auto* verify_cmd = app.add_subcommand("verify", "run the covariance-algebra verification suite");
    add_common(verify_cmd, verify_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (pretrain_cmd->parsed()) return cmd_pretrain(pretrain_opts);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts);
        if (bench_cmd->parsed()) return cmd_bench(bench_opts, n_list, d_list, reps);
        if (ricci_cmd->parsed()) return cmd_ricci(ricci_opts);
        if (verify_cmd->parsed()) return cmd_verify(verify_opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
