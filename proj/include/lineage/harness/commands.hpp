#pragma once

// CLI command bodies. Each command runs its seeds in a worker pool (one
// deterministic unit per seed), merges the per-seed metrics in seed order
// and writes every final artifact atomically, so re-running a command with
// an identical config reproduces the metrics file bit for bit (wall-clock
// fields aside).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "lineage/accum/success.hpp"
#include "lineage/harness/experiment_config.hpp"
#include "lineage/harness/metrics.hpp"
#include "lineage/harness/parallel.hpp"
#include "lineage/harness/plot.hpp"
#include "lineage/harness/selftest.hpp"

namespace lineage {

namespace fs = std::filesystem;

inline std::string run_dir(const ExperimentConfig& cfg) {
    return cfg.out_dir + "/" + cfg.resolved_run_id();
}

inline void archive_config(const ExperimentConfig& cfg) {
    fs::create_directories(run_dir(cfg));
    std::ofstream out(run_dir(cfg) + "/config.ini", std::ios::trunc);
    out << cfg.to_ini();
}

inline std::string seed_dir(const ExperimentConfig& cfg, std::uint64_t seed) {
    return run_dir(cfg) + "/seed" + std::to_string(seed);
}

inline std::string checkpoint_path(const std::string& dir, std::uint64_t seed) {
    return dir + "/seed" + std::to_string(seed) + "/policy.ckpt";
}

// Runs fn(seed, sink) for every seed in a pool and merges metrics in seed
// order into <run dir>/metrics.jsonl.
template <typename Fn>
void for_each_seed(const ExperimentConfig& cfg, Fn&& fn) {
    archive_config(cfg);
    const std::vector<std::uint64_t> seeds = cfg.seeds();
    std::vector<MetricsSink> sinks;
    sinks.reserve(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) sinks.emplace_back(cfg.resolved_run_id());
    parallel_for(static_cast<int>(seeds.size()), [&](int i) {
        fn(seeds[static_cast<std::size_t>(i)], sinks[static_cast<std::size_t>(i)]);
    });
    MetricsSink merged(cfg.resolved_run_id());
    for (const MetricsSink& s : sinks) merged.absorb(s);
    write_metrics(merged.records(), run_dir(cfg) + "/metrics.jsonl");
}

inline int cmd_train_icl(const ExperimentConfig& cfg) {
    for_each_seed(cfg, [&](std::uint64_t seed, MetricsSink& sink) {
        const AccumConfig acc = cfg.resolve(seed);
        const TrainedPolicy policy = train_in_context(acc, &sink);
        fs::create_directories(seed_dir(cfg, seed));
        save_checkpoint(policy.params, seed_dir(cfg, seed) + "/policy.ckpt");
    });
    std::cout << "wrote " << run_dir(cfg) << "/metrics.jsonl\n";
    return 0;
}

inline int cmd_eval_icl(const ExperimentConfig& cfg) {
    const std::string ckpt_root =
        cfg.checkpoint_dir.empty() ? cfg.out_dir + "/train-icl-" + cfg.env_name + "-" + cfg.mode_name
                                   : cfg.checkpoint_dir;
    for_each_seed(cfg, [&](std::uint64_t seed, MetricsSink& sink) {
        const AccumConfig acc = cfg.resolve(seed);
        TrainedPolicy policy;
        const std::string path = checkpoint_path(ckpt_root, seed);
        if (fs::exists(path)) {
            policy.env = acc.effective_env();
            policy.net_cfg = NetConfig::for_env(policy.env, obs_layout(policy.env), acc.net_width_scale);
            policy.params = load_checkpoint(path);
        } else {
            policy = train_in_context(acc, &sink);
            fs::create_directories(seed_dir(cfg, seed));
            save_checkpoint(policy.params, seed_dir(cfg, seed) + "/policy.ckpt");
        }
        evaluate_accumulation(policy, acc, &sink);
    });
    const auto records = read_metrics(run_dir(cfg) + "/metrics.jsonl");
    emit_plot(records, "trial_return", "return per trial, per generation",
              run_dir(cfg) + "/trial_returns.svg");
    std::cout << "wrote " << run_dir(cfg) << "/metrics.jsonl and trial_returns.svg\n";
    return 0;
}

inline int cmd_train_iwl(const ExperimentConfig& cfg) {
    for_each_seed(cfg, [&](std::uint64_t seed, MetricsSink& sink) {
        const AccumConfig acc = cfg.resolve(seed);
        const auto records = train_in_weights(acc, &sink);
        fs::create_directories(seed_dir(cfg, seed));
        const auto& last = records.back();
        save_checkpoint(last.members[static_cast<std::size_t>(last.best_index)].params,
                        seed_dir(cfg, seed) + "/best.ckpt");
    });
    const auto records = read_metrics(run_dir(cfg) + "/metrics.jsonl");
    emit_plot(records, "final_eval_return", "final evaluation return per generation",
              run_dir(cfg) + "/final_eval_returns.svg");
    std::cout << "wrote " << run_dir(cfg) << "/metrics.jsonl and final_eval_returns.svg\n";
    return 0;
}

inline int cmd_baseline(const ExperimentConfig& cfg) {
    const int multiplier = cfg.baseline_multiplier;
    if (multiplier < 1) throw ConfigError("baseline multiplier must be at least 1");
    for_each_seed(cfg, [&](std::uint64_t seed, MetricsSink& sink) {
        const AccumConfig acc = cfg.resolve(seed);
        if (cfg.mode() == Mode::InContext) {
            TrainedPolicy policy;
            run_baseline_in_context(acc, multiplier, &sink, &policy);
            fs::create_directories(seed_dir(cfg, seed));
            save_checkpoint(policy.params, seed_dir(cfg, seed) + "/policy.ckpt");
        } else {
            run_baseline_in_weights(acc, multiplier, &sink);
        }
    });
    std::cout << "wrote " << run_dir(cfg) << "/metrics.jsonl\n";
    return 0;
}

inline int cmd_sweep_oracle(const ExperimentConfig& cfg) {
    const std::vector<double> accuracies = parse_double_list(cfg.sweep_accuracies);
    if (accuracies.empty()) throw ConfigError("empty oracle accuracy sweep");
    archive_config(cfg);
    const std::vector<std::uint64_t> seeds = cfg.seeds();
    const int units = static_cast<int>(accuracies.size() * seeds.size());
    std::vector<MetricsSink> sinks;
    sinks.reserve(static_cast<std::size_t>(units));
    for (int i = 0; i < units; ++i) sinks.emplace_back(cfg.resolved_run_id());
    parallel_for(units, [&](int unit) {
        const std::size_t ai = static_cast<std::size_t>(unit) / seeds.size();
        const std::size_t si = static_cast<std::size_t>(unit) % seeds.size();
        ExperimentConfig swept = cfg;
        swept.oracle_accuracy = accuracies[ai];
        const AccumConfig acc = swept.resolve(seeds[si]);
        MetricsSink& sink = sinks[static_cast<std::size_t>(unit)];
        const TrainedPolicy policy = train_in_context(acc, nullptr);
        const auto records = evaluate_accumulation(policy, acc, nullptr);
        const auto& last = records.back();
        double mean_final = 0.0;
        for (const auto& m : last.members) mean_final += m.final_metric;
        mean_final /= static_cast<double>(last.members.size());
        sink.push(seeds[si], static_cast<int>(ai), std::lround(accuracies[ai] * 1000.0), 0,
                  "sweep_final_score", mean_final);
    });
    MetricsSink merged(cfg.resolved_run_id());
    for (const MetricsSink& s : sinks) merged.absorb(s);
    write_metrics(merged.records(), run_dir(cfg) + "/metrics.jsonl");
    // Seed-mean summary per accuracy.
    for (std::size_t ai = 0; ai < accuracies.size(); ++ai) {
        double mean = 0.0;
        int n = 0;
        for (const auto& r : merged.records())
            if (r.name == "sweep_final_score" && r.generation == static_cast<int>(ai)) {
                mean += r.value;
                ++n;
            }
        std::cout << "oracle accuracy " << accuracies[ai] << ": mean final score "
                  << (n > 0 ? mean / n : 0.0) << " over " << n << " seeds\n";
    }
    std::cout << "wrote " << run_dir(cfg) << "/metrics.jsonl\n";
    return 0;
}

// Per-seed score extraction for the report command: mean over members of
// the final-trial return (episodic) or the best member's evaluation return
// (train-time) at one generation.
inline std::map<std::uint64_t, double> extract_scores(const std::vector<MetricsRecord>& records,
                                                      Mode mode, int generation) {
    int target = generation;
    if (target == 0)
        for (const auto& r : records) target = std::max(target, r.generation);
    std::map<std::uint64_t, double> sums;
    std::map<std::uint64_t, int> counts;
    const std::string name = mode == Mode::InContext ? "final_trial_return" : "best_final_return";
    for (const auto& r : records) {
        if (r.name != name || r.generation != target) continue;
        sums[r.seed] += r.value;
        counts[r.seed] += 1;
    }
    if (sums.empty()) throw ConfigError("no '" + name + "' records at generation " + std::to_string(target));
    std::map<std::uint64_t, double> out;
    for (const auto& [seed, sum] : sums) out[seed] = sum / counts[seed];
    return out;
}

inline int cmd_report(const ExperimentConfig& cfg) {
    if (cfg.accum_metrics.empty() || cfg.baseline_metrics.empty())
        throw ConfigError("report needs --accum and --baseline metrics files");
    const auto accum = read_metrics(cfg.accum_metrics);
    const auto baseline = read_metrics(cfg.baseline_metrics);
    const Mode mode = cfg.mode();
    const auto accum_scores = extract_scores(accum, mode, cfg.report_generation);
    const auto baseline_scores = extract_scores(baseline, mode, cfg.report_baseline_generation);
    const SuccessReport report = success_measure(accum_scores, baseline_scores);
    std::cout << report.to_string();
    return 0;
}

inline int cmd_plot(const ExperimentConfig& cfg) {
    if (cfg.metrics_file.empty()) throw ConfigError("plot needs --metrics");
    const auto records = read_metrics(cfg.metrics_file);
    emit_plot(records, cfg.plot_name, cfg.plot_name, cfg.plot_out);
    std::cout << "wrote " << cfg.plot_out << "\n";
    return 0;
}

inline int cmd_selftest(const ExperimentConfig&) {
    return run_selftest(std::cout) ? 0 : 1;
}

}  // namespace lineage
