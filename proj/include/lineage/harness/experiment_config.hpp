#pragma once

// Flat experiment configuration shared by every CLI command. Unset numeric
// fields (zero) resolve to the per-environment published defaults; the
// fully resolved config is archived as a commented key=value file next to
// the run's outputs.

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "lineage/accum/pipelines.hpp"

namespace lineage {

inline std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

inline std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto dash = item.find("..");
        if (dash != std::string::npos) {
            const std::uint64_t lo = std::stoull(item.substr(0, dash));
            const std::uint64_t hi = std::stoull(item.substr(dash + 2));
            for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
        } else if (!item.empty()) {
            out.push_back(std::stoull(item));
        }
    }
    if (out.empty()) throw ConfigError("empty seed list");
    return out;
}

struct ExperimentConfig {
    std::string command;
    std::string env_name = "memory";
    std::string mode_name = "icl";
    std::string seed_list = "0..9";
    std::string out_dir = "out";
    std::string run_id;  // default: <command>-<env>-<mode>

    // Accumulation
    int trials = 0;                  // K; 0 -> env default
    long long train_steps = 0;       // 0 -> published default
    int generations = 5;             // G
    int population = 0;              // N_pop; 0 -> env default
    double oracle_accuracy = 0.6;
    bool selective = false;
    std::string selective_accuracies;  // comma list, one per member
    bool resets = false;
    int baseline_multiplier = 1;
    std::string sweep_accuracies = "0.2,0.4,0.6,0.8,1.0";
    int eval_episodes = 128;
    int metrics_stride = 10;

    // Network
    double width_scale = 1.0;

    // Environment overrides (0 -> default)
    int alphabet = 0;
    int sequence_length = 0;
    int city_count = 0;
    int goalseq_trial_length = 0;

    // Optimisation overrides (0 -> published default)
    double learning_rate = 0.0;
    int batch_lanes = 0;
    int rollout_length = 0;
    int update_epochs = 0;
    int minibatches = 0;
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip_eps = 0.2;
    double entropy_coef = 0.01;
    double value_coef = 0.5;
    double max_grad_norm = 0.5;
    bool gae_cut_at_trial = false;

    // Inputs for report/plot commands.
    std::string accum_metrics;
    std::string baseline_metrics;
    std::string metrics_file;
    std::string plot_name = "trial_return";
    std::string plot_out = "plot.svg";
    int report_generation = 0;           // 0 -> last generation in the file
    int report_baseline_generation = 0;  // 0 -> last generation in the file
    std::string checkpoint_dir;          // eval-icl: where train-icl wrote checkpoints

    EnvKind kind() const { return env_kind_from_string(env_name); }
    Mode mode() const { return mode_from_string(mode_name); }

    std::vector<std::uint64_t> seeds() const { return parse_seed_list(seed_list); }

    std::string resolved_run_id() const {
        return run_id.empty() ? command + "-" + env_name + "-" + mode_name : run_id;
    }

    static long long default_train_steps(EnvKind kind, Mode mode) {
        if (mode == Mode::InContext) return 8'000'000;  // meta-training budget
        switch (kind) {
            case EnvKind::MemorySeq: return 100'000;
            case EnvKind::Tsp: return 300'000;
            case EnvKind::GoalSeq: return 200'000;
        }
        return 100'000;
    }

    static int default_population(EnvKind kind, Mode mode) {
        switch (kind) {
            case EnvKind::MemorySeq: return mode == Mode::InContext ? 3 : 5;
            case EnvKind::Tsp: return mode == Mode::InContext ? 3 : 8;
            case EnvKind::GoalSeq: return 4;
        }
        return 3;
    }

    AccumConfig resolve(std::uint64_t seed) const {
        AccumConfig cfg;
        cfg.env = EnvConfig::defaults(kind(), mode());
        if (trials > 0) cfg.env.trials_per_episode = trials;
        if (alphabet > 0) cfg.env.alphabet = alphabet;
        if (sequence_length > 0) cfg.env.sequence_length = sequence_length;
        if (city_count > 0) cfg.env.city_count = city_count;
        if (goalseq_trial_length > 0) cfg.env.goalseq_trial_length = goalseq_trial_length;

        cfg.hyper = Hyperparams::defaults_for(kind());
        if (learning_rate > 0.0) cfg.hyper.learning_rate = learning_rate;
        if (batch_lanes > 0) cfg.hyper.batch_lanes = batch_lanes;
        if (rollout_length > 0) cfg.hyper.rollout_length = rollout_length;
        if (update_epochs > 0) cfg.hyper.update_epochs = update_epochs;
        if (minibatches > 0) cfg.hyper.minibatches = minibatches;
        cfg.hyper.gamma = gamma;
        cfg.hyper.gae_lambda = gae_lambda;
        cfg.hyper.clip_eps = clip_eps;
        cfg.hyper.entropy_coef = entropy_coef;
        cfg.hyper.value_coef = value_coef;
        cfg.hyper.max_grad_norm = max_grad_norm;
        cfg.hyper.gae_cut_at_trial = gae_cut_at_trial;

        cfg.net_width_scale = width_scale;
        cfg.train_steps = train_steps > 0 ? train_steps : default_train_steps(kind(), mode());
        cfg.generations = generations;
        cfg.population = population > 0 ? population : default_population(kind(), mode());
        cfg.oracle_accuracy = oracle_accuracy;
        cfg.selective = selective;
        if (!selective_accuracies.empty())
            cfg.selective_accuracies = parse_double_list(selective_accuracies);
        cfg.resets = resets;
        cfg.seed = seed;
        cfg.eval_episodes = eval_episodes;
        cfg.metrics_stride = metrics_stride;
        return cfg;
    }

    std::string to_ini() const {
        std::ostringstream out;
        out.precision(17);
        out << "# archived run configuration (fully resolved values)\n";
        out << "command = " << command << "\n";
        out << "env = " << env_name << "\n";
        out << "mode = " << mode_name << "\n";
        out << "seed-list = " << seed_list << "\n";
        out << "out = " << out_dir << "\n";
        out << "run-id = " << resolved_run_id() << "\n";
        const AccumConfig r = resolve(seeds().front());
        out << "\n# task\n";
        out << "trials = " << r.env.trials_per_episode << "\n";
        out << "alphabet = " << r.env.alphabet << "\n";
        out << "sequence-length = " << r.env.sequence_length << "\n";
        out << "city-count = " << r.env.city_count << "\n";
        out << "goalseq-trial-length = " << r.env.goalseq_trial_length << "\n";
        out << "\n# accumulation\n";
        out << "train-steps = " << r.train_steps << "\n";
        out << "generations = " << r.generations << "\n";
        out << "population = " << r.population << "\n";
        out << "oracle-accuracy = " << r.oracle_accuracy << "\n";
        out << "selective = " << (r.selective ? "true" : "false") << "\n";
        out << "resets = " << (r.resets ? "true" : "false") << "\n";
        out << "baseline-multiplier = " << baseline_multiplier << "\n";
        out << "sweep-accuracies = " << sweep_accuracies << "\n";
        out << "eval-episodes = " << r.eval_episodes << "\n";
        out << "\n# network\n";
        out << "width-scale = " << width_scale << "\n";
        out << "\n# optimisation\n";
        out << "learning-rate = " << r.hyper.learning_rate << "\n";
        out << "batch = " << r.hyper.batch_lanes << "\n";
        out << "rollout-length = " << r.hyper.rollout_length << "\n";
        out << "update-epochs = " << r.hyper.update_epochs << "\n";
        out << "minibatches = " << r.hyper.minibatches << "\n";
        out << "gamma = " << r.hyper.gamma << "\n";
        out << "gae-lambda = " << r.hyper.gae_lambda << "\n";
        out << "clip-eps = " << r.hyper.clip_eps << "\n";
        out << "entropy-coef = " << r.hyper.entropy_coef << "\n";
        out << "value-coef = " << r.hyper.value_coef << "\n";
        out << "max-grad-norm = " << r.hyper.max_grad_norm << "\n";
        out << "anneal-lr = false\n";
        out << "gae-cut-at-trial = " << (gae_cut_at_trial ? "true" : "false") << "\n";
        return out.str();
    }
};

}  // namespace lineage
