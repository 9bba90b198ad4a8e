// Command-line front end: training, generational evaluation, baselines,
// oracle sweeps, reports, plots and the selftest suite.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical abort.
// LINEAGE_THREADS caps the worker pool (default: hardware concurrency).

#include <CLI11.hpp>

#include <iostream>

#include "lineage/harness/commands.hpp"

using namespace lineage;

namespace {

void add_common_options(CLI::App* sub, ExperimentConfig& cfg) {
    sub->set_config("--config", "", "read options from a key=value file");
    sub->allow_config_extras(CLI::config_extras_mode::ignore);
    sub->add_option("--env", cfg.env_name, "task family")
        ->check(CLI::IsMember({"memory", "goalseq", "tsp"}));
    sub->add_option("--mode", cfg.mode_name, "icl (episodic) or iwl (train-time)")
        ->check(CLI::IsMember({"icl", "iwl"}));
    sub->add_option("--seed-list", cfg.seed_list, "comma list, ranges as a..b (default 0..9)");
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--run-id", cfg.run_id, "run directory name (default <command>-<env>-<mode>)");

    sub->add_option("--trials", cfg.trials, "trials per episode (K)");
    sub->add_option("--train-steps", cfg.train_steps, "env steps per training");
    sub->add_option("--generations", cfg.generations, "generations (G)");
    sub->add_option("--population", cfg.population, "members per generation (N_pop)");
    sub->add_option("--oracle-accuracy", cfg.oracle_accuracy, "1 - oracle noise");
    sub->add_flag("--selective", cfg.selective, "observe the entire previous generation");
    sub->add_option("--selective-accuracies", cfg.selective_accuracies,
                    "training oracle panel accuracies (comma list)");
    sub->add_flag("--resets", cfg.resets, "re-init final head layers from generation 3 on");
    sub->add_option("--baseline-multiplier", cfg.baseline_multiplier,
                    "lifetime budget multiple for baselines");
    sub->add_option("--sweep-accuracies", cfg.sweep_accuracies, "accuracies for sweep-oracle");
    sub->add_option("--eval-episodes", cfg.eval_episodes, "frozen-policy evaluation batch");
    sub->add_option("--metrics-stride", cfg.metrics_stride, "updates between training records");

    sub->add_option("--width-scale", cfg.width_scale, "scale on every hidden width");
    sub->add_option("--alphabet", cfg.alphabet, "memory: digit count");
    sub->add_option("--sequence-length", cfg.sequence_length, "memory: sequence length");
    sub->add_option("--city-count", cfg.city_count, "tsp: city count");
    sub->add_option("--goalseq-trial-length", cfg.goalseq_trial_length, "goalseq: steps per trial");

    sub->add_option("--learning-rate", cfg.learning_rate);
    sub->add_option("--batch", cfg.batch_lanes, "parallel environments");
    sub->add_option("--rollout-length", cfg.rollout_length);
    sub->add_option("--update-epochs", cfg.update_epochs);
    sub->add_option("--minibatches", cfg.minibatches);
    sub->add_option("--gamma", cfg.gamma);
    sub->add_option("--gae-lambda", cfg.gae_lambda);
    sub->add_option("--clip-eps", cfg.clip_eps);
    sub->add_option("--entropy-coef", cfg.entropy_coef);
    sub->add_option("--value-coef", cfg.value_coef);
    sub->add_option("--max-grad-norm", cfg.max_grad_norm);
    sub->add_flag("--gae-cut-at-trial", cfg.gae_cut_at_trial, "cut GAE at trial boundaries too");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"generational social-learning RL: training, accumulation, baselines"};
    app.require_subcommand(1);
    ExperimentConfig cfg;
    int rc = 0;

    const auto dispatch = [&](const std::string& name, int (*fn)(const ExperimentConfig&),
                              const std::string& desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        add_common_options(sub, cfg);
        if (name == "eval-icl")
            sub->add_option("--checkpoint-dir", cfg.checkpoint_dir,
                            "where train-icl stored seed<N>/policy.ckpt");
        if (name == "report") {
            sub->add_option("--accum", cfg.accum_metrics, "accumulation metrics.jsonl")->required();
            sub->add_option("--baseline", cfg.baseline_metrics, "baseline metrics.jsonl")->required();
            sub->add_option("--generation", cfg.report_generation, "accumulation generation (default last)");
            sub->add_option("--baseline-generation", cfg.report_baseline_generation,
                            "baseline generation (default last)");
        }
        if (name == "plot") {
            sub->add_option("--metrics", cfg.metrics_file, "metrics.jsonl to plot")->required();
            sub->add_option("--name", cfg.plot_name, "metric name (default trial_return)");
            sub->add_option("--plot-out", cfg.plot_out, "output .svg path");
        }
        sub->callback([&cfg, name, fn, &rc] {
            cfg.command = name;
            rc = fn(cfg);
        });
    };

    dispatch("train-icl", &cmd_train_icl, "meta-train with noisy oracles (episodic setting)");
    dispatch("eval-icl", &cmd_eval_icl, "generational in-context evaluation of a trained policy");
    dispatch("train-iwl", &cmd_train_iwl, "train-time generational accumulation");
    dispatch("baseline", &cmd_baseline, "single-lifetime baseline at a budget multiple");
    dispatch("sweep-oracle", &cmd_sweep_oracle, "train/evaluate across oracle accuracies");
    dispatch("report", &cmd_report, "success report: accumulation vs matched baseline");
    dispatch("plot", &cmd_plot, "render a metric from a metrics file to SVG");
    dispatch("selftest", &cmd_selftest, "run the invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
