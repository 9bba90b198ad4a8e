#pragma once

// The generational pipelines:
//   - meta-training with noisy scripted oracles (episodic accumulation
//     happens later, at evaluation time),
//   - generational evaluation where frozen weights accumulate through
//     hidden-state reset states,
//   - train-time generations where each member trains fresh weights while
//     observing the previous best,
//   - single-lifetime baselines with multiplied budgets,
// all emitting one shared metrics schema.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lineage/accum/generation.hpp"
#include "lineage/harness/metrics.hpp"
#include "lineage/net/gru_net.hpp"
#include "lineage/rl/ppo.hpp"
#include "lineage/rl/rollout.hpp"

namespace lineage {

// Stream salts separating the phases that share one run seed.
inline constexpr std::uint64_t kSaltTrain = 0x5EED0001ULL;
inline constexpr std::uint64_t kSaltEval = 0x5EED0002ULL;
inline constexpr std::uint64_t kSaltBaseline = 0x5EED0003ULL;
inline constexpr std::uint64_t kSaltContent = 0x5EED0004ULL;

inline std::uint64_t member_salt(std::uint64_t base, int generation, int member) {
    return base ^ (static_cast<std::uint64_t>(generation) << 24) ^
           (static_cast<std::uint64_t>(member) << 8);
}

struct AccumConfig {
    EnvConfig env;
    Hyperparams hyper;
    double net_width_scale = 1.0;
    std::int64_t train_steps = 0;  // meta-training budget, or per-member budget per generation
    int generations = 5;           // G
    int population = 3;            // N_pop
    double oracle_accuracy = 0.6;
    bool selective = false;
    std::vector<double> selective_accuracies;  // training oracle panel (episodic, selective)
    bool resets = false;
    std::uint64_t seed = 0;
    int eval_episodes = 128;  // frozen-policy evaluation batch (train-time generations)
    int metrics_stride = 10;  // updates between training metric records

    int panel() const { return selective ? population : 1; }

    EnvConfig effective_env() const {
        EnvConfig e = env;
        e.demo_slots = panel();
        return e;
    }

    void validate() const {
        if (generations < 1 || population < 1) throw ConfigError("G and N_pop must be at least 1");
        if (train_steps <= 0) throw ConfigError("train_steps must be positive");
        if (oracle_accuracy < 0.0 || oracle_accuracy > 1.0)
            throw ConfigError("oracle accuracy must lie in [0, 1]");
        hyper.validate();
    }
};

// Oracle noise per demonstrator slot. A selective panel covers a spread of
// accuracies, ordered best-first to match the evaluation-time panel order.
inline std::vector<double> oracle_epsilons(const AccumConfig& cfg) {
    if (!cfg.selective) return {1.0 - cfg.oracle_accuracy};
    std::vector<double> acc = cfg.selective_accuracies;
    if (acc.empty()) {
        const int n = cfg.population;
        const double hi = std::min(0.9, cfg.oracle_accuracy + 0.2);
        const double lo = std::max(0.1, cfg.oracle_accuracy - 0.2);
        for (int i = 0; i < n; ++i)
            acc.push_back(n == 1 ? cfg.oracle_accuracy : hi - (hi - lo) * i / (n - 1));
    }
    if (static_cast<int>(acc.size()) != cfg.population)
        throw ConfigError("selective oracle accuracy list must have one entry per member");
    std::stable_sort(acc.begin(), acc.end(), std::greater<>());
    std::vector<double> eps;
    for (double a : acc) eps.push_back(1.0 - a);
    return eps;
}

struct TrainedPolicy {
    EnvConfig env;
    NetConfig net_cfg;
    ParamSet params;
    std::int64_t steps = 0;
};

// PPO training driver shared by every pipeline. Continues wherever the
// runner left off, so consecutive calls extend a lifetime.
inline void run_ppo_training(GruNet& net, RolloutRunner& runner, PpoUpdater& updater,
                             std::int64_t total_steps, RngStream& shuffle_rng, MetricsSink* sink,
                             std::uint64_t seed, int generation, int member, int metrics_stride) {
    TrajectoryBuffer buf;
    const Hyperparams& h = updater.hyper();
    const std::int64_t per_update =
        static_cast<std::int64_t>(h.batch_lanes) * h.rollout_length;
    const std::int64_t updates = std::max<std::int64_t>(1, total_steps / per_update);
    double window_return = 0.0, window_final = 0.0;
    std::int64_t window_episodes = 0;
    for (std::int64_t u = 0; u < updates; ++u) {
        runner.collect(buf, h.rollout_length);
        const UpdateStats stats = updater.update(net, buf, shuffle_rng);
        for (const FinishedEpisode& ep : runner.take_finished()) {
            window_return += ep.episode_return;
            window_final += ep.final_trial_return;
            ++window_episodes;
        }
        if (sink != nullptr && ((u + 1) % metrics_stride == 0 || u + 1 == updates)) {
            const std::int64_t step = runner.steps_collected();
            if (window_episodes > 0) {
                sink->push(seed, generation, step, member, "episode_return",
                           window_return / static_cast<double>(window_episodes));
                sink->push(seed, generation, step, member, "final_trial_return",
                           window_final / static_cast<double>(window_episodes));
                window_return = window_final = 0.0;
                window_episodes = 0;
            }
            sink->push(seed, generation, step, member, "loss_total", stats.total_loss);
            sink->push(seed, generation, step, member, "loss_policy", stats.policy_loss);
            sink->push(seed, generation, step, member, "loss_value", stats.value_loss);
            sink->push(seed, generation, step, member, "entropy", stats.entropy);
            sink->push(seed, generation, step, member, "clip_fraction", stats.clip_fraction);
            sink->push(seed, generation, step, member, "grad_norm", stats.grad_norm);
        }
    }
}

// Meta-training (episodic setting). With an oracle this is the full social
// learning loop; without one it is the plain recurrent-PPO baseline.
inline TrainedPolicy train_meta_policy(const AccumConfig& cfg, bool with_oracle,
                                       std::uint64_t salt, MetricsSink* sink) {
    cfg.validate();
    if (cfg.env.mode != Mode::InContext)
        throw ConfigError("meta-training expects the episodic setting");
    if (cfg.env.trials_per_episode < 2)
        throw ConfigError("episodic training needs at least 2 trials per episode");
    const EnvConfig env = cfg.effective_env();
    const ObsLayout layout = obs_layout(env);
    const NetConfig net_cfg = NetConfig::for_env(env, layout, cfg.net_width_scale);
    RngStream init_rng(cfg.seed, stream_id(StreamPurpose::ParamInit, salt, 0));
    GruNet net = GruNet::fresh(net_cfg, init_rng);
    PpoUpdater updater(net_cfg, cfg.hyper);

    RolloutRunner::Options opt;
    opt.env = env;
    opt.lanes = cfg.hyper.batch_lanes;
    opt.seed = cfg.seed;
    opt.salt = salt;
    if (with_oracle) {
        opt.demo = RolloutRunner::DemoKind::ScriptedOracle;
        opt.schedule = RolloutRunner::Schedule::Episodic;
        opt.oracle_epsilon = oracle_epsilons(cfg);
    }
    RolloutRunner runner(net, opt);
    RngStream shuffle(cfg.seed, stream_id(StreamPurpose::MinibatchShuffle, salt, 0));
    run_ppo_training(net, runner, updater, cfg.train_steps, shuffle, sink, cfg.seed, 0, 0,
                     cfg.metrics_stride);
    return {env, net_cfg, net.params(), runner.steps_collected()};
}

inline TrainedPolicy train_in_context(const AccumConfig& cfg, MetricsSink* sink) {
    return train_meta_policy(cfg, /*with_oracle=*/true, kSaltTrain, sink);
}

// Generational evaluation with frozen weights. One held-out instance per
// run seed; generation 1 adapts without any demonstrator, each later
// generation watches the previous one's best member replay its final trial
// from its stored reset state.
inline std::vector<GenerationRecord> evaluate_accumulation(const TrainedPolicy& policy,
                                                           const AccumConfig& cfg,
                                                           MetricsSink* sink) {
    cfg.validate();
    const EnvConfig env = cfg.effective_env();
    GruNet net(policy.net_cfg, policy.params);
    InstanceKey held_out{env.kind, env.mode, cfg.seed, stream_id(StreamPurpose::EvalInstance, 0, 0)};
    const std::uint64_t layout_stream = stream_id(StreamPurpose::EvalInstance, 1, 0);

    std::vector<GenerationRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.generations));
    Mat panel_states;
    for (int m = 1; m <= cfg.generations; ++m) {
        GenerationRecord rec;
        rec.generation = m;
        std::vector<double> finals;
        for (int n = 0; n < cfg.population; ++n) {
            RolloutRunner::Options opt;
            opt.env = env;
            opt.lanes = 1;
            opt.single_episode = true;
            opt.seed = cfg.seed;
            opt.salt = member_salt(kSaltEval, m, n);
            opt.pin_content = true;
            opt.content_key = held_out;
            opt.pin_layout = true;
            opt.layout_stream = layout_stream;
            if (m > 1) {
                opt.demo = RolloutRunner::DemoKind::ReplayState;
                opt.schedule = RolloutRunner::Schedule::Episodic;
                opt.replay_states = panel_states;
            }
            RolloutRunner runner(net, opt);
            const EpisodeResult res = runner.run_episode();
            if (res.final_trial_visible_steps != 0)
                throw ContractViolation("demonstrator visible in a final trial");
            MemberOutcome outcome;
            outcome.trial_returns = res.trial_returns;
            outcome.final_metric = res.final_trial_return;
            outcome.reset_state = res.reset_state;
            finals.push_back(outcome.final_metric);
            if (sink != nullptr) {
                for (std::size_t k = 0; k < res.trial_returns.size(); ++k)
                    sink->push(cfg.seed, m, static_cast<std::int64_t>(k), n, "trial_return",
                               res.trial_returns[k]);
                sink->push(cfg.seed, m, env.trials_per_episode - 1, n, "final_trial_return",
                           res.final_trial_return);
            }
            rec.members.push_back(std::move(outcome));
        }
        rec.best_index = select_best(finals);
        if (sink != nullptr) {
            sink->push(cfg.seed, m, 0, rec.best_index, "best_member",
                       static_cast<double>(rec.best_index));
            sink->push(cfg.seed, m, 0, rec.best_index, "best_final_return",
                       finals[static_cast<std::size_t>(rec.best_index)]);
        }
        const int hidden = net.hidden_width();
        if (cfg.selective) {
            const std::vector<int> order = selective_panel_order(finals, Mode::InContext);
            panel_states = Mat::Zero(hidden, cfg.population);
            for (int j = 0; j < cfg.population; ++j)
                panel_states.col(j) = rec.members[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])].reset_state;
        } else {
            panel_states = rec.members[static_cast<std::size_t>(rec.best_index)].reset_state;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

// Mean return of a frozen policy over a fixed evaluation batch.
inline double frozen_eval_return(GruNet& net, const EnvConfig& env, std::uint64_t seed,
                                 std::uint64_t salt, int episodes, const InstanceKey& content) {
    RolloutRunner::Options opt;
    opt.env = env;
    opt.lanes = 1;
    opt.seed = seed;
    opt.salt = salt;
    opt.pin_content = true;
    opt.content_key = content;
    RolloutRunner runner(net, opt);
    double total = 0.0;
    int count = 0;
    while (count < episodes) {
        runner.step_once();
        for (const FinishedEpisode& ep : runner.take_finished()) {
            if (count >= episodes) break;
            total += ep.episode_return;
            ++count;
        }
    }
    return total / static_cast<double>(episodes);
}

// Train-time generational accumulation. Every member trains fresh
// parameters for train_steps env steps while the previous generation's
// best acts in its environments, visible with linearly annealed
// probability; with the resets flag, generations >= 3 instead restart from
// the previous best with the final head layers re-initialised.
inline std::vector<GenerationRecord> train_in_weights(const AccumConfig& cfg, MetricsSink* sink) {
    cfg.validate();
    if (cfg.env.mode != Mode::InWeights)
        throw ConfigError("train_in_weights expects the in-weights setting");
    const EnvConfig env = cfg.effective_env();
    const ObsLayout layout = obs_layout(env);
    const NetConfig net_cfg = NetConfig::for_env(env, layout, cfg.net_width_scale);
    const InstanceKey content{env.kind, env.mode, cfg.seed,
                              stream_id(StreamPurpose::InstanceContent, kSaltContent, 0)};
    const Hyperparams& h = cfg.hyper;
    const std::int64_t per_update = static_cast<std::int64_t>(h.batch_lanes) * h.rollout_length;
    const std::int64_t updates = std::max<std::int64_t>(1, cfg.train_steps / per_update);
    const std::int64_t horizon = updates * per_update;

    std::vector<GenerationRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.generations));
    std::vector<ParamSet> panel_params;
    for (int m = 1; m <= cfg.generations; ++m) {
        GenerationRecord rec;
        rec.generation = m;
        std::vector<double> finals;
        for (int n = 0; n < cfg.population; ++n) {
            const std::uint64_t salt = member_salt(kSaltTrain, m, n);
            ParamSet theta;
            if (cfg.resets && m >= 3) {
                // Generation 2 is from scratch so social learning can be
                // acquired; resets apply from generation 3 on.
                theta = records.back().members[static_cast<std::size_t>(records.back().best_index)].params;
                RngStream reset_rng(cfg.seed, stream_id(StreamPurpose::LayerReset, salt, 0));
                reset_final_layers(net_cfg, theta, reset_rng);
            } else {
                RngStream init_rng(cfg.seed, stream_id(StreamPurpose::ParamInit, salt, 0));
                theta = init_params(net_cfg, init_rng);
            }
            GruNet net(net_cfg, std::move(theta));
            PpoUpdater updater(net_cfg, cfg.hyper);
            RolloutRunner::Options opt;
            opt.env = env;
            opt.lanes = cfg.hyper.batch_lanes;
            opt.seed = cfg.seed;
            opt.salt = salt;
            opt.pin_content = true;
            opt.content_key = content;
            if (m > 1) {
                opt.demo = RolloutRunner::DemoKind::FrozenPolicy;
                opt.schedule = RolloutRunner::Schedule::TrainStep;
                opt.schedule_horizon = horizon;
                for (const ParamSet& p : panel_params) opt.demo_params.push_back(&p);
            }
            RolloutRunner runner(net, opt);
            RngStream shuffle(cfg.seed, stream_id(StreamPurpose::MinibatchShuffle, salt, 0));
            run_ppo_training(net, runner, updater, cfg.train_steps, shuffle, sink, cfg.seed, m, n,
                             cfg.metrics_stride);

            MemberOutcome outcome;
            outcome.final_metric = frozen_eval_return(net, env, cfg.seed,
                                                      member_salt(kSaltEval, m, n),
                                                      cfg.eval_episodes, content);
            outcome.trial_returns = {outcome.final_metric};
            outcome.params = net.params();
            finals.push_back(outcome.final_metric);
            if (sink != nullptr)
                sink->push(cfg.seed, m, horizon, n, "final_eval_return", outcome.final_metric);
            rec.members.push_back(std::move(outcome));
        }
        rec.best_index = select_best(finals);
        if (sink != nullptr) {
            sink->push(cfg.seed, m, horizon, rec.best_index, "best_member",
                       static_cast<double>(rec.best_index));
            sink->push(cfg.seed, m, horizon, rec.best_index, "best_final_return",
                       finals[static_cast<std::size_t>(rec.best_index)]);
        }
        panel_params.clear();
        if (cfg.selective) {
            for (const MemberOutcome& mo : rec.members) panel_params.push_back(mo.params);
        } else {
            panel_params.push_back(rec.members[static_cast<std::size_t>(rec.best_index)].params);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

// Episodic single-lifetime baseline: plain recurrent PPO trained and
// evaluated with multiplier x K trials per episode, no oracle, no
// generations. Evaluation reuses the generational path with G = 1, so the
// metrics schema matches field for field.
inline std::vector<GenerationRecord> run_baseline_in_context(const AccumConfig& cfg, int multiplier,
                                                             MetricsSink* sink,
                                                             TrainedPolicy* policy_out = nullptr) {
    AccumConfig base = cfg;
    base.env.trials_per_episode = cfg.env.trials_per_episode * multiplier;
    base.generations = 1;
    base.selective = false;
    const TrainedPolicy policy = train_meta_policy(
        base, /*with_oracle=*/false, kSaltBaseline + static_cast<std::uint64_t>(multiplier), sink);
    if (policy_out != nullptr) *policy_out = policy;
    return evaluate_accumulation(policy, base, sink);
}

// Train-time single-lifetime baseline: one policy trained for
// multiplier x train_steps env steps on the same fixed instance, with a
// frozen evaluation after each train_steps chunk.
inline std::vector<double> run_baseline_in_weights(const AccumConfig& cfg, int multiplier,
                                                   MetricsSink* sink) {
    cfg.validate();
    AccumConfig base = cfg;
    base.selective = false;
    const EnvConfig env = base.effective_env();
    const ObsLayout layout = obs_layout(env);
    const NetConfig net_cfg = NetConfig::for_env(env, layout, cfg.net_width_scale);
    const InstanceKey content{env.kind, env.mode, cfg.seed,
                              stream_id(StreamPurpose::InstanceContent, kSaltContent, 0)};
    RngStream init_rng(cfg.seed, stream_id(StreamPurpose::ParamInit, kSaltBaseline, 0));
    GruNet net = GruNet::fresh(net_cfg, init_rng);
    PpoUpdater updater(net_cfg, cfg.hyper);
    RolloutRunner::Options opt;
    opt.env = env;
    opt.lanes = cfg.hyper.batch_lanes;
    opt.seed = cfg.seed;
    opt.salt = kSaltBaseline;
    opt.pin_content = true;
    opt.content_key = content;
    RolloutRunner runner(net, opt);
    RngStream shuffle(cfg.seed, stream_id(StreamPurpose::MinibatchShuffle, kSaltBaseline, 0));
    std::vector<double> snapshots;
    for (int g = 1; g <= multiplier; ++g) {
        run_ppo_training(net, runner, updater, cfg.train_steps, shuffle, sink, cfg.seed, g, 0,
                         cfg.metrics_stride);
        const double score = frozen_eval_return(net, env, cfg.seed, member_salt(kSaltEval, g, 0) ^ kSaltBaseline,
                                                cfg.eval_episodes, content);
        snapshots.push_back(score);
        if (sink != nullptr)
            sink->push(cfg.seed, g, runner.steps_collected(), 0, "final_eval_return", score);
    }
    return snapshots;
}

}  // namespace lineage
