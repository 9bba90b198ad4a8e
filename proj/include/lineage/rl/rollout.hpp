#pragma once

// Batched meta-episode runner. Drives `lanes` independent environment
// copies under one policy, handling the trial/episode clock, meta
// observation assembly, demonstrator stepping and visibility sampling.
//
// Within a step the demonstrators act first: a frozen policy (or scripted
// oracle) is a function of the current state, so its action can be encoded
// into the learner's observation of the same step. The learner then acts,
// and the environment advances every slot independently. The learner's
// trial drives the episode clock.
//
// Demonstrator kinds:
//   ScriptedOracle  privileged scripted policy with per-episode corruption
//   ReplayState     the training policy itself, restarted from a stored
//                   reset state at every trial start (transmission phase)
//   FrozenPolicy    an independent parameter set acting from a blank state
//                   each episode (train-time generations)

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "lineage/env/instance.hpp"
#include "lineage/net/categorical.hpp"
#include "lineage/net/gru_net.hpp"
#include "lineage/rl/trajectory_buffer.hpp"
#include "lineage/trial_clock.hpp"

namespace lineage {

struct FinishedEpisode {
    double episode_return = 0.0;
    double final_trial_return = 0.0;
};

struct EpisodeResult {
    std::vector<double> trial_returns;
    Mat reset_state;  // hidden state at the start of the final trial
    double final_trial_return = 0.0;
    int final_trial_visible_steps = 0;  // demonstrator exposures in the final trial
};

class RolloutRunner {
public:
    enum class DemoKind { None, ScriptedOracle, ReplayState, FrozenPolicy };
    enum class Schedule { None, Episodic, TrainStep };

    struct Options {
        EnvConfig env;
        int lanes = 1;
        std::uint64_t seed = 0;
        std::uint64_t salt = 0;  // distinguishes phases/members sharing a seed
        DemoKind demo = DemoKind::None;
        Schedule schedule = Schedule::None;
        std::vector<double> oracle_epsilon;        // per panel slot
        std::vector<const ParamSet*> demo_params;  // per panel slot, FrozenPolicy
        Mat replay_states;                         // [hidden x panel], ReplayState
        std::int64_t schedule_horizon = 0;         // TrainStep: total env steps
        bool pin_content = false;                  // reuse one instance's content each episode
        InstanceKey content_key{};
        bool pin_layout = false;  // replay the same episode layout stream each episode
        std::uint64_t layout_stream = 0;
        bool single_episode = false;  // evaluation: stop each lane after one episode
    };

    RolloutRunner(GruNet& policy, Options opt)
        : policy_(&policy), opt_(std::move(opt)), layout_(obs_layout(opt_.env)) {
        if (opt_.env.mode == Mode::InContext && opt_.env.trials_per_episode < 2 &&
            opt_.schedule == Schedule::Episodic)
            throw ConfigError("episodic visibility annealing needs at least 2 trials per episode");
        if (policy_->obs_width() != layout_.total())
            throw ConfigError("network input width does not match the observation layout");
        panel_ = opt_.env.demo_slots;
        if (opt_.demo == DemoKind::ScriptedOracle &&
            static_cast<int>(opt_.oracle_epsilon.size()) != panel_)
            throw ConfigError("oracle noise list must match the demonstrator panel size");
        if (opt_.demo == DemoKind::FrozenPolicy &&
            static_cast<int>(opt_.demo_params.size()) != panel_)
            throw ConfigError("demonstrator parameter list must match the panel size");
        if (opt_.demo == DemoKind::ReplayState &&
            static_cast<int>(opt_.replay_states.cols()) != panel_)
            throw ConfigError("reset state panel must match the panel size");

        if (opt_.pin_content) master_ = sample_instance(opt_.env, opt_.content_key);

        const int h = policy_->hidden_width();
        h_ = Mat::Zero(h, opt_.lanes);
        obs_ = Mat::Zero(layout_.total(), opt_.lanes);
        task_buf_ = Vec::Zero(std::visit([](const auto& e) { return e.task_width(); },
                                         make_env(opt_.env)));
        if (opt_.demo == DemoKind::FrozenPolicy)
            for (const ParamSet* p : opt_.demo_params)
                demo_nets_.push_back(std::make_unique<GruNet>(policy_->config(), *p));
        if (opt_.demo == DemoKind::ReplayState || opt_.demo == DemoKind::FrozenPolicy) {
            demo_h_.assign(static_cast<std::size_t>(panel_), Mat::Zero(h, opt_.lanes));
            demo_obs_ = Mat::Zero(layout_.total(), opt_.lanes);
        }

        lanes_.resize(static_cast<std::size_t>(opt_.lanes));
        for (int i = 0; i < opt_.lanes; ++i) {
            Lane& lane = lanes_[static_cast<std::size_t>(i)];
            lane.env = make_env(opt_.env);
            lane.clock.trials_per_episode = opt_.env.trials_per_episode;
            lane.clock.trial_length = opt_.env.trial_length();
            const auto li = static_cast<std::uint64_t>(i);
            lane.content = RngStream(opt_.seed, stream_id(StreamPurpose::InstanceContent, opt_.salt, li));
            lane.layout = RngStream(opt_.seed, stream_id(StreamPurpose::InstanceLayout, opt_.salt, li));
            lane.corruption =
                RngStream(opt_.seed, stream_id(StreamPurpose::OracleCorruption, opt_.salt, li));
            lane.visibility = RngStream(opt_.seed, stream_id(StreamPurpose::Visibility, opt_.salt, li));
            lane.policy = RngStream(opt_.seed, stream_id(StreamPurpose::PolicySampling, opt_.salt, li));
            lane.demo_streams.resize(static_cast<std::size_t>(panel_));
            for (int p = 0; p < panel_; ++p)
                lane.demo_streams[static_cast<std::size_t>(p)] = RngStream(
                    opt_.seed, stream_id(StreamPurpose::DemoSampling, opt_.salt ^ (0x5151ULL + static_cast<std::uint64_t>(p)), li));
            lane.demo_last_action.assign(static_cast<std::size_t>(panel_), -1);
            lane.demo_last_reward.assign(static_cast<std::size_t>(panel_), std::nullopt);
            lane.demo_pending.assign(static_cast<std::size_t>(panel_), -1);
            configure_oracle_slots(lane.env);
        }
    }

    const ObsLayout& layout() const { return layout_; }
    std::int64_t steps_collected() const { return steps_collected_; }

    std::vector<FinishedEpisode> take_finished() {
        std::vector<FinishedEpisode> out;
        out.swap(finished_);
        return out;
    }

    // Collects one rollout segment, continuing from wherever the lanes are.
    void collect(TrajectoryBuffer& buf, int rollout_length) {
        buf.configure(layout_.total(), policy_->hidden_width(), rollout_length, opt_.lanes);
        for (int t = 0; t < buf.length; ++t) {
            ensure_obs();
            if (t == 0) buf.initial_hidden = h_;
            advance(&buf, t);
        }
        // Bootstrap value for the next observation; consumes no randomness.
        ensure_obs();
        policy_->forward(obs_, h_, scratch_);
        for (int i = 0; i < opt_.lanes; ++i)
            buf.bootstrap_value[static_cast<std::size_t>(i)] = scratch_.value(0, i);
    }

    // One joint step without recording; finished episodes land in
    // take_finished().
    void step_once() {
        ensure_obs();
        advance(nullptr, 0);
    }

    // Runs exactly one episode on a single-lane runner (evaluation).
    EpisodeResult run_episode() {
        if (opt_.lanes != 1 || !opt_.single_episode)
            throw ContractViolation("run_episode needs a single-lane, single-episode runner");
        Lane& lane = lanes_[0];
        lane.need_episode_reset = true;
        lane.episode_finished = false;
        lane.trial_returns.clear();
        lane.final_trial_visible = 0;
        while (!lane.episode_finished) {
            ensure_obs();
            advance(nullptr, 0);
        }
        EpisodeResult result;
        result.trial_returns = lane.trial_returns;
        result.reset_state = lane.reset_state;
        result.final_trial_return = lane.trial_returns.back();
        result.final_trial_visible_steps = lane.final_trial_visible;
        return result;
    }

private:
    struct Lane {
        EnvState env{std::in_place_type<MemorySeqEnv>, EnvConfig{}};
        TrialClock clock;
        int last_action = -1;
        std::optional<double> last_reward;
        double trial_return = 0.0;
        double episode_return = 0.0;
        std::vector<double> trial_returns;
        bool need_episode_reset = true;
        bool episode_finished = false;
        Mat reset_state;
        int final_trial_visible = 0;
        bool vis = false;
        double p_obs = 0.0;
        RngStream content, layout, corruption, visibility, policy;
        std::vector<RngStream> demo_streams;
        std::vector<int> demo_last_action;
        std::vector<std::optional<double>> demo_last_reward;
        std::vector<int> demo_pending;
    };

    // Scripted oracles demonstrate through their own mistakes in-context;
    // replayed policies terminate like a learner would.
    void configure_oracle_slots(EnvState& env) {
        if (auto* mem = std::get_if<MemorySeqEnv>(&env)) {
            for (int p = 0; p < panel_; ++p)
                mem->slot(1 + p).terminate_on_error = opt_.demo != DemoKind::ScriptedOracle;
        }
    }

    void begin_episode(int lane_index) {
        Lane& lane = lanes_[static_cast<std::size_t>(lane_index)];
        if (opt_.pin_content) {
            lane.env = master_;
        } else {
            env_sample_content(lane.env, lane.content);
        }
        configure_oracle_slots(lane.env);
        if (opt_.pin_layout)
            lane.layout = RngStream(opt_.seed, opt_.layout_stream);
        env_begin_episode(lane.env, lane.layout);
        lane.clock.reset();
        lane.last_action = -1;
        lane.last_reward.reset();
        lane.trial_return = 0.0;
        lane.episode_return = 0.0;
        lane.trial_returns.clear();
        lane.final_trial_visible = 0;
        h_.col(lane_index).setZero();
        for (int p = 0; p < panel_; ++p) {
            lane.demo_last_action[static_cast<std::size_t>(p)] = -1;
            lane.demo_last_reward[static_cast<std::size_t>(p)].reset();
            lane.demo_pending[static_cast<std::size_t>(p)] = -1;
            if (opt_.demo == DemoKind::ScriptedOracle)
                env_oracle_prepare(lane.env, 1 + p, opt_.oracle_epsilon[static_cast<std::size_t>(p)],
                                   lane.corruption);
            if (opt_.demo == DemoKind::ReplayState)
                demo_h_[static_cast<std::size_t>(p)].col(lane_index) = opt_.replay_states.col(p);
            if (opt_.demo == DemoKind::FrozenPolicy)
                demo_h_[static_cast<std::size_t>(p)].col(lane_index).setZero();
        }
        lane.need_episode_reset = false;
    }

    double schedule_p_obs(const Lane& lane) const {
        if (opt_.demo == DemoKind::None) return 0.0;
        switch (opt_.schedule) {
            case Schedule::None: return 0.0;
            case Schedule::Episodic:
                return anneal_in_context(lane.clock.trial_index, lane.clock.trials_per_episode);
            case Schedule::TrainStep: {
                const std::int64_t t = std::min(steps_collected_, opt_.schedule_horizon - 1);
                return anneal_in_weights(t, opt_.schedule_horizon);
            }
        }
        return 0.0;
    }

    void compute_demo_actions() {
        if (opt_.demo == DemoKind::None) return;
        if (opt_.demo == DemoKind::ScriptedOracle) {
            for (int i = 0; i < opt_.lanes; ++i) {
                Lane& lane = lanes_[static_cast<std::size_t>(i)];
                for (int p = 0; p < panel_; ++p) {
                    const bool live = !lane.episode_finished && env_slot_active(lane.env, 1 + p);
                    lane.demo_pending[static_cast<std::size_t>(p)] =
                        live ? env_oracle_action(lane.env, 1 + p, lane.corruption) : -1;
                }
            }
            return;
        }
        // Net demonstrators: one batched forward per panel slot. Their own
        // observations never include peers.
        const std::vector<PeerView> no_peers;
        for (int p = 0; p < panel_; ++p) {
            const auto ps = static_cast<std::size_t>(p);
            for (int i = 0; i < opt_.lanes; ++i) {
                Lane& lane = lanes_[static_cast<std::size_t>(i)];
                const bool live = !lane.episode_finished && env_slot_active(lane.env, 1 + p);
                if (live) {
                    env_write_task(lane.env, 1 + p, task_buf_, no_peer_mask_);
                    const int demo_trial = opt_.demo == DemoKind::ReplayState
                                               ? lane.clock.trials_per_episode - 1
                                               : lane.clock.trial_index;
                    write_observation(layout_, demo_obs_.col(i), task_buf_,
                                      lane.demo_last_action[ps], lane.demo_last_reward[ps],
                                      demo_trial, no_peers);
                } else {
                    demo_obs_.col(i).setZero();
                }
            }
            const GruNet& net = opt_.demo == DemoKind::ReplayState ? *policy_ : *demo_nets_[ps];
            net.forward(demo_obs_, demo_h_[ps], demo_scratch_);
            for (int i = 0; i < opt_.lanes; ++i) {
                Lane& lane = lanes_[static_cast<std::size_t>(i)];
                const bool live = !lane.episode_finished && env_slot_active(lane.env, 1 + p);
                lane.demo_pending[ps] =
                    live ? sample_categorical(demo_scratch_.logits.col(i), lane.demo_streams[ps]) : -1;
            }
            demo_h_[ps] = demo_scratch_.h_out;
        }
    }

    void ensure_obs() {
        if (obs_ready_) return;
        for (int i = 0; i < opt_.lanes; ++i) {
            Lane& lane = lanes_[static_cast<std::size_t>(i)];
            if (lane.need_episode_reset && !lane.episode_finished) begin_episode(i);
        }
        no_peer_mask_.assign(static_cast<std::size_t>(1 + panel_), false);
        compute_demo_actions();
        for (int i = 0; i < opt_.lanes; ++i) {
            Lane& lane = lanes_[static_cast<std::size_t>(i)];
            if (lane.episode_finished) {
                obs_.col(i).setZero();
                continue;
            }
            lane.p_obs = schedule_p_obs(lane);
            lane.vis = visibility_sample(lane.p_obs, lane.visibility);
            bool any_pending = false;
            for (int p = 0; p < panel_; ++p)
                any_pending |= lane.demo_pending[static_cast<std::size_t>(p)] >= 0;
            const bool visible = lane.vis && any_pending;
            if (visible && lane.clock.last_trial()) ++lane.final_trial_visible;

            peer_mask_.assign(static_cast<std::size_t>(1 + panel_), false);
            peer_views_.clear();
            for (int p = 0; p < panel_; ++p) {
                const int pending = lane.demo_pending[static_cast<std::size_t>(p)];
                const bool shown = lane.vis && pending >= 0;
                peer_mask_[static_cast<std::size_t>(1 + p)] = shown;
                peer_views_.push_back(
                    PeerView{shown, shown ? env_peer_code(lane.env, pending) : -1});
            }
            env_write_task(lane.env, 0, task_buf_, peer_mask_);
            write_observation(layout_, obs_.col(i), task_buf_, lane.last_action, lane.last_reward,
                              lane.clock.trial_index, peer_views_);
        }
        obs_ready_ = true;
    }

    void advance(TrajectoryBuffer* buf, int t) {
        policy_->forward(obs_, h_, scratch_);
        std::int64_t live_lanes = 0;
        for (int i = 0; i < opt_.lanes; ++i) {
            Lane& lane = lanes_[static_cast<std::size_t>(i)];
            if (lane.episode_finished) continue;
            ++live_lanes;
            const int action = sample_categorical(scratch_.logits.col(i), lane.policy);
            const double logp = log_prob_of(scratch_.logits.col(i), action);
            const double value = scratch_.value(0, i);
            const StepOutcome out = env_step(lane.env, 0, action);
            const bool trial_done =
                out.trial_done || (lane.clock.step_in_trial + 1 >= lane.clock.trial_length);
            const bool episode_over = trial_done && lane.clock.last_trial();

            for (int p = 0; p < panel_; ++p) {
                const auto ps = static_cast<std::size_t>(p);
                const int pending = lane.demo_pending[ps];
                if (pending >= 0 && env_slot_active(lane.env, 1 + p)) {
                    const StepOutcome demo_out = env_step(lane.env, 1 + p, pending);
                    lane.demo_last_action[ps] = pending;
                    lane.demo_last_reward[ps] = demo_out.reward;
                }
                lane.demo_pending[ps] = -1;
            }

            lane.last_action = action;
            lane.last_reward = out.reward;
            lane.trial_return += out.reward;
            lane.episode_return += out.reward;

            if (buf != nullptr) {
                const auto ts = static_cast<std::size_t>(t);
                const auto ls = static_cast<std::size_t>(i);
                buf->obs[ts].col(i) = obs_.col(i);
                buf->actions[ts][ls] = action;
                buf->log_probs[ts][ls] = logp;
                buf->values[ts][ls] = value;
                buf->rewards[ts][ls] = out.reward;
                buf->trial_done[ts][ls] = trial_done ? 1 : 0;
                buf->episode_done[ts][ls] = episode_over ? 1 : 0;
            }

            if (episode_over)
                h_.col(i).setZero();
            else
                h_.col(i) = scratch_.h_out.col(i);

            ++lane.clock.step_in_trial;
            if (trial_done) {
                lane.trial_returns.push_back(lane.trial_return);
                lane.trial_return = 0.0;
                if (lane.clock.end_trial()) {
                    finished_.push_back({lane.episode_return, lane.trial_returns.back()});
                    if (opt_.single_episode)
                        lane.episode_finished = true;
                    else
                        lane.need_episode_reset = true;
                } else {
                    env_begin_trial(lane.env, lane.layout);
                    lane.last_action = -1;  // no prior action in the new trial
                    for (int p = 0; p < panel_; ++p) {
                        const auto ps = static_cast<std::size_t>(p);
                        lane.demo_last_action[ps] = -1;
                        lane.demo_last_reward[ps].reset();
                        if (opt_.demo == DemoKind::ReplayState)
                            demo_h_[ps].col(i) = opt_.replay_states.col(p);
                    }
                    // The hidden state entering the final trial is the
                    // transmission artifact.
                    if (lane.clock.last_trial()) lane.reset_state = h_.col(i);
                }
            }
        }
        steps_collected_ += live_lanes;
        obs_ready_ = false;
    }

    GruNet* policy_;
    Options opt_;
    ObsLayout layout_;
    int panel_ = 0;
    EnvState master_{std::in_place_type<MemorySeqEnv>, EnvConfig{}};
    std::vector<Lane> lanes_;
    Mat h_, obs_, demo_obs_;
    std::vector<Mat> demo_h_;
    std::vector<std::unique_ptr<GruNet>> demo_nets_;
    StepCache scratch_, demo_scratch_;
    Vec task_buf_;
    std::vector<bool> peer_mask_, no_peer_mask_;
    std::vector<PeerView> peer_views_;
    std::vector<FinishedEpisode> finished_;
    std::int64_t steps_collected_ = 0;
    bool obs_ready_ = false;
};

}  // namespace lineage
