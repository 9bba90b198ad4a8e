#pragma once

// Clipped-surrogate PPO for recurrent policies. Minibatches are built over
// whole environment lanes so sequences stay contiguous and BPTT threads
// hidden states from the stored segment-start values; advantages are
// standardized per minibatch.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "lineage/env/common.hpp"
#include "lineage/errors.hpp"
#include "lineage/net/categorical.hpp"
#include "lineage/net/gru_net.hpp"
#include "lineage/rl/gae.hpp"
#include "lineage/rl/trajectory_buffer.hpp"
#include "lineage/rng.hpp"

namespace lineage {

struct Hyperparams {
    double learning_rate = 2.5e-5;
    int batch_lanes = 4;  // parallel environments
    int rollout_length = 128;
    int update_epochs = 4;
    int minibatches = 4;
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip_eps = 0.2;
    double entropy_coef = 0.01;
    double value_coef = 0.5;
    double max_grad_norm = 0.5;
    bool anneal_lr = false;  // fixed learning rate throughout
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-5;
    bool clip_value_loss = true;
    bool gae_cut_at_trial = false;  // episode ends always cut; trial ends only if set

    static Hyperparams defaults_for(EnvKind kind) {
        Hyperparams h;
        if (kind == EnvKind::GoalSeq) {
            h.learning_rate = 1e-5;
            h.batch_lanes = 128;
            h.rollout_length = 32;
            h.update_epochs = 8;
            h.minibatches = 8;
        } else {
            h.learning_rate = 2.5e-5;
            h.batch_lanes = 4;
            h.rollout_length = 128;
            h.update_epochs = 4;
            h.minibatches = 4;
        }
        return h;
    }

    void validate() const {
        if (batch_lanes <= 0 || rollout_length <= 0 || update_epochs <= 0 || minibatches <= 0 ||
            learning_rate <= 0.0)
            throw ConfigError("hyperparameters must be positive");
        if (batch_lanes % minibatches != 0)
            throw ConfigError("minibatches must divide the number of parallel environments");
        if (anneal_lr) throw ConfigError("learning-rate annealing is not supported");
    }
};

// Global L2 norm across every gradient tensor.
inline double global_grad_norm(const ParamSet& grads) { return std::sqrt(grads.squared_norm()); }

// Scales gradients so the global norm does not exceed max_norm.
inline void clip_gradients(ParamSet& grads, double max_norm) {
    const double norm = global_grad_norm(grads);
    if (norm > max_norm && norm > 0.0) grads.scale(max_norm / norm);
}

struct AdamState {
    ParamSet m, v;
    long step = 0;

    explicit AdamState(const ParamSet& tmpl) : m(tmpl.zeros_like()), v(tmpl.zeros_like()) {}

    void apply(ParamSet& params, const ParamSet& grads, double lr, double beta1, double beta2,
               double eps) {
        ++step;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t i = 0; i < params.entries.size(); ++i) {
            Mat& mi = m.entries[i].value;
            Mat& vi = v.entries[i].value;
            const Mat& g = grads.entries[i].value;
            mi = beta1 * mi + (1.0 - beta1) * g;
            vi = (beta2 * vi.array() + (1.0 - beta2) * g.array().square()).matrix();
            params.entries[i].value.array() -=
                lr * (mi.array() / bc1) / ((vi.array() / bc2).sqrt() + eps);
        }
    }
};

struct LossComponents {
    double total = 0.0;
    double policy = 0.0;
    double value = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
};

// Per-element PPO loss with analytic gradients w.r.t. logits and value.
// `advantage` must already be standardized. Gradient outputs are unscaled;
// the caller divides by the minibatch element count.
inline void ppo_loss_element(const Eigen::Ref<const Vec>& logits, double value, int action,
                             double old_log_prob, double advantage, double value_target,
                             double old_value, const Hyperparams& hyper, LossComponents& acc,
                             Eigen::Ref<Vec> dlogits, double& dvalue) {
    const Vec logp_all = log_softmax_col(logits);
    const Vec probs = logp_all.array().exp();
    const double logp = logp_all[action];
    const double ratio = std::exp(logp - old_log_prob);
    const double clipped_ratio = std::clamp(ratio, 1.0 - hyper.clip_eps, 1.0 + hyper.clip_eps);
    const double s1 = ratio * advantage;
    const double s2 = clipped_ratio * advantage;
    const double policy_loss = -std::min(s1, s2);
    if (std::abs(ratio - 1.0) > hyper.clip_eps) acc.clip_fraction += 1.0;

    dlogits = -probs;
    dlogits[action] += 1.0;  // d logp / d logits
    if (s1 <= s2) {
        dlogits *= -advantage * ratio;
    } else {
        dlogits.setZero();  // clipped branch is constant in the params
    }

    double value_loss;
    if (hyper.clip_value_loss) {
        const double v_clip = old_value + std::clamp(value - old_value, -hyper.clip_eps, hyper.clip_eps);
        const double l_raw = (value - value_target) * (value - value_target);
        const double l_clip = (v_clip - value_target) * (v_clip - value_target);
        value_loss = std::max(l_raw, l_clip);
        if (l_raw >= l_clip) {
            dvalue = hyper.value_coef * 2.0 * (value - value_target);
        } else {
            // The clipped branch still tracks the value inside the clip
            // window; it is constant only once the clamp saturates.
            const bool saturated = std::abs(value - old_value) >= hyper.clip_eps;
            dvalue = saturated ? 0.0 : hyper.value_coef * 2.0 * (v_clip - value_target);
        }
    } else {
        value_loss = (value - value_target) * (value - value_target);
        dvalue = hyper.value_coef * 2.0 * (value - value_target);
    }

    const double entropy = -(probs.array() * logp_all.array()).sum();
    // d(-entropy_coef * H)/dlogits = entropy_coef * probs * (logp + H)
    dlogits += (hyper.entropy_coef * probs.array() * (logp_all.array() + entropy)).matrix();

    acc.policy += policy_loss;
    acc.value += value_loss;
    acc.entropy += entropy;
    acc.total += policy_loss + hyper.value_coef * value_loss - hyper.entropy_coef * entropy;
}

struct UpdateStats {
    double total_loss = 0.0;
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
    double grad_norm = 0.0;  // pre-clip global norm, averaged over minibatches
    int minibatch_updates = 0;
};

// One PPO update over a full buffer: GAE, then update_epochs passes of
// lane-contiguous minibatches with Adam and global grad-norm clipping.
class PpoUpdater {
public:
    PpoUpdater(const NetConfig& net_cfg, const Hyperparams& hyper)
        : hyper_(hyper), grads_(param_template(net_cfg)), adam_(grads_) {
        hyper_.validate();
    }

    const Hyperparams& hyper() const { return hyper_; }

    UpdateStats update(GruNet& net, TrajectoryBuffer& buf, RngStream& shuffle_rng) {
        const int lanes = buf.lanes;
        const int length = buf.length;
        const int mb_lanes = lanes / hyper_.minibatches;
        const int h = net.hidden_width();
        const int obs_w = net.obs_width();
        const int actions = net.config().action_count;

        // Advantages from the values recorded at collection time.
        {
            std::vector<double> r(static_cast<std::size_t>(length)), v(static_cast<std::size_t>(length));
            std::vector<std::uint8_t> d(static_cast<std::size_t>(length));
            for (int lane = 0; lane < lanes; ++lane) {
                for (int t = 0; t < length; ++t) {
                    const auto ts = static_cast<std::size_t>(t);
                    const auto ls = static_cast<std::size_t>(lane);
                    r[ts] = buf.rewards[ts][ls];
                    v[ts] = buf.values[ts][ls];
                    d[ts] = buf.episode_done[ts][ls] ||
                            (hyper_.gae_cut_at_trial && buf.trial_done[ts][ls]);
                }
                const GaeResult gae = compute_gae(r, v, d, buf.bootstrap_value[static_cast<std::size_t>(lane)],
                                                  hyper_.gamma, hyper_.gae_lambda);
                for (int t = 0; t < length; ++t) {
                    buf.advantages[static_cast<std::size_t>(t)][static_cast<std::size_t>(lane)] =
                        gae.advantages[static_cast<std::size_t>(t)];
                    buf.value_targets[static_cast<std::size_t>(t)][static_cast<std::size_t>(lane)] =
                        gae.value_targets[static_cast<std::size_t>(t)];
                }
            }
        }

        caches_.resize(static_cast<std::size_t>(length));
        dlogits_.assign(static_cast<std::size_t>(length), Mat::Zero(actions, mb_lanes));
        dvalue_.assign(static_cast<std::size_t>(length), Mat::Zero(1, mb_lanes));
        Mat obs_mb(obs_w, mb_lanes);
        Mat h_mb(h, mb_lanes);
        std::vector<std::vector<std::uint8_t>> done_mb(
            static_cast<std::size_t>(length), std::vector<std::uint8_t>(static_cast<std::size_t>(mb_lanes), 0));

        UpdateStats stats;
        for (int epoch = 0; epoch < hyper_.update_epochs; ++epoch) {
            const std::vector<int> order = shuffle_rng.permutation(lanes);
            for (int mb = 0; mb < hyper_.minibatches; ++mb) {
                const int* mb_order = order.data() + mb * mb_lanes;

                // Standardize advantages over this minibatch.
                double mean = 0.0;
                for (int t = 0; t < length; ++t)
                    for (int j = 0; j < mb_lanes; ++j)
                        mean += buf.advantages[static_cast<std::size_t>(t)][static_cast<std::size_t>(mb_order[j])];
                const double count = static_cast<double>(length) * mb_lanes;
                mean /= count;
                double var = 0.0;
                for (int t = 0; t < length; ++t)
                    for (int j = 0; j < mb_lanes; ++j) {
                        const double a =
                            buf.advantages[static_cast<std::size_t>(t)][static_cast<std::size_t>(mb_order[j])] - mean;
                        var += a * a;
                    }
                const double inv_std = 1.0 / (std::sqrt(var / count) + 1e-8);

                // Forward through the segment with stored initial hidden
                // states, replaying the episode-boundary resets.
                for (int j = 0; j < mb_lanes; ++j)
                    h_mb.col(j) = buf.initial_hidden.col(mb_order[j]);
                LossComponents acc;
                for (int t = 0; t < length; ++t) {
                    const auto ts = static_cast<std::size_t>(t);
                    for (int j = 0; j < mb_lanes; ++j) {
                        obs_mb.col(j) = buf.obs[ts].col(mb_order[j]);
                        done_mb[ts][static_cast<std::size_t>(j)] =
                            buf.episode_done[ts][static_cast<std::size_t>(mb_order[j])];
                    }
                    StepCache& cache = caches_[ts];
                    net.forward(obs_mb, h_mb, cache);
                    for (int j = 0; j < mb_lanes; ++j) {
                        const auto ls = static_cast<std::size_t>(mb_order[j]);
                        double dv = 0.0;
                        ppo_loss_element(cache.logits.col(j), cache.value(0, j), buf.actions[ts][ls],
                                         buf.log_probs[ts][ls],
                                         (buf.advantages[ts][ls] - mean) * inv_std,
                                         buf.value_targets[ts][ls], buf.values[ts][ls], hyper_, acc,
                                         dlogits_[ts].col(j), dv);
                        dvalue_[ts](0, j) = dv;
                        h_mb.col(j) = done_mb[ts][static_cast<std::size_t>(j)] ? Vec::Zero(h).eval()
                                                                               : cache.h_out.col(j).eval();
                    }
                }

                const double inv_count = 1.0 / count;
                if (!std::isfinite(acc.total))
                    throw NumericalError("non-finite PPO loss; aborting update");
                for (int t = 0; t < length; ++t) {
                    dlogits_[static_cast<std::size_t>(t)] *= inv_count;
                    dvalue_[static_cast<std::size_t>(t)] *= inv_count;
                }

                grads_.set_zero();
                net.backward_sequence(caches_, length, done_mb, dlogits_, dvalue_, grads_, bwd_);
                const double norm = global_grad_norm(grads_);
                clip_gradients(grads_, hyper_.max_grad_norm);
                adam_.apply(net.params(), grads_, hyper_.learning_rate, hyper_.adam_beta1,
                            hyper_.adam_beta2, hyper_.adam_eps);

                stats.total_loss += acc.total * inv_count;
                stats.policy_loss += acc.policy * inv_count;
                stats.value_loss += acc.value * inv_count;
                stats.entropy += acc.entropy * inv_count;
                stats.clip_fraction += acc.clip_fraction * inv_count;
                stats.grad_norm += norm;
                ++stats.minibatch_updates;
            }
        }
        const double inv_updates = 1.0 / std::max(1, stats.minibatch_updates);
        stats.total_loss *= inv_updates;
        stats.policy_loss *= inv_updates;
        stats.value_loss *= inv_updates;
        stats.entropy *= inv_updates;
        stats.clip_fraction *= inv_updates;
        stats.grad_norm *= inv_updates;
        return stats;
    }

private:
    Hyperparams hyper_;
    ParamSet grads_;
    AdamState adam_;
    std::vector<StepCache> caches_;
    BackwardScratch bwd_;
    std::vector<Mat> dlogits_, dvalue_;
};

// Spec-shaped scalar loss over a prepared minibatch; used by tests. The
// advantages passed in must already be standardized.
inline LossComponents ppo_loss(GruNet& net, const std::vector<Mat>& obs, const Mat& h0,
                               const std::vector<std::vector<int>>& actions,
                               const std::vector<std::vector<double>>& old_log_probs,
                               const std::vector<std::vector<double>>& advantages,
                               const std::vector<std::vector<double>>& value_targets,
                               const std::vector<std::vector<double>>& old_values,
                               const std::vector<std::vector<std::uint8_t>>& episode_done,
                               const Hyperparams& hyper) {
    const int length = static_cast<int>(obs.size());
    const int lanes = static_cast<int>(obs[0].cols());
    StepCache cache;
    Mat h = h0;
    LossComponents acc;
    Vec dlogits_sink(net.config().action_count);
    for (int t = 0; t < length; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        net.forward(obs[ts], h, cache);
        for (int j = 0; j < lanes; ++j) {
            double dv = 0.0;
            ppo_loss_element(cache.logits.col(j), cache.value(0, j), actions[ts][static_cast<std::size_t>(j)],
                             old_log_probs[ts][static_cast<std::size_t>(j)],
                             advantages[ts][static_cast<std::size_t>(j)],
                             value_targets[ts][static_cast<std::size_t>(j)],
                             old_values[ts][static_cast<std::size_t>(j)], hyper, acc, dlogits_sink, dv);
            h.col(j) = episode_done[ts][static_cast<std::size_t>(j)] ? Vec::Zero(h.rows()).eval()
                                                                     : cache.h_out.col(j).eval();
        }
    }
    const double inv = 1.0 / (static_cast<double>(length) * lanes);
    acc.total *= inv;
    acc.policy *= inv;
    acc.value *= inv;
    acc.entropy *= inv;
    acc.clip_fraction *= inv;
    return acc;
}

}  // namespace lineage
