#pragma once

// Meta-observation assembly.
//
// Each policy input is a fixed-order concatenation of blocks:
//
//   [ task | last-action one-hot | last-reward one-hot {-1,0,+1} |
//     raw reward (optional) | trial one-hot | peer blocks | visible flag ]
//
// Block widths come from an ObsLayout computed once per environment
// config, so the total width is a pure function of (config, K). An absent
// value (no previous action, demonstrator hidden or dead) encodes as an
// all-zero block; every one-hot block therefore sums to zero or one.

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "lineage/errors.hpp"
#include "lineage/trial_clock.hpp"

namespace lineage {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct ObsLayout {
    int task_width = 0;
    int action_width = 0;                     // 0 when the env does not append the last action
    static constexpr int reward_classes = 3;  // one-hot over {-1, 0, +1}, in that order
    int raw_reward_width = 0;                 // 1 for envs with fractional rewards
    int trial_width = 0;                      // K in the episodic setting, 0 otherwise
    int peer_width = 0;                       // width of one demonstrator block
    int panel_size = 1;                       // number of demonstrator blocks
    int flag_width = 0;                       // 1 when a visibility flag is appended

    int task_offset() const { return 0; }
    int action_offset() const { return task_width; }
    int reward_offset() const { return action_offset() + action_width; }
    int raw_reward_offset() const { return reward_offset() + reward_classes; }
    int trial_offset() const { return raw_reward_offset() + raw_reward_width; }
    int peer_offset(int panel_slot = 0) const {
        return trial_offset() + trial_width + panel_slot * peer_width;
    }
    int flag_offset() const { return peer_offset(panel_size); }
    int total() const { return flag_offset() + flag_width; }
};

// One demonstrator as seen by the learner this step. action_code < 0 means
// there is nothing to show (hidden, dead, or not yet acted); the block is
// zeroed and, per the layout invariant, visible is forced false.
struct PeerView {
    bool visible = false;
    int action_code = -1;
};

inline int reward_class(double reward, const ObsLayout& layout) {
    if (layout.raw_reward_width == 0) {
        if (reward != -1.0 && reward != 0.0 && reward != 1.0)
            throw ContractViolation("reward outside {-1, 0, +1}");
    }
    if (reward < 0.0) return 0;
    if (reward == 0.0) return 1;
    return 2;
}

// Writes one observation column in place. `out` must have layout.total()
// rows and is fully overwritten.
inline void write_observation(const ObsLayout& layout, Eigen::Ref<Vec> out,
                              const Eigen::Ref<const Vec>& task, int last_action,
                              std::optional<double> last_reward, int trial_index,
                              const std::vector<PeerView>& peers) {
    out.setZero();
    if (layout.task_width > 0) out.segment(layout.task_offset(), layout.task_width) = task;
    if (layout.action_width > 0 && last_action >= 0)
        out[layout.action_offset() + last_action] = 1.0;
    if (last_reward.has_value()) {
        out[layout.reward_offset() + reward_class(*last_reward, layout)] = 1.0;
        if (layout.raw_reward_width > 0) out[layout.raw_reward_offset()] = *last_reward;
    }
    if (layout.trial_width > 0) out[layout.trial_offset() + trial_index] = 1.0;
    bool any_visible = false;
    for (int p = 0; p < layout.panel_size && p < static_cast<int>(peers.size()); ++p) {
        const PeerView& peer = peers[static_cast<std::size_t>(p)];
        if (layout.peer_width > 0 && peer.visible && peer.action_code >= 0) {
            out[layout.peer_offset(p) + peer.action_code] = 1.0;
            any_visible = true;
        }
    }
    if (layout.flag_width > 0 && any_visible) out[layout.flag_offset()] = 1.0;
}

// Value-returning wrapper with named accessors; the batched runners write
// columns of a matrix directly via write_observation instead.
struct MetaObservation {
    ObsLayout layout;
    Vec flat;

    auto task() const { return flat.segment(layout.task_offset(), layout.task_width); }
    auto last_action() const { return flat.segment(layout.action_offset(), layout.action_width); }
    auto last_reward() const { return flat.segment(layout.reward_offset(), ObsLayout::reward_classes); }
    auto trial_id() const { return flat.segment(layout.trial_offset(), layout.trial_width); }
    auto peer_features(int slot = 0) const { return flat.segment(layout.peer_offset(slot), layout.peer_width); }
    bool peer_visible() const { return layout.flag_width > 0 && flat[layout.flag_offset()] != 0.0; }
};

inline MetaObservation augment_observation(const ObsLayout& layout,
                                           const Eigen::Ref<const Vec>& task, int last_action,
                                           std::optional<double> last_reward,
                                           const TrialClock& clock,
                                           const std::vector<PeerView>& peers) {
    MetaObservation obs{layout, Vec(layout.total())};
    write_observation(layout, obs.flat, task, last_action, last_reward, clock.trial_index, peers);
    return obs;
}

}  // namespace lineage
