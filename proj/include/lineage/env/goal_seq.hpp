#pragma once

// Goal Sequence: a 7x7 bordered gridworld with three goal tiles (one per
// type) and a hidden non-repeating sequence of goal types. Entering the
// correct next goal pays +1 and advances progress; entering any other goal
// pays -1; everything else pays 0. Agents act with
// {forward, turn left, turn right} and observe a 3x3 egocentric window
// directly in front of them with 5 channels (goal types, wall, agent).
// Trials are fixed length; the step budget is enforced by the episode
// clock, not in here.

#include <Eigen/Dense>
#include <array>
#include <utility>
#include <vector>

#include "lineage/env/common.hpp"
#include "lineage/rng.hpp"

namespace lineage {

class GoalSeqEnv {
public:
    // Headings: 0=N (row decreasing), 1=E, 2=S, 3=W.
    struct Pose {
        int row = 1;
        int col = 1;
        int heading = 0;
    };

    struct Slot {
        Pose pose;
        int progress = 0;         // index into the true target sequence
        int belief_progress = 0;  // oracle slots track their corrupted copy
        bool active = true;
    };

    explicit GoalSeqEnv(const EnvConfig& cfg)
        : cfg_(cfg), slots_(static_cast<std::size_t>(1 + cfg.demo_slots)),
          believed_(static_cast<std::size_t>(1 + cfg.demo_slots)) {}

    const EnvConfig& config() const { return cfg_; }
    const std::vector<int>& target_sequence() const { return target_seq_; }
    const std::array<std::pair<int, int>, 3>& goal_positions() const { return goal_pos_; }
    Slot& slot(int i) { return slots_[static_cast<std::size_t>(i)]; }
    const Slot& slot(int i) const { return slots_[static_cast<std::size_t>(i)]; }

    // Content: the target sequence. Long enough that no trial can outrun it
    // (progress advances at most once per step). Consecutive types differ.
    void sample_content(RngStream& rng) {
        target_seq_.resize(static_cast<std::size_t>(cfg_.goalseq_trial_length + 2));
        target_seq_[0] = rng.uniform_int(cfg_.goal_types);
        for (std::size_t i = 1; i < target_seq_.size(); ++i) {
            const int offset = 1 + rng.uniform_int(cfg_.goal_types - 1);
            target_seq_[i] = (target_seq_[i - 1] + offset) % cfg_.goal_types;
        }
    }

    // Layout: goal tiles on distinct interior cells. Re-randomised every
    // episode in both modes; the target sequence is what stays fixed
    // in-weights.
    void begin_episode(RngStream& layout_rng) {
        for (int g = 0; g < 3; ++g) {
            while (true) {
                const int row = 1 + layout_rng.uniform_int(cfg_.grid_size - 2);
                const int col = 1 + layout_rng.uniform_int(cfg_.grid_size - 2);
                bool clash = false;
                for (int h = 0; h < g; ++h)
                    if (goal_pos_[static_cast<std::size_t>(h)] == std::pair{row, col}) clash = true;
                if (!clash) {
                    goal_pos_[static_cast<std::size_t>(g)] = {row, col};
                    break;
                }
            }
        }
        begin_trial(layout_rng);
    }

    // Poses re-randomised per trial over interior non-goal cells.
    void begin_trial(RngStream& layout_rng) {
        for (auto& s : slots_) {
            while (true) {
                const int row = 1 + layout_rng.uniform_int(cfg_.grid_size - 2);
                const int col = 1 + layout_rng.uniform_int(cfg_.grid_size - 2);
                if (goal_type_at(row, col) < 0) {
                    s.pose = Pose{row, col, layout_rng.uniform_int(4)};
                    break;
                }
            }
            s.progress = 0;
            s.belief_progress = 0;
            s.active = true;
        }
    }

    bool is_wall(int row, int col) const {
        return row <= 0 || col <= 0 || row >= cfg_.grid_size - 1 || col >= cfg_.grid_size - 1;
    }

    int goal_type_at(int row, int col) const {
        for (int g = 0; g < 3; ++g)
            if (goal_pos_[static_cast<std::size_t>(g)] == std::pair{row, col}) return g;
        return -1;
    }

    static std::pair<int, int> forward_of(int heading) {
        static constexpr std::array<std::pair<int, int>, 4> dirs{{{-1, 0}, {0, 1}, {1, 0}, {0, -1}}};
        return dirs[static_cast<std::size_t>(heading)];
    }

    static std::pair<int, int> right_of(int heading) { return forward_of((heading + 1) & 3); }

    // Actions: 0 = forward, 1 = turn left, 2 = turn right.
    StepOutcome step(int slot_index, int action) {
        Slot& s = slots_.at(static_cast<std::size_t>(slot_index));
        if (!s.active) throw ContractViolation("step on an inactive Goal Sequence slot");
        StepOutcome out;
        if (action == 1) {
            s.pose.heading = (s.pose.heading + 3) & 3;
            return out;
        }
        if (action == 2) {
            s.pose.heading = (s.pose.heading + 1) & 3;
            return out;
        }
        if (action != 0) throw ContractViolation("action out of range");
        const auto [dr, dc] = forward_of(s.pose.heading);
        const int row = s.pose.row + dr;
        const int col = s.pose.col + dc;
        if (is_wall(row, col)) return out;  // blocked move is a no-op
        s.pose.row = row;
        s.pose.col = col;
        const int goal = goal_type_at(row, col);
        if (goal >= 0) {
            // Rewards follow the true sequence; re-triggering a tile
            // requires leaving and re-entering it.
            if (goal == target_seq_[static_cast<std::size_t>(s.progress)]) {
                out.reward = 1.0;
                ++s.progress;
            } else {
                out.reward = -1.0;
            }
            const auto& believed = believed_[static_cast<std::size_t>(slot_index)];
            if (!believed.empty() && goal == believed[static_cast<std::size_t>(s.belief_progress)])
                ++s.belief_progress;
        }
        return out;
    }

    bool slot_active(int slot_index) const { return slots_[static_cast<std::size_t>(slot_index)].active; }

    int task_width() const { return 45; }

    // Egocentric 3x3 window directly in front of the viewer, rotated into
    // the agent frame: row 0 is farthest ahead, column 1 is straight ahead.
    // Flat layout is cell-major with 5 channels per cell:
    // {goal0, goal1, goal2, wall, agent}. Cells beyond the grid read as
    // wall. Other slots appear in the agent channel only where
    // peers_visible marks their slot index true.
    void write_task(int slot_index, Eigen::Ref<Vec> out, const std::vector<bool>& peers_visible) const {
        const Pose& pose = slots_[static_cast<std::size_t>(slot_index)].pose;
        const auto [fr, fc] = forward_of(pose.heading);
        const auto [rr, rc] = right_of(pose.heading);
        out.setZero();
        for (int vr = 0; vr < 3; ++vr) {
            for (int vc = 0; vc < 3; ++vc) {
                const int dist = 3 - vr;
                const int lateral = vc - 1;
                const int row = pose.row + fr * dist + rr * lateral;
                const int col = pose.col + fc * dist + rc * lateral;
                const int base = (vr * 3 + vc) * 5;
                if (is_wall(row, col)) {
                    out[base + 3] = 1.0;
                    continue;
                }
                const int goal = goal_type_at(row, col);
                if (goal >= 0) out[base + goal] = 1.0;
                for (std::size_t other = 0; other < slots_.size(); ++other) {
                    if (static_cast<int>(other) == slot_index) continue;
                    if (other >= peers_visible.size() || !peers_visible[other]) continue;
                    const Pose& p = slots_[other].pose;
                    if (p.row == row && p.col == col) out[base + 4] = 1.0;
                }
            }
        }
    }

    int peer_code_for(int) const { return -1; }  // peers appear in the grid, not as a block

    // Per-episode corruption of the believed sequence: each entry is
    // independently replaced by a uniformly random wrong type with
    // probability epsilon.
    void oracle_prepare(int slot_index, double epsilon, RngStream& rng) {
        auto& believed = believed_.at(static_cast<std::size_t>(slot_index));
        believed = target_seq_;
        for (auto& g : believed) {
            if (rng.bernoulli(epsilon)) g = (g + 1 + rng.uniform_int(cfg_.goal_types - 1)) % cfg_.goal_types;
        }
    }

    // BFS over (row, col, heading) toward the believed next goal, treating
    // the other goal tiles as obstacles so the oracle does not collect
    // penalties in passing. If that leaves the target unreachable the plan
    // is recomputed with goal tiles passable.
    int oracle_action(int slot_index, RngStream&) const {
        const Slot& s = slots_[static_cast<std::size_t>(slot_index)];
        const auto& believed = believed_[static_cast<std::size_t>(slot_index)];
        const int target = believed[static_cast<std::size_t>(s.belief_progress)];
        int action = bfs_first_action(s.pose, target, /*avoid_other_goals=*/true);
        if (action < 0) action = bfs_first_action(s.pose, target, /*avoid_other_goals=*/false);
        return action < 0 ? 2 : action;
    }

    int bfs_first_action(const Pose& start, int target_goal, bool avoid_other_goals) const {
        const int n = cfg_.grid_size;
        const auto index = [&](int row, int col, int heading) { return (row * n + col) * 4 + heading; };
        std::vector<int> parent_action(static_cast<std::size_t>(n * n * 4), -2);
        std::vector<int> parent_state(static_cast<std::size_t>(n * n * 4), -1);
        std::vector<int> queue;
        const int start_state = index(start.row, start.col, start.heading);
        parent_action[static_cast<std::size_t>(start_state)] = -1;
        queue.push_back(start_state);
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const int state = queue[head];
            const int heading = state & 3;
            const int col = (state >> 2) % n;
            const int row = (state >> 2) / n;
            if (goal_type_at(row, col) == target_goal && state != start_state) {
                int cur = state;
                int act = parent_action[static_cast<std::size_t>(cur)];
                while (parent_state[static_cast<std::size_t>(cur)] != -1 &&
                       parent_state[static_cast<std::size_t>(cur)] != start_state) {
                    cur = parent_state[static_cast<std::size_t>(cur)];
                    act = parent_action[static_cast<std::size_t>(cur)];
                }
                return act;
            }
            for (int action : {0, 1, 2}) {
                int nrow = row, ncol = col, nheading = heading;
                if (action == 0) {
                    const auto [dr, dc] = forward_of(heading);
                    nrow += dr;
                    ncol += dc;
                    if (is_wall(nrow, ncol)) continue;
                    const int goal = goal_type_at(nrow, ncol);
                    if (avoid_other_goals && goal >= 0 && goal != target_goal) continue;
                } else if (action == 1) {
                    nheading = (heading + 3) & 3;
                } else {
                    nheading = (heading + 1) & 3;
                }
                const int next = index(nrow, ncol, nheading);
                if (parent_action[static_cast<std::size_t>(next)] != -2) continue;
                parent_action[static_cast<std::size_t>(next)] = action;
                parent_state[static_cast<std::size_t>(next)] = state;
                queue.push_back(next);
            }
        }
        return -1;
    }

private:
    EnvConfig cfg_;
    std::vector<int> target_seq_;
    std::array<std::pair<int, int>, 3> goal_pos_{};
    std::vector<Slot> slots_;
    std::vector<std::vector<int>> believed_;  // indexed by slot
};

}  // namespace lineage
