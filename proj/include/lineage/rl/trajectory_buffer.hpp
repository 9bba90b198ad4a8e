#pragma once

// Rollout storage for recurrent PPO: rectangular [rollout_length x lanes],
// with the hidden state at the segment start kept per lane so minibatch
// updates can rerun the forward pass.

#include <cstdint>
#include <vector>

#include "lineage/observation.hpp"

namespace lineage {

struct TrajectoryBuffer {
    int lanes = 0;
    int length = 0;

    std::vector<Mat> obs;                                // [t] -> [obs_width x lanes]
    std::vector<std::vector<int>> actions;               // [t][lane]
    std::vector<std::vector<double>> log_probs;          // [t][lane]
    std::vector<std::vector<double>> values;             // [t][lane]
    std::vector<std::vector<double>> rewards;            // [t][lane]
    std::vector<std::vector<std::uint8_t>> episode_done; // [t][lane]
    std::vector<std::vector<std::uint8_t>> trial_done;   // [t][lane]
    Mat initial_hidden;                                  // [hidden x lanes]
    std::vector<double> bootstrap_value;                 // [lane]

    // Filled by the update step.
    std::vector<std::vector<double>> advantages;
    std::vector<std::vector<double>> value_targets;

    void configure(int obs_width, int hidden_width, int rollout_length, int lane_count) {
        lanes = lane_count;
        length = rollout_length;
        obs.assign(static_cast<std::size_t>(length), Mat::Zero(obs_width, lanes));
        const auto zeros_d = std::vector<double>(static_cast<std::size_t>(lanes), 0.0);
        const auto zeros_i = std::vector<int>(static_cast<std::size_t>(lanes), 0);
        const auto zeros_b = std::vector<std::uint8_t>(static_cast<std::size_t>(lanes), 0);
        actions.assign(static_cast<std::size_t>(length), zeros_i);
        log_probs.assign(static_cast<std::size_t>(length), zeros_d);
        values.assign(static_cast<std::size_t>(length), zeros_d);
        rewards.assign(static_cast<std::size_t>(length), zeros_d);
        episode_done.assign(static_cast<std::size_t>(length), zeros_b);
        trial_done.assign(static_cast<std::size_t>(length), zeros_b);
        advantages.assign(static_cast<std::size_t>(length), zeros_d);
        value_targets.assign(static_cast<std::size_t>(length), zeros_d);
        initial_hidden = Mat::Zero(hidden_width, lanes);
        bootstrap_value.assign(static_cast<std::size_t>(lanes), 0.0);
    }
};

}  // namespace lineage
