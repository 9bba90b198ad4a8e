#pragma once

// Trial / episode clock and the demonstrator-visibility schedules.
//
// An episode consists of K trials; the recurrent state persists across
// trials and resets at episode boundaries. Visibility of a demonstrator is
// Bernoulli(p_obs) per timestep, with p_obs annealed linearly to zero so
// the final trial (episodic schedule) or the end of training (train-step
// schedule) is always demonstration-free.

#include <cstdint>

#include "lineage/errors.hpp"
#include "lineage/rng.hpp"

namespace lineage {

struct TrialClock {
    int trial_index = 0;        // k in [0, K)
    int trials_per_episode = 1; // K
    int step_in_trial = 0;      // t within the current trial
    int trial_length = 1;       // steps per trial, or a cap for early-terminating tasks

    bool last_trial() const { return trial_index == trials_per_episode - 1; }

    // Advances past a finished trial. Returns true if the episode is over.
    bool end_trial() {
        ++trial_index;
        step_in_trial = 0;
        return trial_index >= trials_per_episode;
    }

    void reset() {
        trial_index = 0;
        step_in_trial = 0;
    }
};

// Episodic schedule: p_obs = 1 - k / (K - 1). Exactly 1 on the first trial
// and exactly 0 on the last.
inline double anneal_in_context(int k, int trials_per_episode) {
    if (trials_per_episode < 2)
        throw ConfigError("anneal_in_context requires at least 2 trials per episode");
    if (k < 0 || k >= trials_per_episode)
        throw ContractViolation("trial index out of range");
    return 1.0 - static_cast<double>(k) / static_cast<double>(trials_per_episode - 1);
}

// Train-step schedule: p_obs = 1 - t / (T - 1).
inline double anneal_in_weights(std::int64_t t, std::int64_t total_steps) {
    if (total_steps < 2)
        throw ConfigError("anneal_in_weights requires at least 2 training steps");
    if (t < 0 || t >= total_steps)
        throw ContractViolation("train step out of range");
    return 1.0 - static_cast<double>(t) / static_cast<double>(total_steps - 1);
}

inline bool visibility_sample(double p_obs, RngStream& rng) {
    return rng.bernoulli(p_obs);
}

}  // namespace lineage
