#pragma once

#include <string>

#include "lineage/errors.hpp"
#include "lineage/observation.hpp"

namespace lineage {

enum class EnvKind { MemorySeq, GoalSeq, Tsp };
enum class Mode { InContext, InWeights };

inline std::string to_string(EnvKind kind) {
    switch (kind) {
        case EnvKind::MemorySeq: return "memory";
        case EnvKind::GoalSeq: return "goalseq";
        case EnvKind::Tsp: return "tsp";
    }
    return "?";
}

inline std::string to_string(Mode mode) {
    return mode == Mode::InContext ? "icl" : "iwl";
}

inline EnvKind env_kind_from_string(const std::string& s) {
    if (s == "memory") return EnvKind::MemorySeq;
    if (s == "goalseq") return EnvKind::GoalSeq;
    if (s == "tsp") return EnvKind::Tsp;
    throw ConfigError("unknown env kind: " + s);
}

inline Mode mode_from_string(const std::string& s) {
    if (s == "icl") return Mode::InContext;
    if (s == "iwl") return Mode::InWeights;
    throw ConfigError("unknown mode: " + s);
}

struct StepOutcome {
    double reward = 0.0;
    bool trial_done = false;
};

struct EnvConfig {
    EnvKind kind = EnvKind::MemorySeq;
    Mode mode = Mode::InContext;
    int trials_per_episode = 4;  // K; 1 in the in-weights setting
    int demo_slots = 1;          // demonstrator slots allocated alongside the learner

    // Memory Sequence
    int alphabet = 3;
    int sequence_length = 24;

    // Goal Sequence
    int grid_size = 7;
    int goal_types = 3;
    int goalseq_trial_length = 30;

    // TSP
    int city_count = 6;

    static EnvConfig defaults(EnvKind kind, Mode mode) {
        EnvConfig cfg;
        cfg.kind = kind;
        cfg.mode = mode;
        switch (kind) {
            case EnvKind::MemorySeq:
                cfg.alphabet = (mode == Mode::InContext) ? 3 : 10;
                cfg.sequence_length = 24;
                cfg.trials_per_episode = (mode == Mode::InContext) ? 4 : 1;
                break;
            case EnvKind::GoalSeq:
                cfg.goalseq_trial_length = (mode == Mode::InContext) ? 30 : 50;
                cfg.trials_per_episode = (mode == Mode::InContext) ? 4 : 1;
                break;
            case EnvKind::Tsp:
                cfg.city_count = (mode == Mode::InContext) ? 6 : 24;
                cfg.trials_per_episode = (mode == Mode::InContext) ? 8 : 1;
                break;
        }
        return cfg;
    }

    int action_count() const {
        switch (kind) {
            case EnvKind::MemorySeq: return alphabet;
            case EnvKind::GoalSeq: return 3;  // forward, turn left, turn right
            case EnvKind::Tsp: return city_count;
        }
        return 0;
    }

    // Steps per trial; early-terminating tasks treat this as a cap.
    int trial_length() const {
        switch (kind) {
            case EnvKind::MemorySeq: return sequence_length;
            case EnvKind::GoalSeq: return goalseq_trial_length;
            case EnvKind::Tsp: return city_count;
        }
        return 0;
    }
};

// Observation layout is a pure function of the env config (including K and
// the demonstrator panel size). Goal Sequence carries the demonstrator and
// the last action inside its egocentric grid and therefore appends neither
// a peer block nor an action block.
inline ObsLayout obs_layout(const EnvConfig& cfg) {
    ObsLayout layout;
    layout.trial_width = (cfg.mode == Mode::InContext) ? cfg.trials_per_episode : 0;
    layout.panel_size = cfg.demo_slots;
    switch (cfg.kind) {
        case EnvKind::MemorySeq:
            layout.task_width = 0;
            layout.action_width = cfg.alphabet;
            layout.peer_width = cfg.alphabet;
            layout.flag_width = 1;
            break;
        case EnvKind::GoalSeq:
            layout.task_width = 3 * 3 * 5;  // egocentric window, 5 channels per cell
            layout.action_width = 0;
            layout.peer_width = 0;
            layout.flag_width = 0;
            break;
        case EnvKind::Tsp:
            layout.task_width = 2 * cfg.city_count;  // current city one-hot + visited mask
            layout.action_width = cfg.city_count;
            layout.raw_reward_width = 1;  // fractional rewards keep their raw value
            layout.peer_width = cfg.city_count;
            layout.flag_width = 1;
            break;
    }
    return layout;
}

}  // namespace lineage
