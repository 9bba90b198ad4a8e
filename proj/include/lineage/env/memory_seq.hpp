#pragma once

// Memory Sequence: predict the next digit of a hidden sequence. +1 for a
// correct prediction, -1 otherwise. In the in-context setting a slot's
// trial ends on its first error (or at the max length); in the in-weights
// setting the episode always runs the full sequence length.

#include <Eigen/Dense>
#include <vector>

#include "lineage/env/common.hpp"
#include "lineage/rng.hpp"

namespace lineage {

class MemorySeqEnv {
public:
    struct Slot {
        int position = 0;
        bool active = true;
        // Scripted oracles demonstrate through their own mistakes; learner
        // and replayed-demonstrator slots terminate on error in-context.
        bool terminate_on_error = true;
    };

    explicit MemorySeqEnv(const EnvConfig& cfg)
        : cfg_(cfg), slots_(static_cast<std::size_t>(1 + cfg.demo_slots)),
          corrupted_(static_cast<std::size_t>(1 + cfg.demo_slots)) {}

    const EnvConfig& config() const { return cfg_; }
    const std::vector<int>& sequence() const { return sequence_; }
    Slot& slot(int i) { return slots_[static_cast<std::size_t>(i)]; }
    const Slot& slot(int i) const { return slots_[static_cast<std::size_t>(i)]; }

    void sample_content(RngStream& rng) {
        sequence_.resize(static_cast<std::size_t>(cfg_.sequence_length));
        for (auto& digit : sequence_) digit = rng.uniform_int(cfg_.alphabet);
    }

    void begin_episode(RngStream& layout_rng) { begin_trial(layout_rng); }

    void begin_trial(RngStream&) {
        for (auto& s : slots_) {
            s.position = 0;
            s.active = true;
        }
    }

    StepOutcome step(int slot_index, int digit) {
        Slot& s = slots_.at(static_cast<std::size_t>(slot_index));
        if (!s.active) throw ContractViolation("step on an inactive Memory Sequence slot");
        if (digit < 0 || digit >= cfg_.alphabet) throw ContractViolation("digit out of range");
        const bool correct = digit == sequence_[static_cast<std::size_t>(s.position)];
        ++s.position;
        StepOutcome out;
        out.reward = correct ? 1.0 : -1.0;
        const bool exhausted = s.position >= cfg_.sequence_length;
        if (cfg_.mode == Mode::InContext)
            out.trial_done = exhausted || (!correct && s.terminate_on_error);
        else
            out.trial_done = exhausted;
        if (out.trial_done) s.active = false;
        return out;
    }

    bool slot_active(int slot_index) const { return slots_[static_cast<std::size_t>(slot_index)].active; }

    int task_width() const { return 0; }
    void write_task(int, Eigen::Ref<Vec>, const std::vector<bool>&) const {}
    int peer_code_for(int action) const { return action; }

    // Freezes a corrupted copy of the sequence for one oracle slot: each
    // position is independently replaced by a uniformly random wrong digit
    // with probability epsilon, once per episode.
    void oracle_prepare(int slot_index, double epsilon, RngStream& rng) {
        auto& corrupted = corrupted_.at(static_cast<std::size_t>(slot_index));
        corrupted = sequence_;
        for (auto& digit : corrupted) {
            if (rng.bernoulli(epsilon))
                digit = (digit + 1 + rng.uniform_int(cfg_.alphabet - 1)) % cfg_.alphabet;
        }
    }

    int oracle_action(int slot_index, RngStream&) const {
        const Slot& s = slots_[static_cast<std::size_t>(slot_index)];
        return corrupted_[static_cast<std::size_t>(slot_index)][static_cast<std::size_t>(s.position)];
    }

    const std::vector<int>& corrupted_sequence(int slot_index) const {
        return corrupted_[static_cast<std::size_t>(slot_index)];
    }

private:
    EnvConfig cfg_;
    std::vector<int> sequence_;
    std::vector<Slot> slots_;
    std::vector<std::vector<int>> corrupted_;  // indexed by slot
};

}  // namespace lineage
