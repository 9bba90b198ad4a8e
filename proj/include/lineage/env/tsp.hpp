#pragma once

// Partially observable travelling salesperson. Cities live in the unit
// square but their coordinates are never observed; the agent sees only its
// current city and the visited mask. A valid move to an unvisited city j
// pays (sqrt(2) - dist(cur, j)) / sqrt(2); selecting any visited city
// (including the current one) pays -1 and ends the trial. Every slot
// starts at city 0 with {0} visited.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lineage/env/common.hpp"
#include "lineage/rng.hpp"

namespace lineage {

class TspEnv {
public:
    struct Slot {
        int current = 0;
        std::uint64_t visited = 1;  // bitmask, city 0 pre-visited
        int visited_count = 1;
        bool active = true;
    };

    explicit TspEnv(const EnvConfig& cfg)
        : cfg_(cfg), slots_(static_cast<std::size_t>(1 + cfg.demo_slots)),
          jittered_(static_cast<std::size_t>(1 + cfg.demo_slots)) {}

    const EnvConfig& config() const { return cfg_; }
    const std::vector<std::pair<double, double>>& cities() const { return cities_; }
    Slot& slot(int i) { return slots_[static_cast<std::size_t>(i)]; }
    const Slot& slot(int i) const { return slots_[static_cast<std::size_t>(i)]; }

    void sample_content(RngStream& rng) {
        cities_.resize(static_cast<std::size_t>(cfg_.city_count));
        for (auto& c : cities_) {
            c.first = rng.uniform();
            c.second = rng.uniform();
        }
    }

    void begin_episode(RngStream& layout_rng) { begin_trial(layout_rng); }

    void begin_trial(RngStream&) {
        for (auto& s : slots_) s = Slot{};
    }

    double distance(int a, int b) const {
        const auto& ca = cities_[static_cast<std::size_t>(a)];
        const auto& cb = cities_[static_cast<std::size_t>(b)];
        return std::hypot(ca.first - cb.first, ca.second - cb.second);
    }

    StepOutcome step(int slot_index, int city) {
        Slot& s = slots_.at(static_cast<std::size_t>(slot_index));
        if (!s.active) throw ContractViolation("step on an inactive TSP slot");
        if (city < 0 || city >= cfg_.city_count) throw ContractViolation("city out of range");
        StepOutcome out;
        if (s.visited & (1ULL << city)) {
            out.reward = -1.0;
            out.trial_done = true;
            s.active = false;
            return out;
        }
        constexpr double sqrt2 = 1.4142135623730951;
        out.reward = (sqrt2 - distance(s.current, city)) / sqrt2;
        s.current = city;
        s.visited |= 1ULL << city;
        ++s.visited_count;
        out.trial_done = s.visited_count == cfg_.city_count;
        if (out.trial_done) s.active = false;
        return out;
    }

    bool slot_active(int slot_index) const { return slots_[static_cast<std::size_t>(slot_index)].active; }

    int task_width() const { return 2 * cfg_.city_count; }

    void write_task(int slot_index, Eigen::Ref<Vec> out, const std::vector<bool>&) const {
        const Slot& s = slots_[static_cast<std::size_t>(slot_index)];
        out.setZero();
        out[s.current] = 1.0;
        for (int j = 0; j < cfg_.city_count; ++j)
            if (s.visited & (1ULL << j)) out[cfg_.city_count + j] = 1.0;
    }

    int peer_code_for(int action) const { return action; }

    // Per-episode corruption: every city coordinate is jittered once by
    // isotropic Gaussian noise of std epsilon and clamped to the unit
    // square. The oracle then walks nearest-neighbour on its jittered map.
    void oracle_prepare(int slot_index, double epsilon, RngStream& rng) {
        auto& jit = jittered_.at(static_cast<std::size_t>(slot_index));
        jit = cities_;
        for (auto& c : jit) {
            c.first = std::clamp(c.first + epsilon * rng.normal(), 0.0, 1.0);
            c.second = std::clamp(c.second + epsilon * rng.normal(), 0.0, 1.0);
        }
    }

    int oracle_action(int slot_index, RngStream& rng) const {
        const Slot& s = slots_[static_cast<std::size_t>(slot_index)];
        const auto& jit = jittered_[static_cast<std::size_t>(slot_index)];
        int best = -1;
        double best_dist = 0.0;
        for (int j = 0; j < cfg_.city_count; ++j) {
            if (s.visited & (1ULL << j)) continue;
            const double dx = jit[static_cast<std::size_t>(j)].first - jit[static_cast<std::size_t>(s.current)].first;
            const double dy = jit[static_cast<std::size_t>(j)].second - jit[static_cast<std::size_t>(s.current)].second;
            const double d = dx * dx + dy * dy;
            if (best < 0 || d < best_dist) {
                best = j;
                best_dist = d;
            }
        }
        if (best >= 0 && !(s.visited & (1ULL << best))) return best;
        // Unvisited candidates exhausted or stale choice: uniform unvisited.
        std::vector<int> open;
        for (int j = 0; j < cfg_.city_count; ++j)
            if (!(s.visited & (1ULL << j))) open.push_back(j);
        if (open.empty()) throw ContractViolation("oracle_action on a completed TSP slot");
        return open[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(open.size())))];
    }

private:
    EnvConfig cfg_;
    std::vector<std::pair<double, double>> cities_;
    std::vector<Slot> slots_;
    std::vector<std::vector<std::pair<double, double>>> jittered_;  // indexed by slot
};

}  // namespace lineage
