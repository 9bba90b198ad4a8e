#pragma once

// Generation bookkeeping: per-member artifacts and returns, best-member
// selection, and demonstrator panel ordering.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "lineage/env/common.hpp"
#include "lineage/net/param_set.hpp"
#include "lineage/observation.hpp"

namespace lineage {

struct MemberOutcome {
    std::vector<double> trial_returns;  // per-trial returns (episodic setting)
    double final_metric = 0.0;          // final-trial return, or eval-batch mean return
    Mat reset_state;                    // hidden-state artifact [hidden x 1]
    ParamSet params;                    // weight artifact (train-time generations)
};

struct GenerationRecord {
    int generation = 1;
    int best_index = 0;
    std::vector<MemberOutcome> members;
};

// Argmax with ties broken toward the lowest index.
inline int select_best(const std::vector<double>& finals) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(finals.size()); ++i)
        if (finals[static_cast<std::size_t>(i)] > finals[static_cast<std::size_t>(best)]) best = i;
    return best;
}

// Demonstrator panel order when the whole previous generation is observed.
// Episodic accumulation sorts by recorded performance (best first, ties by
// index); train-time accumulation keeps member order, where ordering is
// immaterial.
inline std::vector<int> selective_panel_order(const std::vector<double>& finals, Mode mode) {
    std::vector<int> order(finals.size());
    std::iota(order.begin(), order.end(), 0);
    if (mode == Mode::InContext) {
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return finals[static_cast<std::size_t>(a)] > finals[static_cast<std::size_t>(b)];
        });
    }
    return order;
}

}  // namespace lineage
