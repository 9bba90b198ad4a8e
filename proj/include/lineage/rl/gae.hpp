#pragma once

// Generalized advantage estimation over one lane of a rollout segment.
// done[t] marks a termination at step t: bootstrapping is cut there and
// the advantage recursion restarts.

#include <cstdint>
#include <vector>

#include "lineage/errors.hpp"

namespace lineage {

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> value_targets;
};

inline GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                             const std::vector<std::uint8_t>& dones, double bootstrap_value,
                             double gamma, double lambda) {
    const std::size_t n = rewards.size();
    if (values.size() != n || dones.size() != n)
        throw ContractViolation("compute_gae arrays must have equal length");
    GaeResult out;
    out.advantages.resize(n);
    out.value_targets.resize(n);
    double gae = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        const double not_done = dones[i] ? 0.0 : 1.0;
        const double next_value = (i + 1 < n) ? values[i + 1] : bootstrap_value;
        const double delta = rewards[i] + gamma * next_value * not_done - values[i];
        gae = delta + gamma * lambda * not_done * gae;
        out.advantages[i] = gae;
        out.value_targets[i] = gae + values[i];
    }
    return out;
}

}  // namespace lineage
