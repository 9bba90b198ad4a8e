#pragma once

// Quick invariant suite behind the `selftest` CLI command: gradient
// checks, the GAE brute-force oracle, environment invariants and
// checkpoint round-trips. The acceptance suite runs the same oracles at
// their full budgets.

#include <cstdio>
#include <ostream>
#include <sstream>
#include <vector>

#include "lineage/accum/pipelines.hpp"
#include "lineage/harness/gradcheck.hpp"
#include "lineage/net/param_set.hpp"
#include "lineage/rl/gae.hpp"

namespace lineage {

// Explicit (gamma*lambda)-weighted double sum over deltas, cut at
// terminations; the independent reference for the recursive GAE.
inline std::vector<double> gae_double_sum_reference(const std::vector<double>& rewards,
                                                    const std::vector<double>& values,
                                                    const std::vector<std::uint8_t>& dones,
                                                    double bootstrap_value, double gamma,
                                                    double lambda) {
    const std::size_t n = rewards.size();
    std::vector<double> advantages(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double acc = 0.0;
        double weight = 1.0;
        for (std::size_t l = t; l < n; ++l) {
            const double not_done = dones[l] ? 0.0 : 1.0;
            const double next_value = (l + 1 < n) ? values[l + 1] : bootstrap_value;
            const double delta = rewards[l] + gamma * next_value * not_done - values[l];
            acc += weight * delta;
            if (dones[l]) break;
            weight *= gamma * lambda;
        }
        advantages[t] = acc;
    }
    return advantages;
}

struct CheckResult {
    std::string name;
    bool ok = false;
    std::string detail;
};

namespace selftest_detail {

inline CheckResult check_annealing() {
    CheckResult r{"annealing endpoints", true, ""};
    r.ok = anneal_in_context(0, 4) == 1.0 && anneal_in_context(3, 4) == 0.0 &&
           anneal_in_weights(0, 100000) == 1.0 && anneal_in_weights(99999, 100000) == 0.0;
    return r;
}

inline CheckResult check_gae_oracle() {
    CheckResult r{"GAE vs double-sum oracle", true, ""};
    RngStream rng(7, 1);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 16;
        std::vector<double> rewards, values;
        std::vector<std::uint8_t> dones;
        for (int i = 0; i < n; ++i) {
            rewards.push_back(rng.uniform(-1.0, 1.0));
            values.push_back(rng.uniform(-1.0, 1.0));
            dones.push_back(rng.bernoulli(0.2) ? 1 : 0);
        }
        const double bootstrap = rng.uniform(-1.0, 1.0);
        const auto fast = compute_gae(rewards, values, dones, bootstrap, 0.99, 0.95);
        const auto slow = gae_double_sum_reference(rewards, values, dones, bootstrap, 0.99, 0.95);
        for (int i = 0; i < n; ++i)
            worst = std::max(worst, std::abs(fast.advantages[static_cast<std::size_t>(i)] -
                                             slow[static_cast<std::size_t>(i)]));
    }
    std::ostringstream d;
    d << "max abs err " << worst;
    r.detail = d.str();
    r.ok = worst < 1e-10;
    return r;
}

inline CheckResult check_gradients() {
    CheckResult r{"BPTT gradients vs finite differences", true, ""};
    const auto flat = run_gradcheck(false, 5, 2, 99);
    const auto conv = run_gradcheck(true, 5, 2, 99);
    std::ostringstream d;
    d << "flat " << flat.max_rel_err << ", conv " << conv.max_rel_err;
    r.detail = d.str();
    r.ok = flat.max_rel_err < 1e-3 && conv.max_rel_err < 1e-3;
    return r;
}

inline CheckResult check_memory_env() {
    CheckResult r{"memory perfect play scores the full sequence", true, ""};
    EnvConfig cfg = EnvConfig::defaults(EnvKind::MemorySeq, Mode::InWeights);
    cfg.demo_slots = 1;
    MemorySeqEnv env(cfg);
    RngStream rng(3, 3);
    env.sample_content(rng);
    env.begin_episode(rng);
    double total = 0.0;
    for (int i = 0; i < cfg.sequence_length; ++i)
        total += env.step(0, env.sequence()[static_cast<std::size_t>(i)]).reward;
    r.ok = total == 24.0;
    return r;
}

inline CheckResult check_tsp_env() {
    CheckResult r{"tsp rewards in range, revisit terminates", true, ""};
    EnvConfig cfg = EnvConfig::defaults(EnvKind::Tsp, Mode::InContext);
    cfg.demo_slots = 1;
    TspEnv env(cfg);
    RngStream rng(5, 8);
    env.sample_content(rng);
    env.begin_episode(rng);
    for (int city = 1; city < cfg.city_count; ++city) {
        const auto out = env.step(0, city);
        if (!(out.reward > 0.0 && out.reward <= 1.0)) r.ok = false;
    }
    env.begin_trial(rng);
    const auto revisit = env.step(0, 0);
    if (!(revisit.reward == -1.0 && revisit.trial_done)) r.ok = false;
    return r;
}

inline CheckResult check_goalseq_oracle() {
    CheckResult r{"goalseq noise-free oracle earns positive return", true, ""};
    EnvConfig cfg = EnvConfig::defaults(EnvKind::GoalSeq, Mode::InContext);
    cfg.demo_slots = 1;
    double total = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        GoalSeqEnv env(cfg);
        RngStream rng(100 + static_cast<std::uint64_t>(rep), 1);
        env.sample_content(rng);
        env.begin_episode(rng);
        env.oracle_prepare(1, 0.0, rng);
        for (int t = 0; t < cfg.goalseq_trial_length; ++t)
            total += env.step(1, env.oracle_action(1, rng)).reward;
    }
    std::ostringstream d;
    d << "mean trial return " << total / 20.0;
    r.detail = d.str();
    r.ok = total > 0.0;
    return r;
}

inline CheckResult check_instance_fixity() {
    CheckResult r{"in-weights content fixed across episodes", true, ""};
    EnvConfig cfg = EnvConfig::defaults(EnvKind::MemorySeq, Mode::InWeights);
    const InstanceKey key{cfg.kind, cfg.mode, 11, 22};
    EnvState a = sample_instance(cfg, key);
    EnvState b = sample_instance(cfg, key);
    r.ok = std::get<MemorySeqEnv>(a).sequence() == std::get<MemorySeqEnv>(b).sequence();
    const InstanceKey parsed = InstanceKey::parse(key.to_string());
    r.ok = r.ok && parsed.seed == key.seed && parsed.stream == key.stream;
    return r;
}

inline CheckResult check_checkpoint_roundtrip() {
    CheckResult r{"checkpoint round-trip is exact", true, ""};
    EnvConfig env = EnvConfig::defaults(EnvKind::MemorySeq, Mode::InContext);
    const NetConfig cfg = NetConfig::for_env(env, obs_layout(env), 0.1);
    RngStream rng(17, 4);
    const ParamSet params = init_params(cfg, rng);
    const std::string path = "/tmp/lineage_selftest.ckpt";
    save_checkpoint(params, path);
    const ParamSet loaded = load_checkpoint(path);
    r.ok = params.equals(loaded);
    std::remove(path.c_str());
    return r;
}

}  // namespace selftest_detail

inline std::vector<CheckResult> run_selftest_checks() {
    using namespace selftest_detail;
    return {check_annealing(),     check_gae_oracle(),          check_gradients(),
            check_memory_env(),    check_tsp_env(),             check_goalseq_oracle(),
            check_instance_fixity(), check_checkpoint_roundtrip()};
}

inline bool run_selftest(std::ostream& out) {
    bool all_ok = true;
    for (const CheckResult& c : run_selftest_checks()) {
        out << (c.ok ? "[ok]   " : "[FAIL] ") << c.name;
        if (!c.detail.empty()) out << " (" << c.detail << ")";
        out << "\n";
        all_ok = all_ok && c.ok;
    }
    out << (all_ok ? "selftest passed\n" : "selftest FAILED\n");
    return all_ok;
}

}  // namespace lineage
