#pragma once

// Uniform access to the three task families plus the plain-text instance
// key that regenerates any sampled instance exactly: the content of an
// instance is a pure function of (env kind, mode, seed, stream id).

#include <cstdint>
#include <sstream>
#include <string>
#include <variant>

#include "lineage/env/common.hpp"
#include "lineage/env/goal_seq.hpp"
#include "lineage/env/memory_seq.hpp"
#include "lineage/env/tsp.hpp"

namespace lineage {

using EnvState = std::variant<MemorySeqEnv, GoalSeqEnv, TspEnv>;

inline EnvState make_env(const EnvConfig& cfg) {
    switch (cfg.kind) {
        case EnvKind::MemorySeq: return MemorySeqEnv(cfg);
        case EnvKind::GoalSeq: return GoalSeqEnv(cfg);
        case EnvKind::Tsp: return TspEnv(cfg);
    }
    throw ConfigError("bad env kind");
}

struct InstanceKey {
    EnvKind kind = EnvKind::MemorySeq;
    Mode mode = Mode::InContext;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    std::string to_string() const {
        std::ostringstream out;
        out << "instance " << lineage::to_string(kind) << " " << lineage::to_string(mode)
            << " seed=" << seed << " stream=" << stream;
        return out.str();
    }

    static InstanceKey parse(const std::string& text) {
        std::istringstream in(text);
        std::string tag, kind_s, mode_s, seed_s, stream_s;
        in >> tag >> kind_s >> mode_s >> seed_s >> stream_s;
        if (tag != "instance" || seed_s.rfind("seed=", 0) != 0 || stream_s.rfind("stream=", 0) != 0)
            throw ConfigError("malformed instance key: " + text);
        InstanceKey key;
        key.kind = env_kind_from_string(kind_s);
        key.mode = mode_from_string(mode_s);
        key.seed = std::stoull(seed_s.substr(5));
        key.stream = std::stoull(stream_s.substr(7));
        return key;
    }
};

// Samples instance content from the key's stream. Instance layout (goal
// positions, poses) is episode-level state and drawn separately by the
// runner; the key pins exactly the content that "fixed" refers to in each
// mode: the digit sequence, the target sequence, the city set.
inline EnvState sample_instance(const EnvConfig& cfg, const InstanceKey& key) {
    EnvState env = make_env(cfg);
    RngStream rng(key.seed, key.stream);
    std::visit([&](auto& e) { e.sample_content(rng); }, env);
    return env;
}

// Convenience visitors used by the runners.

inline void env_sample_content(EnvState& env, RngStream& rng) {
    std::visit([&](auto& e) { e.sample_content(rng); }, env);
}

inline void env_begin_episode(EnvState& env, RngStream& rng) {
    std::visit([&](auto& e) { e.begin_episode(rng); }, env);
}

inline void env_begin_trial(EnvState& env, RngStream& rng) {
    std::visit([&](auto& e) { e.begin_trial(rng); }, env);
}

inline StepOutcome env_step(EnvState& env, int slot, int action) {
    return std::visit([&](auto& e) { return e.step(slot, action); }, env);
}

inline bool env_slot_active(const EnvState& env, int slot) {
    return std::visit([&](const auto& e) { return e.slot_active(slot); }, env);
}

inline void env_write_task(const EnvState& env, int slot, Eigen::Ref<Vec> out,
                           const std::vector<bool>& peers_visible) {
    std::visit([&](const auto& e) { e.write_task(slot, out, peers_visible); }, env);
}

inline int env_peer_code(const EnvState& env, int action) {
    return std::visit([&](const auto& e) { return e.peer_code_for(action); }, env);
}

inline void env_oracle_prepare(EnvState& env, int slot, double epsilon, RngStream& rng) {
    std::visit([&](auto& e) { e.oracle_prepare(slot, epsilon, rng); }, env);
}

inline int env_oracle_action(const EnvState& env, int slot, RngStream& rng) {
    return std::visit([&](const auto& e) { return e.oracle_action(slot, rng); }, env);
}

}  // namespace lineage
