#include <catch2/catch_amalgamated.hpp>

#include "lineage/env/common.hpp"
#include "lineage/observation.hpp"
#include "lineage/trial_clock.hpp"

using namespace lineage;

TEST_CASE("episodic annealing hits its endpoints exactly") {
    REQUIRE(anneal_in_context(0, 4) == 1.0);
    REQUIRE(anneal_in_context(3, 4) == 0.0);
    REQUIRE(anneal_in_context(1, 4) == Catch::Approx(2.0 / 3.0).margin(1e-15));
    for (int k = 0; k + 1 < 4; ++k) REQUIRE(anneal_in_context(k, 4) > anneal_in_context(k + 1, 4));
    for (int k = 0; k < 4; ++k) {
        REQUIRE(anneal_in_context(k, 4) >= 0.0);
        REQUIRE(anneal_in_context(k, 4) <= 1.0);
    }
}

TEST_CASE("episodic annealing rejects K=1") {
    REQUIRE_THROWS_AS(anneal_in_context(0, 1), ConfigError);
}

TEST_CASE("train-step annealing endpoints and interior") {
    REQUIRE(anneal_in_weights(0, 100000) == 1.0);
    REQUIRE(anneal_in_weights(99999, 100000) == 0.0);
    REQUIRE(anneal_in_weights(49999, 100000) == Catch::Approx(0.5000050000500005).margin(1e-12));
    REQUIRE_THROWS_AS(anneal_in_weights(0, 1), ConfigError);
}

TEST_CASE("degenerate Bernoulli visibilities") {
    RngStream rng(0, 1);
    for (int i = 0; i < 1000; ++i) REQUIRE(visibility_sample(1.0, rng));
    for (int i = 0; i < 1000; ++i) REQUIRE_FALSE(visibility_sample(0.0, rng));
}

TEST_CASE("visibility at p=0.5 has the right empirical mean") {
    RngStream rng(5, 77);
    int hits = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        if (visibility_sample(0.5, rng)) ++hits;
    const double mean = static_cast<double>(hits) / n;
    REQUIRE(mean > 0.49);
    REQUIRE(mean < 0.51);
}

namespace {

ObsLayout memory_layout() {
    EnvConfig cfg = EnvConfig::defaults(EnvKind::MemorySeq, Mode::InContext);
    return obs_layout(cfg);
}

}  // namespace

TEST_CASE("reward one-hot uses class order {-1, 0, +1}") {
    const ObsLayout layout = memory_layout();
    TrialClock clock{0, 4, 0, 24};
    const Vec task(0);
    const auto obs = augment_observation(layout, task, -1, -1.0, clock, {});
    REQUIRE(obs.last_reward()[0] == 1.0);
    REQUIRE(obs.last_reward()[1] == 0.0);
    REQUIRE(obs.last_reward()[2] == 0.0);
}

TEST_CASE("trial one-hot marks the current trial") {
    const ObsLayout layout = memory_layout();
    TrialClock clock{0, 4, 0, 24};
    const Vec task(0);
    const auto obs = augment_observation(layout, task, -1, std::nullopt, clock, {});
    REQUIRE(obs.trial_id()[0] == 1.0);
    REQUIRE(obs.trial_id().sum() == 1.0);
}

TEST_CASE("hidden peer encodes as zeros with the flag down") {
    const ObsLayout layout = memory_layout();
    TrialClock clock{2, 4, 3, 24};
    const Vec task(0);
    const auto obs = augment_observation(layout, task, 1, 1.0, clock, {PeerView{false, 2}});
    REQUIRE(obs.peer_features(0).sum() == 0.0);
    REQUIRE_FALSE(obs.peer_visible());
}

TEST_CASE("visible peer encodes its action one-hot and raises the flag") {
    const ObsLayout layout = memory_layout();
    TrialClock clock{1, 4, 0, 24};
    const Vec task(0);
    const auto obs = augment_observation(layout, task, -1, std::nullopt, clock, {PeerView{true, 2}});
    REQUIRE(obs.peer_features(0)[2] == 1.0);
    REQUIRE(obs.peer_features(0).sum() == 1.0);
    REQUIRE(obs.peer_visible());
}

TEST_CASE("one-hot blocks each sum to zero or one") {
    const ObsLayout layout = memory_layout();
    TrialClock clock{3, 4, 5, 24};
    const Vec task(0);
    const auto obs = augment_observation(layout, task, 0, 0.0, clock, {PeerView{true, 1}});
    REQUIRE(obs.last_action().sum() == 1.0);
    REQUIRE(obs.last_reward().sum() == 1.0);
    REQUIRE(obs.trial_id().sum() == 1.0);
    REQUIRE(obs.peer_features(0).sum() == 1.0);
}

TEST_CASE("rewards outside the ternary set are a contract violation") {
    const ObsLayout layout = memory_layout();
    TrialClock clock{0, 4, 0, 24};
    const Vec task(0);
    REQUIRE_THROWS_AS(augment_observation(layout, task, -1, 0.5, clock, {}), ContractViolation);
}

TEST_CASE("fractional rewards are legal where a raw-reward slot exists") {
    EnvConfig cfg = EnvConfig::defaults(EnvKind::Tsp, Mode::InContext);
    const ObsLayout layout = obs_layout(cfg);
    TrialClock clock{0, 8, 0, 6};
    const Vec task = Vec::Zero(layout.task_width);
    const auto obs = augment_observation(layout, task, 3, 0.25, clock, {});
    REQUIRE(obs.last_reward()[2] == 1.0);  // positives bucket to the +1 class
    REQUIRE(obs.flat[layout.raw_reward_offset()] == 0.25);
}

TEST_CASE("observation width is a pure function of config and K") {
    EnvConfig a = EnvConfig::defaults(EnvKind::MemorySeq, Mode::InContext);
    EnvConfig b = a;
    REQUIRE(obs_layout(a).total() == obs_layout(b).total());
    b.trials_per_episode = 8;
    REQUIRE(obs_layout(b).total() == obs_layout(a).total() + 4);
    // alphabet 3: action 3 + reward 3 + trial 4 + peer 3 + flag 1
    REQUIRE(obs_layout(a).total() == 14);
    EnvConfig iwl = EnvConfig::defaults(EnvKind::MemorySeq, Mode::InWeights);
    // alphabet 10: action 10 + reward 3 + peer 10 + flag 1, no trial block
    REQUIRE(obs_layout(iwl).total() == 24);
}

TEST_CASE("identical seeds replay identical observation streams") {
    const ObsLayout layout = memory_layout();
    const Vec task(0);
    const auto stream = [&] {
        RngStream rng(99, 1);
        TrialClock clock{0, 4, 0, 24};
        std::vector<Vec> out;
        for (int t = 0; t < 50; ++t) {
            const int action = rng.uniform_int(3);
            const double reward = rng.bernoulli(0.5) ? 1.0 : -1.0;
            const PeerView peer{rng.bernoulli(0.5), rng.uniform_int(3)};
            out.push_back(augment_observation(layout, task, action, reward, clock, {peer}).flat);
        }
        return out;
    };
    const auto a = stream();
    const auto b = stream();
    for (std::size_t t = 0; t < a.size(); ++t) REQUIRE(a[t] == b[t]);
}
