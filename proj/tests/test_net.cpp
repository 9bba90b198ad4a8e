#include <catch2/catch_amalgamated.hpp>
#include "lineage/rl/rollout.hpp"
#include "lineage/rl/ppo.hpp"
using namespace lineage;
TEST_CASE("smoke: forward on a fresh net") {
    EnvConfig env = EnvConfig::defaults(EnvKind::MemorySeq, Mode::InContext);
    NetConfig cfg = NetConfig::for_env(env, obs_layout(env), 0.25);
    RngStream rng(1, 1);
    GruNet net = GruNet::fresh(cfg, rng);
    StepCache cache;
    Mat obs = Mat::Zero(net.obs_width(), 3);
    net.forward(obs, net.zero_hidden(3), cache);
    REQUIRE(cache.logits.cols() == 3);
    REQUIRE(cache.value.cols() == 3);
}
