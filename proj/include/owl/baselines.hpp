#pragma once

#include "owl/agent.hpp"

namespace owl {

// Flat learners trained per goal with the common Q-learning loop: `dqn`
// gets an independent network per goal, `gc-dqn` shares one network across
// goals with a learned goal embedding concatenated to the input.
struct FlatOptions {
    TrainConfig train;
    bool goal_conditioned = false;
    int embedding_dim = 8;
    int workers = 4;
    uint64_t seed = 0;
};

struct FlatResult {
    int mastered = 0;
    int64_t env_steps = 0;
};

FlatResult run_flat_agent(const EnvConfig& env_cfg, const FlatOptions& opts,
                          int64_t max_env_steps, const MetricsSink& metrics);

}  // namespace owl
