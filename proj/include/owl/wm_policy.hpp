#pragma once

#include <memory>

#include "owl/encoder.hpp"
#include "owl/qlearner.hpp"
#include "owl/wm.hpp"

namespace owl {

// Exploration policy trained inside the abstract world model. Its action
// space is the option set; at decision time it keeps the residual random
// exploration rate its training schedule ended at.
struct WmPolicy {
    std::unique_ptr<QPolicy> q;
    std::vector<int> option_ids;  // action index -> option id
    double final_explore = 0.01;

    int greedy_option(std::span<const float> obs) const {
        return option_ids[static_cast<size_t>(q->greedy(obs))];
    }
    int explore_option(std::span<const float> obs, Rng& rng) const {
        if (rng.bernoulli(final_explore))
            return option_ids[static_cast<size_t>(rng.uniform_int(static_cast<int>(option_ids.size())))];
        return greedy_option(obs);
    }
};

struct WmTrainConfig {
    int total_steps = 1536;
    double explore_start = 1.0;
    double explore_end = 0.01;
    double explore_fraction = 0.95;
    TrainConfig base;  // n_step forced to 1, hidden from hidden_wm

    WmTrainConfig() { base.n_step = 1; }
};

// Runs the standard Q-learning loop against the simulated abstract
// environment (actions = options, 4-step horizon) and returns the greedy
// policy. Returns nullptr for an empty option set.
std::unique_ptr<WmPolicy> train_in_world_model(SimEnv& env, const ObservationEncoder& enc,
                                               const GoalSeq& goals, const WmTrainConfig& cfg,
                                               uint64_t seed);

}  // namespace owl
