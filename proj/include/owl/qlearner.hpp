#pragma once

#include <memory>
#include <span>

#include "owl/net.hpp"
#include "owl/replay.hpp"
#include "owl/types.hpp"

namespace owl {

struct TrainConfig {
    int batch = 256;
    double lr = 1e-4;
    int n_step = 10;  // 1 for policies trained inside the world model
    double gamma = 0.99;
    int target_update = 200;          // gradient steps between target copies
    int grad_steps_per_train = 64;    // per training step
    int train_frequency = 16 * 4;     // env steps between training steps
    double kappa = 10.0;              // reward multiplier
    double grad_norm_max = 10.0;
    double priority_temp = 0.01;
    int buffer_capacity = 5000 * 4;
    int frame_stack = 4;
    int hidden_real = 256;
    int hidden_wm = 128;

    void check() const {
        if (batch <= 0 || lr <= 0 || n_step <= 0 || gamma <= 0 || target_update <= 0 ||
            grad_steps_per_train <= 0 || train_frequency <= 0 || kappa <= 0 ||
            grad_norm_max <= 0 || priority_temp <= 0 || buffer_capacity <= 0 || frame_stack <= 0)
            throw ConfigError("train config values must be positive");
    }
};

struct UpdateReport {
    int steps_done = 0;
    int skipped_nonfinite = 0;
    double mean_loss = 0.0;
    double max_grad_norm_postclip = 0.0;
};

// A Q-network with target network, optimizer state, and the heuristic-shaped
// value readout Q_new(s, a) = Q(s, a) + h(s).
class QPolicy {
  public:
    QPolicy(int input_dim, int hidden, int actions, uint64_t seed, TrainConfig cfg);

    int input_dim() const { return net_.input_dim(); }
    int actions() const { return net_.actions(); }

    // Network output plus the scalar shaping term added to every action.
    std::vector<float> q_values(std::span<const float> obs, float h);
    // Greedy action; the shaping term is action-independent so it cannot
    // change the argmax and is skipped.
    int greedy(std::span<const float> obs);

    // n_gradient_steps of prioritized-batch n-step TD regression toward
    // r^(n) + gamma^n * max_a Q_target_new. Huber loss, global-norm gradient
    // clipping, periodic target copies, priorities refreshed from TD errors.
    UpdateReport dqn_update(ReplayBuffer& buf, int n_gradient_steps, Rng& rng);

    void reinit(uint64_t seed);
    long gradient_steps() const { return grad_steps_; }

    nn::DuelingQNet<float>& net() { return net_; }
    const nn::DuelingQNet<float>& net() const { return net_; }
    const nn::DuelingQNet<float>& target() const { return target_; }
    nn::DuelingQNet<float>& target_mutable() { return target_; }
    void sync_target() { target_.params = net_.params; }
    const TrainConfig& cfg() const { return cfg_; }

  private:
    TrainConfig cfg_;
    nn::DuelingQNet<float> net_, target_;
    nn::Adam<float> opt_;
    nn::DuelingQNet<float>::Workspace ws_, ws_target_;
    long grad_steps_ = 0;
};

}  // namespace owl
