#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "owl/types.hpp"

namespace owl {

// One learnable regression target: an n-step transition with the reward
// already multiplied by the reward multiplier and the heuristic values of
// both endpoint states captured at record time.
struct ReplayEntry {
    std::vector<float> s, sn;
    float h_s = 0.0f, h_sn = 0.0f;
    int action = 0;
    float reward_n = 0.0f;  // discounted n-step return, reward-multiplier applied
    float gamma_n = 1.0f;   // discount for the bootstrap term
    uint8_t done = 0;       // 1: true terminal, no bootstrap
    int goal_id = -1;       // used by the goal-conditioned baseline
};

// FIFO ring buffer with priority sampling. Sampling probabilities are
// softmax over temperature-scaled log TD magnitudes, i.e. proportional to
// |TD|^temperature; at temperature 0.01 this is near-uniform. New entries
// take the current maximum priority.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(int capacity, double temperature = 0.01)
        : capacity_(capacity), temperature_(temperature) {}

    void push(ReplayEntry e);
    int size() const { return static_cast<int>(entries_.size()); }
    int64_t total_pushed() const { return total_pushed_; }
    const ReplayEntry& entry(int i) const { return entries_[i]; }

    // Samples `count` indices with replacement.
    std::vector<int> sample(int count, Rng& rng) const;
    void update_priority(int index, double td_abs);
    double priority(int i) const { return priorities_[i]; }

    void clear();

  private:
    int capacity_;
    double temperature_;
    std::vector<ReplayEntry> entries_;
    std::vector<double> priorities_;
    int head_ = 0;  // next slot to overwrite once full
    double max_priority_ = 1.0;
    int64_t total_pushed_ = 0;
};

// Raw per-decision step, before n-step assembly.
struct RawStep {
    std::vector<float> enc_s, enc_s2;
    float h_s = 0.0f, h_s2 = 0.0f;
    int action = 0;
    double reward_raw = 0.0;  // unscaled 0/1 goal reward
};

// Turns a whole episode into n-step entries. Returns truncate at the episode
// boundary; the final entries bootstrap from the last state unless the
// episode ended with the goal achieved.
void push_episode(ReplayBuffer& buf, std::span<const RawStep> steps, bool terminal_success,
                  double kappa, double gamma, int n_step, int goal_id = -1);

// Streaming n-step assembly for flat learners: emits an entry as soon as its
// n-step window resolves, and drains the tail at episode end.
class NStepAssembler {
  public:
    NStepAssembler(ReplayBuffer& buf, double kappa, double gamma, int n_step, int goal_id = -1)
        : buf_(buf), kappa_(kappa), gamma_(gamma), n_(n_step), goal_id_(goal_id) {}

    void push(RawStep step);
    void finish_episode(bool terminal_success);

  private:
    ReplayBuffer& buf_;
    double kappa_, gamma_;
    int n_;
    int goal_id_;
    std::deque<RawStep> window_;
};

}  // namespace owl
