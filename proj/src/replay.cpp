#include "owl/replay.hpp"

#include <algorithm>
#include <cmath>

namespace owl {

void ReplayBuffer::push(ReplayEntry e) {
    if (static_cast<int>(entries_.size()) < capacity_) {
        entries_.push_back(std::move(e));
        priorities_.push_back(max_priority_);
    } else {
        entries_[head_] = std::move(e);
        priorities_[head_] = max_priority_;
        head_ = (head_ + 1) % capacity_;
    }
    ++total_pushed_;
}

std::vector<int> ReplayBuffer::sample(int count, Rng& rng) const {
    std::vector<int> out;
    if (entries_.empty()) return out;
    const double floor = 1e-3;
    std::vector<double> cdf(entries_.size());
    double acc = 0.0;
    for (size_t i = 0; i < entries_.size(); ++i) {
        acc += std::pow(std::max(priorities_[i], floor), temperature_);
        cdf[i] = acc;
    }
    out.reserve(count);
    for (int c = 0; c < count; ++c) {
        double u = rng.uniform() * acc;
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        out.push_back(static_cast<int>(std::min(
            static_cast<size_t>(it - cdf.begin()), entries_.size() - 1)));
    }
    return out;
}

void ReplayBuffer::update_priority(int index, double td_abs) {
    priorities_[index] = td_abs;
    max_priority_ = std::max(max_priority_, td_abs);
}

void ReplayBuffer::clear() {
    entries_.clear();
    priorities_.clear();
    head_ = 0;
    max_priority_ = 1.0;
}

namespace {

ReplayEntry make_entry(std::span<const RawStep> steps, size_t k, size_t m, bool boot_terminal,
                       double kappa, double gamma, int goal_id) {
    ReplayEntry e;
    const RawStep& first = steps[k];
    const RawStep& last = steps[k + m - 1];
    e.s = first.enc_s;
    e.h_s = first.h_s;
    e.action = first.action;
    double r = 0.0, disc = 1.0;
    for (size_t j = 0; j < m; ++j) {
        r += disc * kappa * steps[k + j].reward_raw;
        disc *= gamma;
    }
    e.reward_n = static_cast<float>(r);
    e.gamma_n = static_cast<float>(disc);
    e.sn = last.enc_s2;
    e.h_sn = last.h_s2;
    e.done = boot_terminal ? 1 : 0;
    e.goal_id = goal_id;
    return e;
}

}  // namespace

void push_episode(ReplayBuffer& buf, std::span<const RawStep> steps, bool terminal_success,
                  double kappa, double gamma, int n_step, int goal_id) {
    const size_t T = steps.size();
    for (size_t k = 0; k < T; ++k) {
        size_t m = std::min(static_cast<size_t>(n_step), T - k);
        bool hits_end = (k + m == T);
        buf.push(make_entry(steps, k, m, hits_end && terminal_success, kappa, gamma, goal_id));
    }
}

void NStepAssembler::push(RawStep step) {
    window_.push_back(std::move(step));
    // Emit the front entry only once one step beyond its n-step window has
    // arrived; a window ending on the episode's final step is handled by
    // finish_episode, which knows the terminal flag.
    if (static_cast<int>(window_.size()) >= n_ + 1) {
        std::vector<RawStep> w(window_.begin(), window_.end());
        buf_.push(make_entry(w, 0, static_cast<size_t>(n_), false, kappa_, gamma_, goal_id_));
        window_.pop_front();
    }
}

void NStepAssembler::finish_episode(bool terminal_success) {
    std::vector<RawStep> w(window_.begin(), window_.end());
    for (size_t k = 0; k < w.size(); ++k)
        buf_.push(make_entry(w, k, w.size() - k, terminal_success, kappa_, gamma_, goal_id_));
    window_.clear();
}

}  // namespace owl
