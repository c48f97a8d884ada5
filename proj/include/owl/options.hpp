#pragma once

#include <deque>
#include <memory>
#include <optional>

#include "owl/poe.hpp"
#include "owl/qlearner.hpp"
#include "owl/wm_policy.hpp"

namespace owl {

// Ring of the most recent execution outcomes, backing the goal completion
// rate delta_o.
class CompletionWindow {
  public:
    explicit CompletionWindow(int cap = 100) : cap_(cap) {}

    void record(bool success) {
        entries_.push_back(success ? 1 : 0);
        if (static_cast<int>(entries_.size()) > cap_) entries_.pop_front();
    }
    // Mean over available entries; 0 before any execution.
    double rate() const {
        if (entries_.empty()) return 0.0;
        int s = 0;
        for (auto e : entries_) s += e;
        return static_cast<double>(s) / static_cast<double>(entries_.size());
    }
    int successes() const {
        int s = 0;
        for (auto e : entries_) s += e;
        return s;
    }
    int count() const { return static_cast<int>(entries_.size()); }
    int capacity() const { return cap_; }
    // Completion rate over the full 100-slot window (missing entries count
    // as failures) exceeds one half.
    bool mastered() const { return 2 * successes() > cap_; }
    void clear() { entries_.clear(); }

    std::vector<uint8_t> dump() const { return {entries_.begin(), entries_.end()}; }
    void load(const std::vector<uint8_t>& v) { entries_.assign(v.begin(), v.end()); }

  private:
    int cap_;
    std::deque<uint8_t> entries_;
};

struct ActionContext {
    std::span<const float> obs;
    const SymbolicState& raw;
    float h = 0.0f;
    int action_count = 0;
    Rng& rng;
    int t = 0;  // decisions already made in the current execution
};

// Pluggable decision rule so the execution machinery can run scripted
// policies in tests.
struct IPolicy {
    virtual ~IPolicy() = default;
    virtual int select(const ActionContext& ctx) = 0;
};

struct OptionDef;

// pi(a|s) = (1-eps) pi_real(a|s) + eps pi_wm(a|s), sampled per decision.
// Without a world-model policy the exploratory arm is a uniform action.
class MixedPolicy : public IPolicy {
  public:
    explicit MixedPolicy(OptionDef& opt) : opt_(opt) {}
    int select(const ActionContext& ctx) override;

  private:
    OptionDef& opt_;
};

// An option: goal predicate plus policy pair (pi_real, pi_wm, eps) plus
// training statistics, replay buffer, and the dataset feeding its
// world-model fit. The available sub-options are fixed at creation.
struct OptionDef {
    int id = 0;
    int goal_id = 0;
    std::optional<int> precondition_goal;  // set for hypothesized options
    int primitive_count = 0;
    std::vector<int> sub_option_ids;

    std::unique_ptr<QPolicy> pi_real;
    std::unique_ptr<WmPolicy> pi_wm;
    double epsilon = 1.0;
    int64_t anneal_samples = 10000;
    int64_t total_flushed = 0;

    int64_t n_samples = 0;  // transitions the policy has been trained with
    int64_t ct = 0;         // new data since the last training step
    CompletionWindow window;
    bool good_once = false;

    ReplayBuffer replay;
    std::vector<ModelDataPoint> model_data;
    size_t model_fitted_upto = 0;
    int64_t model_positives = 0;

    std::unique_ptr<IPolicy> policy;

    OptionDef(int id_, int goal_id_, int primitive_count_, std::vector<int> subs,
              const TrainConfig& tc)
        : id(id_), goal_id(goal_id_), primitive_count(primitive_count_),
          sub_option_ids(std::move(subs)), replay(tc.buffer_capacity, tc.priority_temp) {}

    int action_count() const {
        return primitive_count + static_cast<int>(sub_option_ids.size());
    }
    bool is_sub_option_action(int a) const { return a >= primitive_count; }
    int sub_option_at(int a) const {
        return sub_option_ids[static_cast<size_t>(a - primitive_count)];
    }
    std::optional<int> action_index_of(int option_id) const {
        for (size_t i = 0; i < sub_option_ids.size(); ++i)
            if (sub_option_ids[i] == option_id) return primitive_count + static_cast<int>(i);
        return std::nullopt;
    }

    // Linear schedule: eps = max(0, 1 - total_flushed / anneal_samples).
    void anneal(int64_t flushed) {
        total_flushed += flushed;
        double e = 1.0 - static_cast<double>(total_flushed) / static_cast<double>(anneal_samples);
        epsilon = std::max(0.0, std::min(epsilon, e));
    }

    void record_completion(bool success) {
        window.record(success);
        if (window.mastered()) good_once = true;
    }
};

}  // namespace owl
