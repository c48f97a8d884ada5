#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "owl/precondition.hpp"

namespace owl {

// One expert: a deterministic program predicting a single binary abstract
// feature, with a nonnegative product weight under a Gaussian prior.
struct Expert {
    enum class Pred { SetOne, SetZero, NoChange };

    int target = 0;  // feature (goal) index modeled
    Pred pred = Pred::SetOne;
    std::optional<Precondition> condition;  // absent: always active
    double theta = 0.0;
    double mu = 0.0;     // prior mean
    double sigma = 1.0;  // prior stddev, > 0
};

// Prior configuration. The change-penalizing prior for set-1/set-0
// conditional experts defaults to mu = 0.001, sigma = 0.1 (a genuine frame
// bias); the alternative mu = 0.5, sigma = 0.001 variant is selectable.
struct PoeConfig {
    double eta = 0.01;  // expert smoothing: mass the predicted value does not get
    bool appendix_change_priors = false;
    int fit_steps = 2000;
    double fit_lr = 0.05;
};

// Per-option product-of-experts record. Success experts model the option's
// own feature f'_o; conditional experts model every other feature given a
// successful outcome. Exactly one blanket expert (unconditional, predicts
// failure, tightly pinned prior) is always present.
struct OptionModel {
    int option_id = 0;
    int target_feature = 0;
    int feature_count = 0;
    std::vector<Expert> success;
    std::vector<Expert> conditional;

    std::vector<const Expert*> conditional_for(int feature) const {
        std::vector<const Expert*> out;
        for (const auto& e : conditional)
            if (e.target == feature) out.push_back(&e);
        return out;
    }
    bool has_precondition_success_expert() const {
        for (const auto& e : success)
            if (e.condition) return true;
        return false;
    }
};

OptionModel build_option_model(int option_id, int target_feature, int feature_count,
                               std::span<const Precondition> proposals, const PoeConfig& cfg);

// Normalized product-of-experts probability for one feature: p(v) is
// proportional to the product over active experts of q_i(v)^theta_i, where
// q_i puts 1-eta on the expert's predicted value. Inactive experts
// contribute nothing; with no active expert the result is uniform.
// Returns nullopt when a gate or predictor reads an unknown field.
std::optional<std::array<double, 2>> poe_predict(std::span<const Expert* const> experts,
                                                 const SimState& s, double eta);
std::optional<std::array<double, 2>> poe_predict(std::span<const Expert> experts,
                                                 const SimState& s, double eta);

// One recorded option execution used for model fitting: the full start
// state with its abstract features, and the abstract features at the
// option's termination.
struct ModelDataPoint {
    SymbolicState s;
    AbstractState f_s;
    AbstractState f_s2;
};

// Penalized log-likelihood of the factored model: success experts score
// p(f'_o | s) on every point; conditional experts score p(f'_i | f'_o=1, s)
// restricted to points with f'_o = 1, skipping kNone entries per feature.
// Gaussian log-priors over all weights are added (constants dropped).
double map_objective(const OptionModel& model, std::span<const ModelDataPoint> data, double eta);

// Analytic gradient of map_objective with respect to every expert weight,
// ordered success experts first, then conditional experts.
std::vector<double> map_gradient(const OptionModel& model, std::span<const ModelDataPoint> data,
                                 double eta);

struct FitReport {
    bool ok = true;
    int steps = 0;
    double objective = 0.0;
};

// MAP estimation by monotone projected gradient ascent with per-coordinate
// steps scaled by the prior variance and halving on objective decrease.
// Weights are projected to theta >= 0 after each step. A non-finite
// gradient aborts the fit and keeps the previous weights.
FitReport map_fit(OptionModel& model, std::span<const ModelDataPoint> data, const PoeConfig& cfg);

// Samples the abstract outcome of executing the option from state s:
// f'_o first; on failure every other entry becomes kNone, otherwise each
// remaining feature is sampled from its conditional experts.
// Returns nullopt when any involved expert raises the access signal.
std::optional<AbstractState> sample_outcome(const OptionModel& model, const SimState& s,
                                            double eta, Rng& rng);

}  // namespace owl
