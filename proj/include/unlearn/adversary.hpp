#ifndef UNLEARN_ADVERSARY_HPP
#define UNLEARN_ADVERSARY_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "unlearn/data.hpp"
#include "unlearn/learner.hpp"
#include "unlearn/oracle.hpp"
#include "unlearn/split.hpp"

namespace unlearn {

// A fitted per-point membership classifier. Deterministic after fitting:
// member iff score(x) >= threshold for x's class (tie rule is >=, globally).
struct WeakAdversary {
    std::string name;
    std::function<double(const DataPoint&)> score; // higher = more member-like
    std::vector<double> thresholds;                // size 1 = global, size C = per class
    std::string fit_meta;

    double threshold_for(int label) const;
    bool classify(const DataPoint& point) const { return score(point) >= threshold_for(point.label); }
};

// An adversary family: how to fit a WeakAdversary against a given model.
// fit_meta documents the calibration inputs for report provenance.
struct WeakAdversaryFamily {
    std::string name;
    std::function<WeakAdversary(const Model&)> fit;
    std::string fit_meta;
};

struct CalibrationPoint {
    DataPoint point;
    bool member = false;
};

// score(x) = 1 iff the model classifies x correctly (argmax, ties to the
// smallest class index); threshold 0.5.
WeakAdversary fit_correctness(const Model& model);

// score(x) = p_{x.label}(x); global threshold maximizing
// (true-member rate - false-member rate) on the calibration set, ties toward
// the smaller threshold.
WeakAdversary fit_confidence(const Model& model, const std::vector<CalibrationPoint>& calibration);

// score(x) = -Mentr(x); per-class thresholds fitted as in fit_confidence.
WeakAdversary fit_mentropy(const Model& model, const std::vector<CalibrationPoint>& calibration);

// Mentr = -(1-p_y) log p_y - sum_{i != y} p_i log(1 - p_i), logs clamped at 1e-12.
double modified_entropy(const Eigen::VectorXd& probs, int label);

// Builds the classifier directly from already-fitted thresholds. Used to
// transfer shadow-calibrated thresholds onto a target model.
WeakAdversary confidence_with_thresholds(const Model& model, std::vector<double> thresholds,
                                         std::string fit_meta);
WeakAdversary mentropy_with_thresholds(const Model& model, std::vector<double> thresholds,
                                       std::string fit_meta);

// Exhaustive-threshold fit over (score, member) pairs: returns the smallest
// threshold maximizing TPR - FPR. Throws DegenerateCalibration when only one
// membership class is present.
double fit_threshold(const std::vector<std::pair<double, bool>>& scored);

struct ShadowConfig {
    Dataset shadow_dataset;
    int num_shadow = 2;
    LearnerSpec learner;
    TrainConfig train_config;
    std::uint64_t seed = 0;

    void validate() const;
};

// Shadow models trained on seeded halves of the shadow dataset, plus the
// per-class attack classifiers built from their in/out examples. The
// ensemble depends only on shadow data and seeds, so it is built once per
// run and reused for every target model.
class ShadowEnsemble {
public:
    explicit ShadowEnsemble(const ShadowConfig& config);

    int num_shadow() const { return static_cast<int>(models_.size()); }
    const Model& shadow_model(int index) const { return models_.at(static_cast<std::size_t>(index)); }
    // Shadow points labeled by in/out membership of shadow model `index`.
    std::vector<CalibrationPoint> calibration(int index) const;

    // Attack feature for a probability vector: sorted probabilities
    // (descending) plus the true-label probability.
    static Eigen::VectorXd attack_feature(const Eigen::VectorXd& probs, int label);

    // The shadow-model-based weak adversary for a target model.
    WeakAdversary fit(const Model& target) const;

private:
    ShadowConfig config_;
    std::vector<Model> models_;
    std::vector<std::vector<std::int64_t>> in_ids_;
    std::vector<Model> attack_models_; // one per class
};

// Convenience wrapper over ShadowEnsemble for one-off fitting.
WeakAdversary fit_shadow(const ShadowConfig& config, const Model& target);

// Oracle-interacting adversary. decide() may draw up to max_queries points
// and must return a bit or throw QueryBudgetExceeded. analytic_accept, when
// set, returns the exact accept probability conditioned on answering, given
// the oracle's mass; the lookup adversary declares it, simulated-only
// adversaries leave it empty.
struct StrongAdversary {
    std::string name;
    std::function<int(const Model* model, const std::function<const DataPoint&()>& draw,
                      int max_queries)>
        decide;
    std::function<double(const Dataset& dataset, const std::map<std::int64_t, double>& mass)>
        analytic_accept;
};

// The hard-coded table adversary: answers 1 on T1 n T2, 0 on F1 n F2,
// redraws otherwise; ignores the model entirely.
StrongAdversary lookup_adversary(const Split& s1, const Split& s2);

// Wraps a fitted weak adversary: exactly one oracle draw, answer = classify(x).
StrongAdversary weak_to_strong(const WeakAdversary& weak);

} // namespace unlearn

#endif // UNLEARN_ADVERSARY_HPP
