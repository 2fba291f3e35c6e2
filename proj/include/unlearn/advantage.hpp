#ifndef UNLEARN_ADVANTAGE_HPP
#define UNLEARN_ADVANTAGE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unlearn/adversary.hpp"
#include "unlearn/data.hpp"
#include "unlearn/learner.hpp"
#include "unlearn/oracle.hpp"
#include "unlearn/rational.hpp"
#include "unlearn/split.hpp"
#include "unlearn/unlearner.hpp"

namespace unlearn {

// Signed per-split advantage: Adv_s = Pr(answer 1 | b=0) - Pr(answer 1 | b=1).
struct SplitAdvantage {
    Split split;
    double accept_rate_b0 = 0.0;
    double accept_rate_b1 = 0.0;
    double signed_value = 0.0;
    int num_models = 0;
};

struct BoundParams {
    double epsilon = 0.0; // >= 0
    double delta = 0.0;   // in [0, 1)
};

// Advantage bound for an (epsilon, delta)-certified-removal unlearner:
// min(1, 2*(1 - (2 - 2*delta)/(e^epsilon + 1))). The clamp reflects that an
// advantage never exceeds 1 by definition.
double certified_bound(const BoundParams& params);
// The matching (unclamped) quality lower bound (4 - 4*delta)/(e^eps + 1) - 1.
double certified_quality_lower_bound(const BoundParams& params);

// Rank-based AUC of member scores vs non-member scores; ties count 1/2.
double rank_auc(const std::vector<double>& member_scores,
                const std::vector<double>& nonmember_scores);

// Mean over fitted classifiers of the mass-weighted accept probability:
// exact in x, Monte Carlo only over models.
double weak_accept_rate(const std::vector<const WeakAdversary*>& fitted, const Dataset& dataset,
                        const std::map<std::int64_t, double>& mass);

// Signed advantage of pre-fitted classifiers (one per model replicate) on one
// split: accept rate under O_s(0) minus accept rate under O_s(1).
SplitAdvantage weak_split_advantage(const std::vector<const WeakAdversary*>& fitted,
                                    const Dataset& dataset,
                                    const SensitivityDistribution& sensitivity, const Split& split);

// The SWAP-test combination of a split's and its partner's signed values.
double swap_pair_value(double signed_a, double signed_b);

// One row of the per-split estimator detail.
struct SplitRecord {
    int group = -1; // pair index (swap/exact) or sample index (mc)
    Split split;
    double accept_rate_b0 = 0.0;
    double accept_rate_b1 = 0.0;
    double signed_value = 0.0;
    int num_models = 0;
};

struct EstimateResult {
    std::string estimator; // "exact" | "swap" | "mc"
    double value = 0.0;    // clamped to [0, 1]
    double unclamped = 0.0;
    std::optional<double> standard_error;
    std::vector<SplitRecord> records;
};

struct LedgerSummary {
    int invocations = 0;
    int retrain_triggered = 0;
    double max_residual_norm = 0.0;
    double mean_epsilon_consumed = 0.0;
    double max_epsilon_consumed = 0.0; // over attempted Newton steps, pre-fallback
    double max_epsilon_kept = 0.0;     // over removals that stayed within budget
    double budget_residual_norm = 0.0;
};

struct AdversaryResult {
    std::string adversary;
    std::string fit_meta;
    EstimateResult estimate;
};

struct MethodReport {
    UnlearnerSpec method;
    std::vector<AdversaryResult> adversaries;
    double unlearning_quality = 1.0;
    std::optional<double> certified_bound_value;
    std::optional<double> certified_quality_lower;
    std::optional<LedgerSummary> ledger;
    // Per-removal ledger entries in a canonical (schedule-independent) order.
    std::vector<RemovalLedger> ledger_entries;
};

enum class EstimatorKind { Exact, Swap, MonteCarlo };

struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::Swap;
    int num_pairs = 20;   // swap
    int num_splits = 100; // mc

    std::string name() const;
};

struct EvalConfig {
    Rational alpha;
    LearnerSpec learner;
    TrainConfig train_config;
    int models_per_split = 3;
    std::uint64_t master_seed = 0;
    std::uint64_t enumeration_cap = 100000;
    int strong_plays = 10000;
    int max_queries = 0; // 0 = 10 * |F u T|
    int num_threads = 0; // 0 = hardware concurrency
};

// Orchestrates challenger and adversary phases over splits of one dataset.
//
// All randomness derives from (master_seed, role, digests, model index), and
// Retrain draws are keyed by the retain set alone, so swap partners reuse the
// same retrained models. That reuse makes retraining's zero advantage an
// exact floating-point cancellation rather than an in-expectation statement.
class GameEvaluator {
public:
    GameEvaluator(Dataset dataset, SensitivityDistribution sensitivity, EvalConfig config);

    const Dataset& dataset() const noexcept { return dataset_; }
    const SensitivityDistribution& sensitivity() const noexcept { return sensitivity_; }
    const EvalConfig& config() const noexcept { return config_; }

    // Models drawn from P_M(method, split), cached.
    std::vector<std::shared_ptr<const Model>> models(const UnlearnerSpec& method,
                                                     const Split& split);

    SplitAdvantage split_advantage(const WeakAdversaryFamily& family, const UnlearnerSpec& method,
                                   const Split& split);
    // |Adv_s + Adv_swap(s)| / 2.
    double swap_advantage(const WeakAdversaryFamily& family, const UnlearnerSpec& method,
                          const Split& split);

    // Def-3.2 advantage by full enumeration of S_alpha, aggregated over swap
    // pairs so Retrain cancels exactly.
    EstimateResult exact_advantage(const WeakAdversaryFamily& family, const UnlearnerSpec& method);

    // Mean of per-pair SWAP advantages over seeded sampled pairs.
    EstimateResult swap_estimate(const WeakAdversaryFamily& family, const UnlearnerSpec& method,
                                 int num_pairs);

    // |mean| of signed per-split advantages over sampled splits, with the
    // standard error of the signed mean. Note the absolute value makes the
    // estimator upward-biased when the true mean is near zero.
    EstimateResult mc_advantage(const WeakAdversaryFamily& family, const UnlearnerSpec& method,
                                int num_splits);

    // Strong adversaries: accept rates computed analytically when the
    // adversary declares its decision region, otherwise by seeded plays.
    SplitAdvantage split_advantage_strong(const StrongAdversary& adversary,
                                          const UnlearnerSpec& method, const Split& split,
                                          bool analytic);
    double pair_advantage_strong(const StrongAdversary& adversary, const UnlearnerSpec& method,
                                 const Split& s1, const Split& s2, bool analytic);

    // 1 - (AUC of member scores over F vs T), averaged over models.
    double mia_score(const WeakAdversaryFamily& family, const UnlearnerSpec& method,
                     const Split& split);

    // Full report for one unlearner against a roster:
    // unlearning_quality = 1 - max over roster of advantage values.
    MethodReport evaluate_method(const std::vector<WeakAdversaryFamily>& roster,
                                 const UnlearnerSpec& method, const EstimatorSpec& estimator);

    EstimateResult estimate(const WeakAdversaryFamily& family, const UnlearnerSpec& method,
                            const EstimatorSpec& estimator);

private:
    struct CachedModels {
        std::vector<std::shared_ptr<const Model>> models;
        // Removal ledgers tagged with a canonical (split, model index) key.
        std::vector<std::pair<std::uint64_t, RemovalLedger>> ledgers;
    };

    std::vector<std::shared_ptr<const Model>> originals(const Split& split);
    const CachedModels& cached(const std::string& key, std::uint64_t ledger_method_digest,
                               const std::function<CachedModels()>& make);
    std::vector<const WeakAdversary*> fitted_roster(const WeakAdversaryFamily& family,
                                                    const std::vector<std::shared_ptr<const Model>>& models);
    Split sampled_split(std::string_view role, int index) const;
    int effective_max_queries(const Split& split) const;

    Dataset dataset_;
    SensitivityDistribution sensitivity_;
    EvalConfig config_;

    std::mutex cache_mutex_;
    std::map<std::string, CachedModels> model_cache_;
    std::map<std::pair<std::string, const Model*>, std::shared_ptr<const WeakAdversary>> fit_cache_;
    std::mutex ledger_mutex_;
    std::map<std::uint64_t, std::vector<std::pair<std::uint64_t, RemovalLedger>>> method_ledgers_;
};

} // namespace unlearn

#endif // UNLEARN_ADVANTAGE_HPP
