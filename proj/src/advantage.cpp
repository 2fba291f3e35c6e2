#include "unlearn/advantage.hpp"

#include <algorithm>
#include <cmath>

#include "unlearn/errors.hpp"
#include "unlearn/parallel.hpp"
#include "unlearn/rng.hpp"

namespace unlearn {

namespace {

void validate_bound_params(const BoundParams& params) {
    if (!(params.epsilon >= 0.0)) {
        throw InvalidParameter("epsilon must be >= 0", "epsilon");
    }
    if (!(params.delta >= 0.0 && params.delta < 1.0)) {
        throw InvalidParameter("delta must lie in [0, 1)", "delta");
    }
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

double sample_standard_error(const std::vector<double>& values, double mean) {
    if (values.size() < 2) return 0.0;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double n = static_cast<double>(values.size());
    return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

bool forget_before_test(const Split& s) {
    return std::lexicographical_compare(s.forget.begin(), s.forget.end(), s.test.begin(),
                                        s.test.end());
}

} // namespace

std::string EstimatorSpec::name() const {
    switch (kind) {
    case EstimatorKind::Exact: return "exact";
    case EstimatorKind::Swap: return "swap:" + std::to_string(num_pairs);
    case EstimatorKind::MonteCarlo: return "mc:" + std::to_string(num_splits);
    }
    return "unknown";
}

double certified_bound(const BoundParams& params) {
    validate_bound_params(params);
    const double raw = 2.0 * (1.0 - (2.0 - 2.0 * params.delta) / (std::exp(params.epsilon) + 1.0));
    return std::min(1.0, raw);
}

double certified_quality_lower_bound(const BoundParams& params) {
    validate_bound_params(params);
    return (4.0 - 4.0 * params.delta) / (std::exp(params.epsilon) + 1.0) - 1.0;
}

double rank_auc(const std::vector<double>& member_scores,
                const std::vector<double>& nonmember_scores) {
    if (member_scores.empty() || nonmember_scores.empty()) {
        throw InvalidParameter("rank_auc needs both score groups nonempty", "scores");
    }
    struct Entry {
        double score;
        bool member;
    };
    std::vector<Entry> all;
    all.reserve(member_scores.size() + nonmember_scores.size());
    for (double s : member_scores) all.push_back({s, true});
    for (double s : nonmember_scores) all.push_back({s, false});
    std::stable_sort(all.begin(), all.end(),
                     [](const Entry& a, const Entry& b) { return a.score < b.score; });

    double member_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].member) member_rank_sum += avg_rank;
        }
        i = j;
    }
    const double m = static_cast<double>(member_scores.size());
    const double n = static_cast<double>(nonmember_scores.size());
    return (member_rank_sum - m * (m + 1.0) / 2.0) / (m * n);
}

double weak_accept_rate(const std::vector<const WeakAdversary*>& fitted, const Dataset& dataset,
                        const std::map<std::int64_t, double>& mass) {
    if (fitted.empty()) {
        throw InvalidParameter("weak_accept_rate needs at least one model", "models");
    }
    double total = 0.0;
    for (const WeakAdversary* adv : fitted) {
        double rate = 0.0;
        for (const auto& [id, p] : mass) {
            if (adv->classify(dataset.point(id))) rate += p;
        }
        total += rate;
    }
    return total / static_cast<double>(fitted.size());
}

SplitAdvantage weak_split_advantage(const std::vector<const WeakAdversary*>& fitted,
                                    const Dataset& dataset,
                                    const SensitivityDistribution& sensitivity, const Split& split) {
    SplitAdvantage adv;
    adv.split = split;
    adv.accept_rate_b0 = weak_accept_rate(fitted, dataset, oracle_mass({split, 0, sensitivity}));
    adv.accept_rate_b1 = weak_accept_rate(fitted, dataset, oracle_mass({split, 1, sensitivity}));
    adv.signed_value = adv.accept_rate_b0 - adv.accept_rate_b1;
    adv.num_models = static_cast<int>(fitted.size());
    return adv;
}

double swap_pair_value(double signed_a, double signed_b) {
    return std::abs(signed_a + signed_b) / 2.0;
}

GameEvaluator::GameEvaluator(Dataset dataset, SensitivityDistribution sensitivity, EvalConfig config)
    : dataset_(std::move(dataset)), sensitivity_(std::move(sensitivity)), config_(std::move(config)) {
    config_.learner.validate();
    config_.train_config.validate();
    if (config_.models_per_split < 1) {
        throw InvalidParameter("models_per_split must be >= 1", "models_per_split");
    }
    if (sensitivity_.size() != dataset_.size()) {
        throw InvalidParameter("sensitivity support must match dataset ids", "sensitivity");
    }
    split_sizes(dataset_.size(), config_.alpha); // validates feasibility up front
}

const GameEvaluator::CachedModels& GameEvaluator::cached(const std::string& key,
                                                         std::uint64_t ledger_method_digest,
                                                         const std::function<CachedModels()>& make) {
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = model_cache_.find(key);
        if (it != model_cache_.end()) return it->second;
    }
    CachedModels fresh = make();
    bool inserted = false;
    const CachedModels* entry = nullptr;
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto result = model_cache_.emplace(key, std::move(fresh));
        inserted = result.second;
        entry = &result.first->second;
    }
    // Ledgers are recorded exactly once per cache entry, by the inserting call.
    if (inserted && ledger_method_digest != 0 && !entry->ledgers.empty()) {
        std::lock_guard<std::mutex> lock(ledger_mutex_);
        auto& sink = method_ledgers_[ledger_method_digest];
        sink.insert(sink.end(), entry->ledgers.begin(), entry->ledgers.end());
    }
    return *entry;
}

std::vector<std::shared_ptr<const Model>> GameEvaluator::originals(const Split& split) {
    const auto train_ids = split.train_ids();
    const std::uint64_t digest = id_set_digest(train_ids);
    const std::uint64_t retain_digest = id_set_digest(split.retain);
    // Training randomness (the objective-perturbation draw in particular) is
    // keyed by the retain set, so a split and its swap partner receive
    // matched draws and the noise cancels inside each SWAP pair, the same
    // fixed-retain pairing that makes retraining cancel exactly. The
    // per-split marginal distribution of the models is unchanged.
    const std::string key =
        "learn:" + std::to_string(digest) + ":" + std::to_string(retain_digest);
    const auto& entry = cached(key, 0, [&]() {
        CachedModels out;
        const auto points = dataset_.subset(train_ids);
        for (int i = 0; i < config_.models_per_split; ++i) {
            TrainConfig cfg = config_.train_config;
            cfg.seed = derive_seed(config_.master_seed, "learn",
                                   {retain_digest, static_cast<std::uint64_t>(i)});
            out.models.push_back(std::make_shared<const Model>(
                train(config_.learner, points, cfg, dataset_.num_classes())));
        }
        return out;
    });
    return entry.models;
}

std::vector<std::shared_ptr<const Model>> GameEvaluator::models(const UnlearnerSpec& method,
                                                                const Split& split) {
    method.validate();
    const std::uint64_t retain_digest = id_set_digest(split.retain);

    if (method.kind == UnlearnerKind::Retrain) {
        const std::string key = "retrain:" + std::to_string(retain_digest);
        const auto& entry = cached(key, 0, [&]() {
            CachedModels out;
            const auto points = dataset_.subset(split.retain);
            for (int i = 0; i < config_.models_per_split; ++i) {
                TrainConfig cfg = config_.train_config;
                cfg.seed = derive_seed(config_.master_seed, "retrain",
                                       {retain_digest, static_cast<std::uint64_t>(i)});
                out.models.push_back(std::make_shared<const Model>(
                    train(config_.learner, points, cfg, dataset_.num_classes())));
            }
            return out;
        });
        return entry.models;
    }

    const auto base = originals(split);
    if (method.kind == UnlearnerKind::None) return base;

    const std::uint64_t method_digest = method.digest();
    const std::string key =
        "m:" + std::to_string(method_digest) + ":" + std::to_string(split.digest());
    const auto& entry = cached(key, method_digest, [&]() {
        CachedModels out;
        const auto retain_points = dataset_.subset(split.retain);
        const auto forget_points = dataset_.subset(split.forget);
        for (int i = 0; i < config_.models_per_split; ++i) {
            const std::uint64_t seed =
                derive_seed(config_.master_seed, "unlearn",
                            {split.digest(), method_digest, static_cast<std::uint64_t>(i)});
            const std::uint64_t retrain_seed = derive_seed(
                config_.master_seed, "retrain", {retain_digest, static_cast<std::uint64_t>(i)});
            UnlearnResult res = unlearn(method, *base[static_cast<std::size_t>(i)], retain_points,
                                        forget_points, config_.learner, config_.train_config, seed,
                                        retrain_seed);
            out.models.push_back(std::make_shared<const Model>(std::move(res.model)));
            if (res.ledger) {
                out.ledgers.emplace_back(
                    hash_combine(split.digest(), static_cast<std::uint64_t>(i)), *res.ledger);
            }
        }
        return out;
    });
    return entry.models;
}

std::vector<const WeakAdversary*> GameEvaluator::fitted_roster(
    const WeakAdversaryFamily& family, const std::vector<std::shared_ptr<const Model>>& models) {
    std::vector<const WeakAdversary*> out;
    out.reserve(models.size());
    for (const auto& model : models) {
        const std::pair<std::string, const Model*> key{family.name, model.get()};
        {
            std::lock_guard<std::mutex> lock(cache_mutex_);
            auto it = fit_cache_.find(key);
            if (it != fit_cache_.end()) {
                out.push_back(it->second.get());
                continue;
            }
        }
        auto fitted = std::make_shared<const WeakAdversary>(family.fit(*model));
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto [it, inserted] = fit_cache_.emplace(key, std::move(fitted));
        out.push_back(it->second.get());
    }
    return out;
}

SplitAdvantage GameEvaluator::split_advantage(const WeakAdversaryFamily& family,
                                              const UnlearnerSpec& method, const Split& split) {
    const auto mods = models(method, split);
    const auto fitted = fitted_roster(family, mods);
    return weak_split_advantage(fitted, dataset_, sensitivity_, split);
}

double GameEvaluator::swap_advantage(const WeakAdversaryFamily& family, const UnlearnerSpec& method,
                                     const Split& split) {
    const SplitAdvantage a = split_advantage(family, method, split);
    const SplitAdvantage b = split_advantage(family, method, swap_split(split));
    return swap_pair_value(a.signed_value, b.signed_value);
}

namespace {

SplitRecord to_record(const SplitAdvantage& adv, int group) {
    return SplitRecord{group, adv.split, adv.accept_rate_b0, adv.accept_rate_b1, adv.signed_value,
                       adv.num_models};
}

} // namespace

EstimateResult GameEvaluator::exact_advantage(const WeakAdversaryFamily& family,
                                              const UnlearnerSpec& method) {
    const auto splits = enumerate_splits(dataset_, config_.alpha, config_.enumeration_cap);
    std::vector<std::size_t> reps;
    reps.reserve(splits.size() / 2);
    for (std::size_t i = 0; i < splits.size(); ++i) {
        if (forget_before_test(splits[i])) reps.push_back(i);
    }

    std::vector<double> pair_sums(reps.size(), 0.0);
    std::vector<SplitRecord> records(2 * reps.size());
    parallel_for(reps.size(), config_.num_threads, [&](std::size_t r) {
        const Split& s = splits[reps[r]];
        const SplitAdvantage a = split_advantage(family, method, s);
        const SplitAdvantage b = split_advantage(family, method, swap_split(s));
        pair_sums[r] = a.signed_value + b.signed_value;
        records[2 * r] = to_record(a, static_cast<int>(r));
        records[2 * r + 1] = to_record(b, static_cast<int>(r));
    });

    double total = 0.0;
    for (double v : pair_sums) total += v;
    const double raw = std::abs(total) / static_cast<double>(splits.size());

    EstimateResult result;
    result.estimator = "exact";
    result.unclamped = raw;
    result.value = clamp01(raw);
    result.records = std::move(records);
    return result;
}

EstimateResult GameEvaluator::swap_estimate(const WeakAdversaryFamily& family,
                                            const UnlearnerSpec& method, int num_pairs) {
    if (num_pairs < 1) {
        throw InvalidParameter("swap estimator needs num_pairs >= 1", "estimator.num_pairs");
    }
    std::vector<double> pair_values(static_cast<std::size_t>(num_pairs), 0.0);
    std::vector<SplitRecord> records(2 * static_cast<std::size_t>(num_pairs));
    parallel_for(static_cast<std::size_t>(num_pairs), config_.num_threads, [&](std::size_t i) {
        const Split s = sampled_split("swap_pair", static_cast<int>(i));
        const SplitAdvantage a = split_advantage(family, method, s);
        const SplitAdvantage b = split_advantage(family, method, swap_split(s));
        pair_values[i] = swap_pair_value(a.signed_value, b.signed_value);
        records[2 * i] = to_record(a, static_cast<int>(i));
        records[2 * i + 1] = to_record(b, static_cast<int>(i));
    });
    double mean = 0.0;
    for (double v : pair_values) mean += v;
    mean /= static_cast<double>(num_pairs);

    EstimateResult result;
    result.estimator = "swap";
    result.unclamped = mean;
    result.value = clamp01(mean);
    if (num_pairs >= 2) result.standard_error = sample_standard_error(pair_values, mean);
    result.records = std::move(records);
    return result;
}

EstimateResult GameEvaluator::mc_advantage(const WeakAdversaryFamily& family,
                                           const UnlearnerSpec& method, int num_splits) {
    if (num_splits < 2) {
        throw InvalidParameter("mc estimator needs num_splits >= 2", "estimator.num_splits");
    }
    std::vector<double> values(static_cast<std::size_t>(num_splits), 0.0);
    std::vector<SplitRecord> records(static_cast<std::size_t>(num_splits));
    parallel_for(static_cast<std::size_t>(num_splits), config_.num_threads, [&](std::size_t i) {
        const Split s = sampled_split("mc", static_cast<int>(i));
        const SplitAdvantage a = split_advantage(family, method, s);
        values[i] = a.signed_value;
        records[i] = to_record(a, static_cast<int>(i));
    });
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(num_splits);

    EstimateResult result;
    result.estimator = "mc";
    result.unclamped = std::abs(mean);
    result.value = clamp01(result.unclamped);
    result.standard_error = sample_standard_error(values, mean);
    result.records = std::move(records);
    return result;
}

Split GameEvaluator::sampled_split(std::string_view role, int index) const {
    return sample_split(dataset_, config_.alpha,
                        derive_seed(config_.master_seed, role,
                                    {static_cast<std::uint64_t>(index)}));
}

int GameEvaluator::effective_max_queries(const Split& split) const {
    if (config_.max_queries > 0) return config_.max_queries;
    return 10 * static_cast<int>(split.forget.size() + split.test.size());
}

SplitAdvantage GameEvaluator::split_advantage_strong(const StrongAdversary& adversary,
                                                     const UnlearnerSpec& method,
                                                     const Split& split, bool analytic) {
    SplitAdvantage adv;
    adv.split = split;
    if (analytic) {
        if (!adversary.analytic_accept) {
            throw InvalidParameter("adversary does not declare an analytic decision region",
                                   "adversary");
        }
        adv.accept_rate_b0 =
            adversary.analytic_accept(dataset_, oracle_mass({split, 0, sensitivity_}));
        adv.accept_rate_b1 =
            adversary.analytic_accept(dataset_, oracle_mass({split, 1, sensitivity_}));
        adv.num_models = 0;
        adv.signed_value = adv.accept_rate_b0 - adv.accept_rate_b1;
        return adv;
    }

    const auto mods = models(method, split);
    const int max_queries = effective_max_queries(split);
    const std::uint64_t method_digest = method.digest();
    double rates[2] = {0.0, 0.0};
    for (int bit = 0; bit <= 1; ++bit) {
        OracleSampler sampler(dataset_, {split, bit, sensitivity_});
        std::int64_t accepted = 0, answered = 0;
        for (int j = 0; j < config_.strong_plays; ++j) {
            Rng rng(derive_seed(config_.master_seed, "strong",
                                {split.digest(), method_digest, static_cast<std::uint64_t>(bit),
                                 static_cast<std::uint64_t>(j)}));
            const Model* model = mods[rng.uniform_int(mods.size())].get();
            const auto draw = [&]() -> const DataPoint& { return sampler.draw(rng); };
            try {
                const int answer = adversary.decide(model, draw, max_queries);
                ++answered;
                accepted += answer;
            } catch (const QueryBudgetExceeded&) {
                // aborted plays are excluded: rates condition on answering
            }
        }
        if (answered == 0) {
            throw QueryBudgetExceeded("no strong-adversary play produced an answer", "plays");
        }
        rates[bit] = static_cast<double>(accepted) / static_cast<double>(answered);
    }
    adv.accept_rate_b0 = rates[0];
    adv.accept_rate_b1 = rates[1];
    adv.signed_value = rates[0] - rates[1];
    adv.num_models = static_cast<int>(mods.size());
    return adv;
}

double GameEvaluator::pair_advantage_strong(const StrongAdversary& adversary,
                                            const UnlearnerSpec& method, const Split& s1,
                                            const Split& s2, bool analytic) {
    const SplitAdvantage a = split_advantage_strong(adversary, method, s1, analytic);
    const SplitAdvantage b = split_advantage_strong(adversary, method, s2, analytic);
    return swap_pair_value(a.signed_value, b.signed_value);
}

double GameEvaluator::mia_score(const WeakAdversaryFamily& family, const UnlearnerSpec& method,
                                const Split& split) {
    const auto mods = models(method, split);
    const auto fitted = fitted_roster(family, mods);
    double auc_total = 0.0;
    for (const WeakAdversary* adv : fitted) {
        std::vector<double> member_scores, nonmember_scores;
        member_scores.reserve(split.forget.size());
        nonmember_scores.reserve(split.test.size());
        for (std::int64_t id : split.forget) member_scores.push_back(adv->score(dataset_.point(id)));
        for (std::int64_t id : split.test) nonmember_scores.push_back(adv->score(dataset_.point(id)));
        auc_total += rank_auc(member_scores, nonmember_scores);
    }
    return 1.0 - auc_total / static_cast<double>(fitted.size());
}

EstimateResult GameEvaluator::estimate(const WeakAdversaryFamily& family,
                                       const UnlearnerSpec& method,
                                       const EstimatorSpec& estimator) {
    switch (estimator.kind) {
    case EstimatorKind::Exact: return exact_advantage(family, method);
    case EstimatorKind::Swap: return swap_estimate(family, method, estimator.num_pairs);
    case EstimatorKind::MonteCarlo: return mc_advantage(family, method, estimator.num_splits);
    }
    throw InvalidParameter("unhandled estimator kind", "estimator");
}

MethodReport GameEvaluator::evaluate_method(const std::vector<WeakAdversaryFamily>& roster,
                                            const UnlearnerSpec& method,
                                            const EstimatorSpec& estimator) {
    if (roster.empty()) {
        throw InvalidParameter("adversary roster must be nonempty", "adversaries");
    }
    MethodReport report;
    report.method = method;
    double max_advantage = 0.0;
    for (const auto& family : roster) {
        AdversaryResult result;
        result.adversary = family.name;
        result.fit_meta = family.fit_meta;
        result.estimate = estimate(family, method, estimator);
        max_advantage = std::max(max_advantage, result.estimate.value);
        report.adversaries.push_back(std::move(result));
    }
    report.unlearning_quality = clamp01(1.0 - max_advantage);

    if (method.kind == UnlearnerKind::CrNewton) {
        const BoundParams params{method.epsilon_budget, method.delta};
        report.certified_bound_value = certified_bound(params);
        report.certified_quality_lower = certified_quality_lower_bound(params);
        std::lock_guard<std::mutex> lock(ledger_mutex_);
        auto it = method_ledgers_.find(method.digest());
        if (it != method_ledgers_.end() && !it->second.empty()) {
            auto entries = it->second;
            std::sort(entries.begin(), entries.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            LedgerSummary summary;
            summary.invocations = static_cast<int>(entries.size());
            double eps_sum = 0.0;
            for (const auto& [key, ledger] : entries) {
                summary.retrain_triggered += ledger.retrain_triggered ? 1 : 0;
                summary.max_residual_norm =
                    std::max(summary.max_residual_norm, ledger.accumulated_residual_norm);
                summary.max_epsilon_consumed =
                    std::max(summary.max_epsilon_consumed, ledger.epsilon_consumed);
                if (!ledger.retrain_triggered) {
                    summary.max_epsilon_kept =
                        std::max(summary.max_epsilon_kept, ledger.epsilon_consumed);
                }
                eps_sum += ledger.epsilon_consumed;
                summary.budget_residual_norm = ledger.budget;
                report.ledger_entries.push_back(ledger);
            }
            summary.mean_epsilon_consumed = eps_sum / static_cast<double>(entries.size());
            report.ledger = summary;
        }
    }
    return report;
}

} // namespace unlearn
