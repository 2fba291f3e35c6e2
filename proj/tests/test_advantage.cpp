#include <doctest.h>

#include <cmath>

#include "unlearn/advantage.hpp"
#include "unlearn/datagen.hpp"
#include "unlearn/errors.hpp"
#include "unlearn/rng.hpp"

#include "test_util.hpp"
#include "toy_fixture.hpp"

using namespace unlearn;

namespace {

EvalConfig small_eval_config(const Rational& alpha, int models = 2, int threads = 2) {
    EvalConfig cfg;
    cfg.alpha = alpha;
    cfg.learner.l2_lambda = 0.05;
    cfg.train_config.learning_rate = 0.4;
    cfg.train_config.epochs = 60;
    cfg.models_per_split = models;
    cfg.master_seed = 20240; // any fixed seed
    cfg.num_threads = threads;
    return cfg;
}

Dataset small_blobs(std::int64_t n, std::uint64_t seed, int dim = 2) {
    SyntheticSpec spec;
    spec.num_points = n;
    spec.dim = dim;
    spec.num_classes = 2;
    spec.cluster_separation = 3.0;
    spec.noise_sigma = 1.0;
    spec.seed = seed;
    return generate_synthetic(spec);
}

WeakAdversaryFamily correctness_family() {
    WeakAdversaryFamily family;
    family.name = "correctness";
    family.fit = [](const Model& m) { return fit_correctness(m); };
    return family;
}

// Confidence scores with a fixed transferred threshold; no calibration data
// needed, which keeps engine tests self-contained.
WeakAdversaryFamily fixed_confidence_family(double threshold) {
    WeakAdversaryFamily family;
    family.name = "confidence@" + std::to_string(threshold);
    family.fit = [threshold](const Model& m) {
        return confidence_with_thresholds(m, {threshold}, "fixed threshold");
    };
    return family;
}

WeakAdversaryFamily constant_family(double score) {
    WeakAdversaryFamily family;
    family.name = "constant" + std::to_string(score);
    family.fit = [score](const Model&) {
        WeakAdversary adv;
        adv.name = "constant";
        adv.thresholds = {0.5};
        adv.score = [score](const DataPoint&) { return score; };
        return adv;
    };
    return family;
}

UnlearnerSpec retrain_spec() {
    UnlearnerSpec s;
    s.kind = UnlearnerKind::Retrain;
    return s;
}

UnlearnerSpec neg_grad_spec() {
    UnlearnerSpec s;
    s.kind = UnlearnerKind::NegGrad;
    s.steps = 10;
    s.learning_rate = 0.01;
    return s;
}

} // namespace

TEST_CASE("toy score table reproduces the per-split and SWAP values") {
    const Dataset d = toy::six_points();
    const Split s = toy::abc_def_split();

    // Retrained model: accept rate 1/3 on the forget side at cutoff 0.5.
    {
        const WeakAdversary fitted = toy::table_adversary(0.0, s.forget);
        const std::vector<const WeakAdversary*> roster = {&fitted};
        const double rate =
            weak_accept_rate(roster, d, oracle_mass({s, 0, SensitivityDistribution::uniform(6)}));
        CHECK(std::abs(rate - 1.0 / 3.0) <= 1e-12);
    }

    CHECK(std::abs(toy::advantage_for(d, 0.0, s).signed_value - (-1.0 / 3.0)) <= 1e-12);
    CHECK(std::abs(toy::advantage_for(d, 0.1, s).signed_value - 0.0) <= 1e-12);
    CHECK(std::abs(toy::advantage_for(d, 0.1, swap_split(s)).signed_value - 1.0 / 3.0) <= 1e-12);

    CHECK(toy::swap_value(d, 0.0, s) == 0.0); // exact cancellation
    CHECK(std::abs(toy::swap_value(d, 0.1, s) - 1.0 / 6.0) <= 1e-12);
    CHECK(std::abs(toy::swap_value(d, 0.2, s) - 1.0 / 3.0) <= 1e-12);
}

TEST_CASE("certified bound formula") {
    CHECK(certified_bound({0.0, 0.0}) == 0.0);
    CHECK(certified_quality_lower_bound({0.0, 0.0}) == 1.0);
    CHECK(certified_bound({1e6, 0.0}) == 1.0); // clamped at the definition range

    double previous = -1.0;
    for (double eps : {0.0, 0.5, 1.0, 2.0, 5.0}) {
        const double b = certified_bound({eps, 0.0});
        CHECK(b >= previous);
        previous = b;
    }
    previous = -1.0;
    for (double delta : {0.0, 0.01, 0.05, 0.1}) {
        const double b = certified_bound({0.5, delta});
        CHECK(b >= previous);
        previous = b;
    }
    CHECK_THROWS_AS(certified_bound({-1.0, 0.0}), InvalidParameter);
    CHECK_THROWS_AS(certified_bound({1.0, 1.0}), InvalidParameter);
}

TEST_CASE("rank auc handles ties and matches the all-pairs oracle") {
    CHECK(rank_auc({2.0, 3.0}, {0.0, 1.0}) == 1.0);
    CHECK(rank_auc({1.0, 1.0}, {1.0, 1.0}) == 0.5);

    Rng rng(6060);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> members, nons;
        const int m = 2 + static_cast<int>(rng.uniform_int(6));
        const int n = 2 + static_cast<int>(rng.uniform_int(6));
        for (int i = 0; i < m; ++i) members.push_back(std::round(rng.uniform() * 4.0) / 4.0);
        for (int i = 0; i < n; ++i) nons.push_back(std::round(rng.uniform() * 4.0) / 4.0);

        double pairs = 0.0;
        for (double a : members) {
            for (double b : nons) {
                if (a > b) pairs += 1.0;
                else if (a == b) pairs += 0.5;
            }
        }
        const double oracle = pairs / (static_cast<double>(m) * n);
        CHECK(std::abs(rank_auc(members, nons) - oracle) <= 1e-12);
    }
}

TEST_CASE("retrain models are cached per retain set and shared across swap partners") {
    const Dataset d = small_blobs(6, 91);
    GameEvaluator eval(d, SensitivityDistribution::uniform(6), small_eval_config(Rational(1, 2)));
    const Split s = sample_split(d, Rational(1, 2), 5);
    const auto a = eval.models(retrain_spec(), s);
    const auto b = eval.models(retrain_spec(), swap_split(s));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].get() == b[i].get()); // literally the same cached models
    }
}

TEST_CASE("swap advantage against retraining is exactly zero") {
    const Dataset d = small_blobs(8, 92);
    GameEvaluator eval(d, SensitivityDistribution::uniform(8), small_eval_config(Rational(1, 3)));
    const auto family = fixed_confidence_family(0.6);
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const Split s = sample_split(d, Rational(1, 3), seed);
        CHECK(eval.swap_advantage(family, retrain_spec(), s) == 0.0);
    }
}

TEST_CASE("exact advantage: zero grounding, constant adversary, pairing consistency") {
    const Dataset d = small_blobs(6, 93);
    GameEvaluator eval(d, SensitivityDistribution::uniform(6), small_eval_config(Rational(1, 2)));

    const auto retrain_exact = eval.exact_advantage(fixed_confidence_family(0.55), retrain_spec());
    CHECK(retrain_exact.value <= 1e-12);
    CHECK(retrain_exact.records.size() == 90);

    const auto constant = eval.exact_advantage(constant_family(1.0), neg_grad_spec());
    CHECK(constant.value <= 1e-12); // rates are 1 under both oracles

    // Independent aggregation: the engine sums over swap pairs; re-derive the
    // same number split-by-split in enumeration order.
    const auto family = fixed_confidence_family(0.6);
    const auto engine_result = eval.exact_advantage(family, neg_grad_spec());
    const auto splits = enumerate_splits(d, Rational(1, 2));
    double total = 0.0;
    for (const auto& s : splits) {
        total += eval.split_advantage(family, neg_grad_spec(), s).signed_value;
    }
    const double oracle = std::abs(total) / static_cast<double>(splits.size());
    CHECK(std::abs(engine_result.value - oracle) <= 1e-12);
}

TEST_CASE("exact advantage is deterministic across thread counts") {
    const Dataset d = small_blobs(6, 94);
    const auto family = fixed_confidence_family(0.6);

    GameEvaluator serial(d, SensitivityDistribution::uniform(6),
                         small_eval_config(Rational(1, 2), 2, 1));
    GameEvaluator parallel(d, SensitivityDistribution::uniform(6),
                           small_eval_config(Rational(1, 2), 2, 4));
    const auto a = serial.exact_advantage(family, neg_grad_spec());
    const auto b = parallel.exact_advantage(family, neg_grad_spec());
    CHECK(a.value == b.value);
    CHECK(a.unclamped == b.unclamped);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].signed_value == b.records[i].signed_value);
    }
}

TEST_CASE("mc advantage validates num_splits and converges to the exact value") {
    const Dataset d = small_blobs(6, 95);
    GameEvaluator eval(d, SensitivityDistribution::uniform(6), small_eval_config(Rational(1, 2)));
    const auto family = fixed_confidence_family(0.6);

    CHECK_THROWS_AS(eval.mc_advantage(family, neg_grad_spec(), 1), InvalidParameter);

    const auto exact = eval.exact_advantage(family, neg_grad_spec());
    const auto mc = eval.mc_advantage(family, neg_grad_spec(), 200);
    REQUIRE(mc.standard_error.has_value());
    CHECK(std::abs(mc.value - exact.value) <= 3.0 * std::max(*mc.standard_error, 1e-6));
    CHECK(mc.records.size() == 200);
}

TEST_CASE("swap estimate on retraining yields quality one") {
    const Dataset d = small_blobs(8, 96);
    GameEvaluator eval(d, SensitivityDistribution::uniform(8), small_eval_config(Rational(1, 3)));
    EstimatorSpec estimator;
    estimator.kind = EstimatorKind::Swap;
    estimator.num_pairs = 5;

    const std::vector<WeakAdversaryFamily> roster = {correctness_family(),
                                                     fixed_confidence_family(0.6)};
    const MethodReport report = eval.evaluate_method(roster, retrain_spec(), estimator);
    CHECK(report.unlearning_quality == 1.0);
    for (const auto& adv : report.adversaries) {
        CHECK(adv.estimate.value == 0.0);
    }
}

TEST_CASE("adding an adversary never increases unlearning quality") {
    const Dataset d = small_blobs(6, 97);
    GameEvaluator eval(d, SensitivityDistribution::uniform(6), small_eval_config(Rational(1, 2)));
    EstimatorSpec estimator;
    estimator.kind = EstimatorKind::Swap;
    estimator.num_pairs = 4;

    std::vector<WeakAdversaryFamily> small_roster = {correctness_family()};
    std::vector<WeakAdversaryFamily> big_roster = {correctness_family(),
                                                   fixed_confidence_family(0.6),
                                                   constant_family(1.0)};
    const double q_small =
        eval.evaluate_method(small_roster, neg_grad_spec(), estimator).unlearning_quality;
    const double q_big =
        eval.evaluate_method(big_roster, neg_grad_spec(), estimator).unlearning_quality;
    CHECK(q_big <= q_small);

    // Constant adversary alone has zero advantage: quality 1.
    std::vector<WeakAdversaryFamily> constant_only = {constant_family(1.0)};
    CHECK(eval.evaluate_method(constant_only, neg_grad_spec(), estimator).unlearning_quality ==
          1.0);
}

TEST_CASE("split advantage invariants on sampled splits") {
    const Dataset d = small_blobs(8, 98);
    GameEvaluator eval(d, SensitivityDistribution::uniform(8), small_eval_config(Rational(1, 3)));
    const auto family = fixed_confidence_family(0.6);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const Split s = sample_split(d, Rational(1, 3), seed);
        const SplitAdvantage adv = eval.split_advantage(family, neg_grad_spec(), s);
        CHECK(adv.accept_rate_b0 >= 0.0);
        CHECK(adv.accept_rate_b0 <= 1.0);
        CHECK(adv.accept_rate_b1 >= 0.0);
        CHECK(adv.accept_rate_b1 <= 1.0);
        CHECK(adv.signed_value == adv.accept_rate_b0 - adv.accept_rate_b1);
        CHECK(std::abs(adv.signed_value) <= 1.0);
        CHECK(adv.num_models == 2);
    }
}

TEST_CASE("lookup adversary achieves pair advantage one on overlapping splits") {
    const Dataset d = small_blobs(12, 99);
    GameEvaluator eval(d, SensitivityDistribution::uniform(12), small_eval_config(Rational(1, 3)));

    Split s1, s2;
    std::uint64_t seed = 0;
    while (true) {
        s1 = sample_split(d, Rational(1, 3), seed);
        s2 = sample_split(d, Rational(1, 3), seed + 1);
        ++seed;
        std::vector<std::int64_t> fi, ti;
        std::set_intersection(s1.forget.begin(), s1.forget.end(), s2.forget.begin(),
                              s2.forget.end(), std::back_inserter(fi));
        std::set_intersection(s1.test.begin(), s1.test.end(), s2.test.begin(), s2.test.end(),
                              std::back_inserter(ti));
        if (!fi.empty() && !ti.empty()) break;
    }

    const StrongAdversary lookup = lookup_adversary(s1, s2);
    const double analytic = eval.pair_advantage_strong(lookup, retrain_spec(), s1, s2, true);
    CHECK(analytic == 1.0);

    // The same construction also wins against identical splits (s1 = s2).
    const StrongAdversary self = lookup_adversary(s1, s1);
    CHECK(eval.pair_advantage_strong(self, retrain_spec(), s1, s1, true) == 1.0);
}

TEST_CASE("simulated strong adversary matches the analytic weak rate") {
    const Dataset d = small_blobs(8, 100);
    EvalConfig cfg = small_eval_config(Rational(1, 3), 1, 1);
    cfg.strong_plays = 20000;
    GameEvaluator eval(d, SensitivityDistribution::uniform(8), cfg);
    const Split s = sample_split(d, Rational(1, 3), 3);

    const auto family = fixed_confidence_family(0.6);
    const SplitAdvantage weak = eval.split_advantage(family, neg_grad_spec(), s);

    const auto mods = eval.models(neg_grad_spec(), s);
    REQUIRE(mods.size() == 1);
    const WeakAdversary fitted = family.fit(*mods[0]);
    const StrongAdversary strong = weak_to_strong(fitted);

    const SplitAdvantage simulated = eval.split_advantage_strong(strong, neg_grad_spec(), s, false);
    const double se = 0.5 / std::sqrt(static_cast<double>(cfg.strong_plays));
    CHECK(std::abs(simulated.accept_rate_b0 - weak.accept_rate_b0) <= 4.0 * se);
    CHECK(std::abs(simulated.accept_rate_b1 - weak.accept_rate_b1) <= 4.0 * se);

    const SplitAdvantage analytic = eval.split_advantage_strong(strong, neg_grad_spec(), s, true);
    CHECK(analytic.accept_rate_b0 == doctest::Approx(weak.accept_rate_b0).epsilon(1e-12));
    CHECK(analytic.accept_rate_b1 == doctest::Approx(weak.accept_rate_b1).epsilon(1e-12));
}

TEST_CASE("mia score: separation, ties, and the all-pairs oracle") {
    const Dataset d = small_blobs(8, 101);
    GameEvaluator eval(d, SensitivityDistribution::uniform(8), small_eval_config(Rational(1, 3), 1));
    const Split s = sample_split(d, Rational(1, 3), 11);

    // Score = +1 on forget ids, 0 elsewhere: a perfectly separating scorer.
    WeakAdversaryFamily separating;
    separating.name = "separating";
    const auto forget = s.forget;
    separating.fit = [forget](const Model&) {
        WeakAdversary adv;
        adv.name = "separating";
        adv.thresholds = {0.5};
        adv.score = [forget](const DataPoint& p) {
            return std::binary_search(forget.begin(), forget.end(), p.id) ? 1.0 : 0.0;
        };
        return adv;
    };
    CHECK(eval.mia_score(separating, neg_grad_spec(), s) == 0.0);

    CHECK(eval.mia_score(constant_family(0.7), neg_grad_spec(), s) == 0.5);

    // Confidence scores against the naive pair-counting oracle.
    const auto family = fixed_confidence_family(0.6);
    const auto mods = eval.models(neg_grad_spec(), s);
    const WeakAdversary fitted = family.fit(*mods[0]);
    double pairs = 0.0;
    for (std::int64_t f : s.forget) {
        for (std::int64_t t : s.test) {
            const double a = fitted.score(d.point(f));
            const double b = fitted.score(d.point(t));
            pairs += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
        }
    }
    const double oracle =
        1.0 - pairs / (static_cast<double>(s.forget.size()) * static_cast<double>(s.test.size()));
    CHECK(std::abs(eval.mia_score(family, neg_grad_spec(), s) - oracle) <= 1e-12);
}

TEST_CASE("cr_newton reports bound and ledger through evaluate_method") {
    const Dataset d = small_blobs(12, 102, 3);
    EvalConfig cfg = small_eval_config(Rational(1, 3), 2, 2);
    cfg.learner.objective_perturbation_sigma = 0.2;
    cfg.train_config.epochs = 400;
    GameEvaluator eval(d, SensitivityDistribution::uniform(12), cfg);

    UnlearnerSpec cr;
    cr.kind = UnlearnerKind::CrNewton;
    cr.epsilon_budget = 50.0;
    cr.delta = 1e-4;

    EstimatorSpec estimator;
    estimator.kind = EstimatorKind::Swap;
    estimator.num_pairs = 3;
    const std::vector<WeakAdversaryFamily> roster = {fixed_confidence_family(0.6)};
    const MethodReport report = eval.evaluate_method(roster, cr, estimator);

    REQUIRE(report.certified_bound_value.has_value());
    CHECK(*report.certified_bound_value == certified_bound({50.0, 1e-4}));
    REQUIRE(report.ledger.has_value());
    CHECK(report.ledger->invocations == 3 * 2 * 2); // pairs x two splits x models
    CHECK(report.ledger->retrain_triggered == 0);
    CHECK(report.ledger->max_epsilon_consumed <= 50.0);
}
