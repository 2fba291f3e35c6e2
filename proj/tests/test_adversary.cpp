#include <doctest.h>

#include <cmath>

#include "unlearn/adversary.hpp"
#include "unlearn/datagen.hpp"
#include "unlearn/errors.hpp"
#include "unlearn/rng.hpp"

#include "test_util.hpp"

using namespace unlearn;

namespace {

// Binary logistic model over a scalar feature whose class-0 confidence at
// x is sigmoid(w * x): params [w0, w1, b0, b1] with w1 = b = 0.
Model scalar_confidence_model(double w) {
    Model m;
    m.spec = LearnerSpec{};
    m.dim = 1;
    m.num_classes = 2;
    m.params = Eigen::VectorXd::Zero(4);
    m.params[0] = w;
    return m;
}

DataPoint scalar_point(double x, int label, std::int64_t id = 0) {
    DataPoint p;
    p.id = id;
    p.features = Eigen::VectorXd::Constant(1, x);
    p.label = label;
    return p;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

} // namespace

TEST_CASE("fit_correctness follows the argmax with ties to class 0") {
    // Strongly separating model: class-0 logit is 8x, so it predicts class 0
    // for positive x.
    const Model m = scalar_confidence_model(8.0);
    const auto adv = fit_correctness(m);
    CHECK(adv.classify(scalar_point(2.0, 0)));  // correct -> member
    CHECK(!adv.classify(scalar_point(2.0, 1))); // wrong -> non-member
    CHECK(adv.classify(scalar_point(-2.0, 1)));

    // Uniform model: argmax ties resolve to class 0.
    const Model uniform = scalar_confidence_model(0.0);
    const auto tie = fit_correctness(uniform);
    CHECK(tie.classify(scalar_point(0.4, 0)));
    CHECK(!tie.classify(scalar_point(0.4, 1)));
}

TEST_CASE("fit_correctness marks every training point on an interpolating model") {
    SyntheticSpec spec;
    spec.num_points = 30;
    spec.dim = 2;
    spec.num_classes = 2;
    spec.cluster_separation = 8.0;
    spec.noise_sigma = 0.4;
    spec.seed = 5;
    const Dataset data = generate_synthetic(spec);

    LearnerSpec learner;
    learner.l2_lambda = 0.0;
    TrainConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.epochs = 500;
    cfg.seed = 1;
    const Model m = train(learner, data.points(), cfg, data.num_classes());
    const auto adv = fit_correctness(m);
    for (const auto& p : data.points()) {
        CHECK(adv.score(p) == 1.0);
    }
}

TEST_CASE("fit_threshold maximizes tpr - fpr and matches an exhaustive oracle") {
    Rng rng(404);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<std::pair<double, bool>> scored;
        const int n = 6 + static_cast<int>(rng.uniform_int(10));
        for (int i = 0; i < n; ++i) {
            scored.emplace_back(std::round(rng.uniform() * 8.0) / 8.0, rng.uniform() < 0.5);
        }
        bool has_member = false, has_non = false;
        for (auto& [s, m] : scored) (m ? has_member : has_non) = true;
        if (!has_member) scored.front().second = true;
        if (!has_non) scored.back().second = false;

        const double fitted = fit_threshold(scored);

        auto gain_at = [&](double t) {
            double tpr = 0, fpr = 0, members = 0, nons = 0;
            for (const auto& [s, m] : scored) {
                (m ? members : nons) += 1.0;
                if (s >= t) (m ? tpr : fpr) += 1.0;
            }
            return tpr / members - fpr / nons;
        };

        // Oracle: sweep every candidate cut, including the all-reject cut.
        double best = -2.0, best_threshold = 0.0;
        std::vector<double> candidates;
        for (const auto& [s, m] : scored) candidates.push_back(s);
        candidates.push_back(std::numeric_limits<double>::infinity());
        std::sort(candidates.begin(), candidates.end());
        for (double t : candidates) {
            const double g = gain_at(t);
            if (g > best) {
                best = g;
                best_threshold = t;
            }
        }
        CHECK(gain_at(fitted) == doctest::Approx(best).epsilon(1e-12));
        CHECK(fitted == best_threshold); // ties toward the smaller threshold
        CHECK(best >= 0.0);              // the all-reject cut guarantees >= 0
    }
}

TEST_CASE("fit_confidence separates clean calibration and handles constants") {
    // At x = 1 class-0 confidence is 0.9; at x = -1 it is 0.1.
    const Model m = scalar_confidence_model(logit(0.9));
    std::vector<CalibrationPoint> calibration;
    for (int i = 0; i < 5; ++i) {
        calibration.push_back({scalar_point(1.0, 0, i), true});
        calibration.push_back({scalar_point(-1.0, 0, 5 + i), false});
    }
    const auto adv = fit_confidence(m, calibration);
    CHECK(adv.thresholds.size() == 1);
    CHECK(adv.thresholds[0] > 0.1);
    CHECK(adv.thresholds[0] <= 0.9 + 1e-12);
    CHECK(adv.classify(scalar_point(1.0, 0)));
    CHECK(!adv.classify(scalar_point(-1.0, 0)));

    // All scores identical: constant classifier, zero fitted advantage.
    const Model flat = scalar_confidence_model(0.0);
    const auto constant = fit_confidence(flat, calibration);
    const bool first = constant.classify(scalar_point(0.7, 0));
    CHECK(constant.classify(scalar_point(-0.3, 0)) == first);

    std::vector<CalibrationPoint> single_class;
    for (int i = 0; i < 4; ++i) single_class.push_back({scalar_point(0.1 * i, 0, i), true});
    CHECK_THROWS_AS(fit_confidence(m, single_class), DegenerateCalibration);
    CHECK_THROWS_AS(fit_confidence(m, {}), DegenerateCalibration);
}

TEST_CASE("modified entropy formula") {
    Eigen::VectorXd onehot(2);
    onehot << 1.0, 0.0;
    CHECK(modified_entropy(onehot, 0) == 0.0); // maximal member score

    Eigen::VectorXd wrong(2);
    wrong << 0.0, 1.0;
    const double clamped = modified_entropy(wrong, 0);
    CHECK(std::isfinite(clamped));
    CHECK(clamped == doctest::Approx(-2.0 * std::log(1e-12)).epsilon(1e-9));

    // Naive re-evaluation oracle on random probability vectors.
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const int c = 2 + static_cast<int>(rng.uniform_int(4));
        Eigen::VectorXd p(c);
        double total = 0.0;
        for (int i = 0; i < c; ++i) {
            p[i] = rng.uniform() + 1e-6;
            total += p[i];
        }
        p /= total;
        const int y = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(c)));

        double naive = -(1.0 - p[y]) * std::log(std::max(p[y], 1e-12));
        for (int i = 0; i < c; ++i) {
            if (i != y) naive -= p[i] * std::log(std::max(1.0 - p[i], 1e-12));
        }
        CHECK(std::abs(modified_entropy(p, y) - naive) <= 1e-10);
    }
}

TEST_CASE("fit_mentropy fits per-class thresholds") {
    const Model m = scalar_confidence_model(logit(0.9));
    std::vector<CalibrationPoint> calibration;
    for (int i = 0; i < 4; ++i) {
        calibration.push_back({scalar_point(1.0, 0, i), true});
        calibration.push_back({scalar_point(-1.0, 0, 4 + i), false});
        calibration.push_back({scalar_point(-1.0, 1, 8 + i), true});
        calibration.push_back({scalar_point(1.0, 1, 12 + i), false});
    }
    const auto adv = fit_mentropy(m, calibration);
    CHECK(adv.thresholds.size() == 2);
    CHECK(adv.classify(scalar_point(1.0, 0)));
    CHECK(!adv.classify(scalar_point(-1.0, 0)));
    CHECK(adv.classify(scalar_point(-1.0, 1)));
    CHECK(!adv.classify(scalar_point(1.0, 1)));
}

TEST_CASE("attack features are sorted and carry the true-label probability") {
    Eigen::VectorXd p(3);
    p << 0.2, 0.5, 0.3;
    const Eigen::VectorXd f = ShadowEnsemble::attack_feature(p, 2);
    CHECK(f.size() == 4);
    CHECK(f[0] == 0.5);
    CHECK(f[1] == 0.3);
    CHECK(f[2] == 0.2);
    CHECK(f[3] == 0.3);

    // Permuting classes (and tracking the label) leaves the feature unchanged.
    Eigen::VectorXd permuted(3);
    permuted << 0.5, 0.3, 0.2; // classes reordered, old label 2 now at index 1
    const Eigen::VectorXd g = ShadowEnsemble::attack_feature(permuted, 1);
    CHECK((f - g).norm() == 0.0);
}

TEST_CASE("shadow attack transfers membership signal to a fresh target model") {
    SyntheticSpec spec;
    spec.num_points = 80;
    spec.dim = 20;
    spec.num_classes = 2;
    spec.cluster_separation = 2.0;
    spec.noise_sigma = 2.0;
    spec.seed = 21;
    const Dataset shadow_data = generate_synthetic(spec);
    spec.seed = 22; // independent draw from the same distribution
    const Dataset target_data = generate_synthetic(spec);

    LearnerSpec learner;
    learner.l2_lambda = 0.0; // overfit regime
    TrainConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.epochs = 500;

    ShadowConfig shadow_cfg;
    shadow_cfg.shadow_dataset = shadow_data;
    shadow_cfg.num_shadow = 2;
    shadow_cfg.learner = learner;
    shadow_cfg.train_config = cfg;
    shadow_cfg.seed = 31;
    const ShadowEnsemble ensemble(shadow_cfg);

    // Fresh target model trained on the first half of the target data.
    std::vector<std::int64_t> in_ids, out_ids;
    for (std::int64_t i = 0; i < target_data.size(); ++i) {
        (i < target_data.size() / 2 ? in_ids : out_ids).push_back(i);
    }
    TrainConfig tcfg = cfg;
    tcfg.seed = 99;
    const Model target = train(learner, target_data.subset(in_ids), tcfg, 2);

    const WeakAdversary adv = ensemble.fit(target);
    int correct = 0, total = 0;
    for (std::int64_t id : in_ids) {
        correct += adv.classify(target_data.point(id)) ? 1 : 0;
        ++total;
    }
    for (std::int64_t id : out_ids) {
        correct += adv.classify(target_data.point(id)) ? 0 : 1;
        ++total;
    }
    const double accuracy = static_cast<double>(correct) / total;
    CHECK(accuracy > 0.5);

    // Determinism: rebuilding the ensemble reproduces the same scores.
    const ShadowEnsemble again(shadow_cfg);
    const WeakAdversary adv2 = again.fit(target);
    for (std::int64_t id = 0; id < 10; ++id) {
        CHECK(adv.score(target_data.point(id)) == adv2.score(target_data.point(id)));
    }
}

TEST_CASE("lookup adversary answers from the intersection table") {
    const auto d = test_util::tiny_dataset(8);
    Split s1, s2;
    s1.retain = {4, 5, 6, 7};
    s1.forget = {0, 1};
    s1.test = {2, 3};
    s1.alpha = Rational(1, 3);
    s2.retain = {5, 6, 7, 3};
    std::sort(s2.retain.begin(), s2.retain.end());
    s2.forget = {0, 4};
    std::sort(s2.forget.begin(), s2.forget.end());
    s2.test = {1, 2};
    s2.alpha = Rational(1, 3);
    // F1 n F2 = {0}, T1 n T2 = {2}.

    const StrongAdversary adv = lookup_adversary(s1, s2);

    int draws = 0;
    const auto draw_zero = [&]() -> const DataPoint& {
        ++draws;
        return d.point(0);
    };
    CHECK(adv.decide(nullptr, draw_zero, 100) == 0);
    CHECK(draws == 1);

    const auto draw_one = [&]() -> const DataPoint& { return d.point(2); };
    CHECK(adv.decide(nullptr, draw_one, 100) == 1);

    // Oracle that never hits the table: budget exhaustion.
    const auto draw_undefined = [&]() -> const DataPoint& { return d.point(7); };
    CHECK_THROWS_AS(adv.decide(nullptr, draw_undefined, 5), QueryBudgetExceeded);

    // Identical splits: table is exact on F u T.
    const StrongAdversary self = lookup_adversary(s1, s1);
    CHECK(self.decide(nullptr, draw_zero, 10) == 0);
    CHECK(self.decide(nullptr, draw_one, 10) == 1);

    // Empty intersections are rejected.
    Split disjoint = s1;
    disjoint.forget = {2, 3};
    disjoint.test = {0, 1};
    CHECK_THROWS_AS(lookup_adversary(s1, disjoint), NonOverlappingSplits);
}

TEST_CASE("weak_to_strong draws exactly once and matches the classifier") {
    const Model m = scalar_confidence_model(logit(0.9));
    std::vector<CalibrationPoint> calibration;
    for (int i = 0; i < 4; ++i) {
        calibration.push_back({scalar_point(1.0, 0, i), true});
        calibration.push_back({scalar_point(-1.0, 0, 4 + i), false});
    }
    const WeakAdversary weak = fit_confidence(m, calibration);
    const StrongAdversary strong = weak_to_strong(weak);

    const auto d = test_util::tiny_dataset(4);
    int draws = 0;
    DataPoint member = scalar_point(1.0, 0);
    const auto draw = [&]() -> const DataPoint& {
        ++draws;
        return member;
    };
    CHECK(strong.decide(nullptr, draw, 100) == 1);
    CHECK(draws == 1);

    // Analytic accept rate equals the mass-weighted classifier output.
    std::vector<DataPoint> pts = {scalar_point(1.0, 0, 0), scalar_point(-1.0, 0, 1)};
    const Dataset tiny(std::move(pts), 2);
    std::map<std::int64_t, double> mass{{0, 0.25}, {1, 0.75}};
    CHECK(strong.analytic_accept(tiny, mass) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("fit_mentropy falls back to the pooled threshold for absent classes") {
    const Model m = scalar_confidence_model(logit(0.9));
    std::vector<CalibrationPoint> only_class0;
    for (int i = 0; i < 4; ++i) {
        only_class0.push_back({scalar_point(1.0, 0, i), true});
        only_class0.push_back({scalar_point(-1.0, 0, 4 + i), false});
    }
    const auto adv = fit_mentropy(m, only_class0);
    REQUIRE(adv.thresholds.size() == 2);
    CHECK(adv.thresholds[1] == adv.thresholds[0]); // pooled fallback
    // Still a total function on class-1 points.
    (void)adv.classify(scalar_point(0.3, 1));
}
