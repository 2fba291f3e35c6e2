#include "unlearn/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "unlearn/errors.hpp"
#include "unlearn/rng.hpp"

namespace unlearn {

namespace {

int argmax_class(const Eigen::VectorXd& probs) {
    int best = 0;
    for (int i = 1; i < probs.size(); ++i) {
        if (probs[i] > probs[best]) best = i; // ties keep the smaller index
    }
    return best;
}

std::shared_ptr<const Model> shared_copy(const Model& model) {
    return std::make_shared<const Model>(model);
}

} // namespace

double WeakAdversary::threshold_for(int label) const {
    if (thresholds.size() == 1) return thresholds.front();
    if (label < 0 || static_cast<std::size_t>(label) >= thresholds.size()) {
        throw InvalidParameter("no fitted threshold for label " + std::to_string(label), "label");
    }
    return thresholds[static_cast<std::size_t>(label)];
}

double fit_threshold(const std::vector<std::pair<double, bool>>& scored) {
    std::size_t members = 0;
    for (const auto& [s, m] : scored) {
        if (m) ++members;
    }
    if (members == 0 || members == scored.size()) {
        throw DegenerateCalibration("calibration must contain both members and non-members",
                                    "calibration");
    }
    std::vector<double> candidates;
    candidates.reserve(scored.size() + 1);
    for (const auto& [s, m] : scored) candidates.push_back(s);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    candidates.push_back(std::numeric_limits<double>::infinity()); // constant-0 classifier

    const double n_member = static_cast<double>(members);
    const double n_non = static_cast<double>(scored.size() - members);
    double best_threshold = candidates.front();
    double best_gain = -std::numeric_limits<double>::infinity();
    for (double t : candidates) {
        double tpr = 0.0, fpr = 0.0;
        for (const auto& [s, m] : scored) {
            if (s >= t) {
                if (m) tpr += 1.0;
                else fpr += 1.0;
            }
        }
        const double gain = tpr / n_member - fpr / n_non;
        if (gain > best_gain) { // strict: ties keep the smaller threshold
            best_gain = gain;
            best_threshold = t;
        }
    }
    return best_threshold;
}

WeakAdversary fit_correctness(const Model& model) {
    WeakAdversary adv;
    adv.name = "correctness";
    adv.fit_meta = "correctness of model prediction; threshold 0.5";
    adv.thresholds = {0.5};
    auto m = shared_copy(model);
    adv.score = [m](const DataPoint& p) {
        return argmax_class(predict_proba(*m, p.features)) == p.label ? 1.0 : 0.0;
    };
    return adv;
}

WeakAdversary confidence_with_thresholds(const Model& model, std::vector<double> thresholds,
                                         std::string fit_meta) {
    WeakAdversary adv;
    adv.name = "confidence";
    adv.fit_meta = std::move(fit_meta);
    adv.thresholds = std::move(thresholds);
    auto m = shared_copy(model);
    adv.score = [m](const DataPoint& p) { return predict_proba(*m, p.features)[p.label]; };
    return adv;
}

WeakAdversary fit_confidence(const Model& model, const std::vector<CalibrationPoint>& calibration) {
    if (calibration.empty()) {
        throw DegenerateCalibration("empty calibration set", "calibration");
    }
    std::vector<std::pair<double, bool>> scored;
    scored.reserve(calibration.size());
    for (const auto& c : calibration) {
        scored.emplace_back(predict_proba(model, c.point.features)[c.point.label], c.member);
    }
    const double t = fit_threshold(scored);
    std::ostringstream meta;
    meta << "threshold " << t << " fit on " << calibration.size() << " calibration points";
    return confidence_with_thresholds(model, {t}, meta.str());
}

double modified_entropy(const Eigen::VectorXd& probs, int label) {
    constexpr double clamp = 1e-12;
    const double py = probs[label];
    double mentr = -(1.0 - py) * std::log(std::max(py, clamp));
    for (int i = 0; i < probs.size(); ++i) {
        if (i == label) continue;
        mentr -= probs[i] * std::log(std::max(1.0 - probs[i], clamp));
    }
    return mentr;
}

WeakAdversary mentropy_with_thresholds(const Model& model, std::vector<double> thresholds,
                                       std::string fit_meta) {
    WeakAdversary adv;
    adv.name = "mentropy";
    adv.fit_meta = std::move(fit_meta);
    adv.thresholds = std::move(thresholds);
    auto m = shared_copy(model);
    adv.score = [m](const DataPoint& p) {
        return -modified_entropy(predict_proba(*m, p.features), p.label);
    };
    return adv;
}

WeakAdversary fit_mentropy(const Model& model, const std::vector<CalibrationPoint>& calibration) {
    if (calibration.empty()) {
        throw DegenerateCalibration("empty calibration set", "calibration");
    }
    // Per-class score tables; classes absent from calibration fall back to
    // the pooled threshold.
    std::vector<std::vector<std::pair<double, bool>>> per_class(
        static_cast<std::size_t>(model.num_classes));
    std::vector<std::pair<double, bool>> pooled;
    for (const auto& c : calibration) {
        const double s = -modified_entropy(predict_proba(model, c.point.features), c.point.label);
        per_class.at(static_cast<std::size_t>(c.point.label)).emplace_back(s, c.member);
        pooled.emplace_back(s, c.member);
    }
    const double pooled_threshold = fit_threshold(pooled);
    std::vector<double> thresholds(per_class.size(), pooled_threshold);
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        if (!per_class[c].empty()) {
            thresholds[c] = fit_threshold(per_class[c]);
        }
    }
    std::ostringstream meta;
    meta << "per-class thresholds fit on " << calibration.size() << " calibration points";
    return mentropy_with_thresholds(model, std::move(thresholds), meta.str());
}

void ShadowConfig::validate() const {
    if (num_shadow < 1) {
        throw InvalidParameter("num_shadow must be >= 1", "shadow.num_shadow");
    }
    if (shadow_dataset.size() < 2) {
        throw InvalidParameter("shadow dataset too small to split", "shadow.dataset");
    }
    learner.validate();
    train_config.validate();
}

ShadowEnsemble::ShadowEnsemble(const ShadowConfig& config) : config_(config) {
    config_.validate();
    const auto& data = config_.shadow_dataset;
    const std::int64_t n = data.size();
    const std::int64_t half = n / 2;

    for (int k = 0; k < config_.num_shadow; ++k) {
        std::vector<std::int64_t> ids(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
        Rng rng(derive_seed(config_.seed, "shadow_split", {static_cast<std::uint64_t>(k)}));
        rng.shuffle(ids);
        std::vector<std::int64_t> in_ids(ids.begin(), ids.begin() + half);
        std::sort(in_ids.begin(), in_ids.end());

        TrainConfig cfg = config_.train_config;
        cfg.seed = derive_seed(config_.seed, "shadow_train", {static_cast<std::uint64_t>(k)});
        models_.push_back(train(config_.learner, data.subset(in_ids), cfg, data.num_classes()));
        in_ids_.push_back(std::move(in_ids));
    }

    // Per-class attack classifiers over (in/out) shadow examples.
    const int num_classes = data.num_classes();
    std::vector<std::vector<DataPoint>> attack_sets(static_cast<std::size_t>(num_classes));
    for (int k = 0; k < config_.num_shadow; ++k) {
        const auto& in_ids = in_ids_[static_cast<std::size_t>(k)];
        for (const auto& p : data.points()) {
            const bool member = std::binary_search(in_ids.begin(), in_ids.end(), p.id);
            DataPoint ap;
            ap.features = attack_feature(predict_proba(models_[static_cast<std::size_t>(k)], p.features),
                                         p.label);
            ap.label = member ? 1 : 0;
            attack_sets[static_cast<std::size_t>(p.label)].push_back(std::move(ap));
        }
    }
    for (int c = 0; c < num_classes; ++c) {
        auto& set = attack_sets[static_cast<std::size_t>(c)];
        bool has_in = false, has_out = false;
        for (const auto& p : set) {
            (p.label == 1 ? has_in : has_out) = true;
        }
        if (!has_in || !has_out) {
            throw DegenerateCalibration("class " + std::to_string(c) +
                                            " lacks in or out shadow examples",
                                        "shadow");
        }
        LearnerSpec attack_spec;
        attack_spec.kind = LearnerKind::LogisticRegression;
        attack_spec.l2_lambda = 1e-3;
        TrainConfig cfg;
        cfg.learning_rate = 0.5;
        cfg.epochs = 400;
        cfg.seed = derive_seed(config_.seed, "attack_train", {static_cast<std::uint64_t>(c)});
        attack_models_.push_back(train(attack_spec, set, cfg, 2));
    }
}

std::vector<CalibrationPoint> ShadowEnsemble::calibration(int index) const {
    const auto& in_ids = in_ids_.at(static_cast<std::size_t>(index));
    std::vector<CalibrationPoint> out;
    out.reserve(static_cast<std::size_t>(config_.shadow_dataset.size()));
    for (const auto& p : config_.shadow_dataset.points()) {
        out.push_back({p, std::binary_search(in_ids.begin(), in_ids.end(), p.id)});
    }
    return out;
}

Eigen::VectorXd ShadowEnsemble::attack_feature(const Eigen::VectorXd& probs, int label) {
    Eigen::VectorXd feature(probs.size() + 1);
    std::vector<double> sorted(probs.data(), probs.data() + probs.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        feature[static_cast<Eigen::Index>(i)] = sorted[i];
    }
    feature[probs.size()] = probs[label];
    return feature;
}

WeakAdversary ShadowEnsemble::fit(const Model& target) const {
    WeakAdversary adv;
    adv.name = "shadow";
    std::ostringstream meta;
    meta << config_.num_shadow << " shadow models on " << config_.shadow_dataset.size()
         << " shadow points; per-class attack classifiers; threshold 0.5";
    adv.fit_meta = meta.str();
    adv.thresholds = {0.5};
    auto t = shared_copy(target);
    auto attacks = std::make_shared<const std::vector<Model>>(attack_models_);
    adv.score = [t, attacks](const DataPoint& p) {
        const Eigen::VectorXd feature = attack_feature(predict_proba(*t, p.features), p.label);
        const auto& attack = attacks->at(static_cast<std::size_t>(p.label));
        return predict_proba(attack, feature)[1];
    };
    return adv;
}

WeakAdversary fit_shadow(const ShadowConfig& config, const Model& target) {
    return ShadowEnsemble(config).fit(target);
}

StrongAdversary lookup_adversary(const Split& s1, const Split& s2) {
    std::set<std::int64_t> ones;
    std::set<std::int64_t> zeros;
    std::set_intersection(s1.test.begin(), s1.test.end(), s2.test.begin(), s2.test.end(),
                          std::inserter(ones, ones.end()));
    std::set_intersection(s1.forget.begin(), s1.forget.end(), s2.forget.begin(), s2.forget.end(),
                          std::inserter(zeros, zeros.end()));
    if (ones.empty() || zeros.empty()) {
        throw NonOverlappingSplits("lookup adversary needs nonempty F1 n F2 and T1 n T2",
                                   "splits");
    }
    StrongAdversary adv;
    adv.name = "lookup";
    auto ones_ptr = std::make_shared<const std::set<std::int64_t>>(std::move(ones));
    auto zeros_ptr = std::make_shared<const std::set<std::int64_t>>(std::move(zeros));
    adv.decide = [ones_ptr, zeros_ptr](const Model*, const std::function<const DataPoint&()>& draw,
                                       int max_queries) -> int {
        for (int q = 0; q < max_queries; ++q) {
            const DataPoint& x = draw();
            if (ones_ptr->count(x.id)) return 1;
            if (zeros_ptr->count(x.id)) return 0;
        }
        throw QueryBudgetExceeded("lookup adversary exhausted its query budget", "max_queries");
    };
    adv.analytic_accept = [ones_ptr, zeros_ptr](const Dataset&,
                                                const std::map<std::int64_t, double>& mass) {
        double p1 = 0.0, p0 = 0.0;
        for (const auto& [id, p] : mass) {
            if (ones_ptr->count(id)) p1 += p;
            else if (zeros_ptr->count(id)) p0 += p;
        }
        if (p1 + p0 <= 0.0) {
            throw QueryBudgetExceeded("oracle mass never reaches the lookup table", "oracle");
        }
        return p1 / (p1 + p0);
    };
    return adv;
}

StrongAdversary weak_to_strong(const WeakAdversary& weak) {
    StrongAdversary adv;
    adv.name = weak.name + "(strong)";
    auto w = std::make_shared<const WeakAdversary>(weak);
    adv.decide = [w](const Model*, const std::function<const DataPoint&()>& draw,
                     int max_queries) -> int {
        if (max_queries < 1) {
            throw QueryBudgetExceeded("weak adversary needs one oracle draw", "max_queries");
        }
        return w->classify(draw()) ? 1 : 0;
    };
    adv.analytic_accept = [w](const Dataset& dataset, const std::map<std::int64_t, double>& mass) {
        double accept = 0.0;
        for (const auto& [id, p] : mass) {
            if (w->classify(dataset.point(id))) accept += p;
        }
        return accept;
    };
    return adv;
}

} // namespace unlearn
