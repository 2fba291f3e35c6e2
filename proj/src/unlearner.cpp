#include "unlearn/unlearner.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <cstring>

#include "unlearn/errors.hpp"
#include "unlearn/rng.hpp"

namespace unlearn {

namespace {

constexpr double kFisherFloor = 1e-8;

struct FinalLayerRange {
    int offset;
    int count;
};

// For mlp1 the final layer is the output weight matrix plus its bias.
FinalLayerRange final_layer_range(const Model& m) {
    const int d = m.dim;
    const int h = m.spec.hidden_width;
    const int c = m.num_classes;
    return {h * d + h, c * h + c};
}

Model neg_grad(const UnlearnerSpec& spec, Model m, const std::vector<DataPoint>& forget) {
    for (int step = 0; step < spec.steps; ++step) {
        m.params += spec.learning_rate * loss_gradient(m, forget);
        if (!m.params.allFinite()) {
            throw DivergedTraining("neg_grad produced non-finite parameters");
        }
    }
    return m;
}

Model final_layer_descent(const UnlearnerSpec& spec, Model m, const std::vector<DataPoint>& retain) {
    const FinalLayerRange range = final_layer_range(m);
    for (int step = 0; step < spec.steps; ++step) {
        const Eigen::VectorXd grad = loss_gradient(m, retain);
        m.params.segment(range.offset, range.count) -=
            spec.learning_rate * grad.segment(range.offset, range.count);
        if (!m.params.allFinite()) {
            throw DivergedTraining("final-layer descent produced non-finite parameters");
        }
    }
    return m;
}

Model fisher_noise(const UnlearnerSpec& spec, Model m, const std::vector<DataPoint>& retain,
                   std::uint64_t seed) {
    if (spec.noise_sigma == 0.0) return m;
    Eigen::VectorXd diag = fisher_diagonal(m, retain).cwiseMax(kFisherFloor);
    Rng rng(derive_seed(seed, "fisher"));
    for (std::int64_t i = 0; i < m.params.size(); ++i) {
        m.params[i] += spec.noise_sigma * std::pow(diag[i], -0.25) * rng.gaussian();
    }
    if (!m.params.allFinite()) {
        throw DivergedTraining("fisher noise produced non-finite parameters");
    }
    return m;
}

UnlearnResult cr_newton(const UnlearnerSpec& spec, const Model& original,
                        const std::vector<DataPoint>& retain, const std::vector<DataPoint>& forget,
                        const LearnerSpec& learner, const TrainConfig& train_config,
                        std::uint64_t retrain_seed) {
    if (original.spec.kind != LearnerKind::LogisticRegression) {
        throw UnsupportedModel("cr_newton requires logistic_regression", "unlearner.kind");
    }
    const double sigma = original.spec.objective_perturbation_sigma;
    if (!(sigma > 0.0)) {
        throw InvalidParameter("cr_newton requires objective_perturbation_sigma > 0",
                               "learner.objective_perturbation_sigma");
    }
    if (!original.perturbation) {
        throw InvalidParameter("cr_newton requires the training perturbation vector",
                               "model.perturbation");
    }
    if (forget.empty()) {
        throw InvalidParameter("cr_newton with empty forget set", "forget");
    }

    // Work on the sum-scale perturbed objective the model was trained under:
    //   sum_i loss_i + (Lambda/2)||theta||^2 + q.theta,  Lambda = n * l2_lambda,
    // so the correction theta + H_R^{-1} sum_F grad matches the trained optimum.
    const double n_train = static_cast<double>(retain.size() + forget.size());
    const double lambda_total = n_train * original.spec.l2_lambda;

    Eigen::MatrixXd h = sum_data_hessian(original, retain);
    h.diagonal().array() += lambda_total;
    const Eigen::VectorXd g_forget = sum_data_gradients(original, forget);

    UnlearnResult result;
    result.model = original;
    result.model.params = newton_correction(original.params, h, g_forget);
    if (!result.model.params.allFinite()) {
        throw DivergedTraining("newton correction produced non-finite parameters");
    }

    const Eigen::VectorXd residual = sum_data_gradients(result.model, retain) +
                                     lambda_total * result.model.params + *original.perturbation;

    RemovalLedger ledger;
    ledger.accumulated_residual_norm = residual.norm();
    ledger.epsilon_consumed = residual_to_budget(ledger.accumulated_residual_norm, sigma, spec.delta);
    const double c_delta = std::sqrt(2.0 * std::log(1.5 / spec.delta));
    ledger.budget = spec.epsilon_budget * sigma / c_delta;
    ledger.retrain_triggered = ledger.accumulated_residual_norm > ledger.budget;

    if (ledger.retrain_triggered) {
        TrainConfig cfg = train_config;
        cfg.seed = retrain_seed;
        result.model = train(learner, retain, cfg, original.num_classes);
    }
    result.ledger = ledger;
    return result;
}

} // namespace

std::string unlearner_kind_name(UnlearnerKind kind) {
    switch (kind) {
    case UnlearnerKind::Retrain: return "retrain";
    case UnlearnerKind::None: return "none";
    case UnlearnerKind::NegGrad: return "neg_grad";
    case UnlearnerKind::FtFinal: return "ft_final";
    case UnlearnerKind::RetrFinal: return "retr_final";
    case UnlearnerKind::Fisher: return "fisher";
    case UnlearnerKind::CrNewton: return "cr_newton";
    }
    return "unknown";
}

UnlearnerKind parse_unlearner_kind(const std::string& name) {
    if (name == "retrain") return UnlearnerKind::Retrain;
    if (name == "none") return UnlearnerKind::None;
    if (name == "neg_grad") return UnlearnerKind::NegGrad;
    if (name == "ft_final") return UnlearnerKind::FtFinal;
    if (name == "retr_final") return UnlearnerKind::RetrFinal;
    if (name == "fisher") return UnlearnerKind::Fisher;
    if (name == "cr_newton") return UnlearnerKind::CrNewton;
    throw InvalidParameter("unknown unlearner kind: " + name, "unlearner.kind");
}

void UnlearnerSpec::validate() const {
    const bool uses_steps = kind == UnlearnerKind::NegGrad || kind == UnlearnerKind::FtFinal ||
                            kind == UnlearnerKind::RetrFinal;
    if (uses_steps) {
        if (steps < 0) {
            throw InvalidParameter("steps must be >= 0", "unlearner.steps");
        }
        if (steps > 0 && !(learning_rate > 0.0 && std::isfinite(learning_rate))) {
            throw InvalidParameter("learning_rate must be finite and > 0",
                                   "unlearner.learning_rate");
        }
    } else if (steps != 0 || learning_rate != 0.0) {
        throw InvalidParameter("steps/learning_rate apply to neg_grad, ft_final, retr_final only",
                               "unlearner.steps");
    }
    if (kind == UnlearnerKind::Fisher) {
        if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
            throw InvalidParameter("noise_sigma must be finite and >= 0", "unlearner.noise_sigma");
        }
    } else if (noise_sigma != 0.0) {
        throw InvalidParameter("noise_sigma applies to fisher only", "unlearner.noise_sigma");
    }
    if (kind == UnlearnerKind::CrNewton) {
        if (!(epsilon_budget > 0.0) || !std::isfinite(epsilon_budget)) {
            throw InvalidParameter("epsilon_budget must be finite and > 0",
                                   "unlearner.epsilon_budget");
        }
        if (!(delta > 0.0 && delta < 1.0)) {
            throw InvalidParameter("delta must lie in (0, 1)", "unlearner.delta");
        }
    } else if (epsilon_budget != 0.0 || delta != 0.0) {
        throw InvalidParameter("epsilon_budget/delta apply to cr_newton only",
                               "unlearner.epsilon_budget");
    }
}

std::uint64_t UnlearnerSpec::digest() const {
    auto bits = [](double v) {
        std::uint64_t b;
        std::memcpy(&b, &v, sizeof(b));
        return b;
    };
    std::uint64_t h = hash_string(0x517cc1b7u, name());
    h = hash_combine(h, static_cast<std::uint64_t>(steps));
    h = hash_combine(h, bits(learning_rate));
    h = hash_combine(h, bits(noise_sigma));
    h = hash_combine(h, bits(epsilon_budget));
    h = hash_combine(h, bits(delta));
    return h;
}

double residual_to_budget(double residual_norm, double sigma, double delta) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InvalidParameter("sigma must be finite and > 0", "sigma");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw InvalidParameter("delta must lie in (0, 1)", "delta");
    }
    if (!(residual_norm >= 0.0) || !std::isfinite(residual_norm)) {
        throw InvalidParameter("residual_norm must be finite and >= 0", "residual_norm");
    }
    return std::sqrt(2.0 * std::log(1.5 / delta)) * residual_norm / sigma;
}

Eigen::VectorXd newton_correction(const Eigen::VectorXd& theta, const Eigen::MatrixXd& hessian_retain,
                                  const Eigen::VectorXd& forget_gradient_sum) {
    if (hessian_retain.rows() != hessian_retain.cols() || hessian_retain.rows() != theta.size() ||
        forget_gradient_sum.size() != theta.size()) {
        throw DimensionMismatch("newton correction operand shapes disagree", "hessian");
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian_retain);
    if (ldlt.info() != Eigen::Success) {
        throw InvalidParameter("retain hessian is not positive definite", "hessian");
    }
    return theta + ldlt.solve(forget_gradient_sum);
}

UnlearnResult unlearn(const UnlearnerSpec& spec, const Model& original,
                      const std::vector<DataPoint>& retain, const std::vector<DataPoint>& forget,
                      const LearnerSpec& learner, const TrainConfig& train_config,
                      std::uint64_t seed) {
    return unlearn(spec, original, retain, forget, learner, train_config, seed, seed);
}

UnlearnResult unlearn(const UnlearnerSpec& spec, const Model& original,
                      const std::vector<DataPoint>& retain, const std::vector<DataPoint>& forget,
                      const LearnerSpec& learner, const TrainConfig& train_config,
                      std::uint64_t seed, std::uint64_t retrain_seed) {
    spec.validate();
    if (retain.empty()) {
        throw InvalidParameter("retain set must be nonempty", "retain");
    }
    const bool final_layer_kind =
        spec.kind == UnlearnerKind::FtFinal || spec.kind == UnlearnerKind::RetrFinal;
    if (final_layer_kind && original.spec.kind != LearnerKind::Mlp1) {
        // For logistic regression the "final layer" is the whole model, which
        // would degenerate these methods into full fine-tuning / retraining.
        throw UnsupportedModel(spec.name() + " requires mlp1", "unlearner.kind");
    }

    switch (spec.kind) {
    case UnlearnerKind::Retrain: {
        TrainConfig cfg = train_config;
        cfg.seed = retrain_seed;
        return {train(learner, retain, cfg, original.num_classes), std::nullopt};
    }
    case UnlearnerKind::None:
        return {original, std::nullopt};
    case UnlearnerKind::NegGrad:
        return {neg_grad(spec, original, forget), std::nullopt};
    case UnlearnerKind::FtFinal:
        return {final_layer_descent(spec, original, retain), std::nullopt};
    case UnlearnerKind::RetrFinal: {
        Model m = original;
        const FinalLayerRange range = final_layer_range(m);
        Rng rng(derive_seed(seed, "reinit"));
        const double bound = 1.0 / std::sqrt(static_cast<double>(m.spec.hidden_width));
        for (int i = 0; i < range.count; ++i) {
            m.params[range.offset + i] = (2.0 * rng.uniform() - 1.0) * bound;
        }
        return {final_layer_descent(spec, std::move(m), retain), std::nullopt};
    }
    case UnlearnerKind::Fisher:
        return {fisher_noise(spec, original, retain, seed), std::nullopt};
    case UnlearnerKind::CrNewton:
        return cr_newton(spec, original, retain, forget, learner, train_config, retrain_seed);
    }
    throw InvalidParameter("unhandled unlearner kind", "unlearner.kind");
}

} // namespace unlearn
