#ifndef UNLEARN_LEARNER_HPP
#define UNLEARN_LEARNER_HPP

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "unlearn/data.hpp"

namespace unlearn {

enum class LearnerKind { LogisticRegression, Mlp1 };

std::string learner_kind_name(LearnerKind kind);
LearnerKind parse_learner_kind(const std::string& name);

// The learning algorithm's hyperparameters. The model zoo is deliberately
// small: softmax regression (convex, supports the Newton removal path) and a
// one-hidden-layer tanh MLP (gives final-layer unlearners a real final layer).
struct LearnerSpec {
    LearnerKind kind = LearnerKind::LogisticRegression;
    double l2_lambda = 0.0;
    int hidden_width = 0;                      // mlp1 only
    double objective_perturbation_sigma = 0.0; // logistic_regression only

    void validate() const;
    std::uint64_t digest() const;
};

struct TrainConfig {
    double learning_rate = 0.1;
    int epochs = 1000;
    int batch_size = 0; // 0 = full batch
    std::uint64_t seed = 0;
    double tolerance = 1e-8; // gradient-norm early stop

    void validate() const;
    std::uint64_t digest() const;
};

struct TrainMeta {
    std::uint64_t seed = 0;
    double final_grad_norm = 0.0;
    int epochs_run = 0;
};

// Trained parameter vector plus everything needed to reproduce / audit it.
//
// Parameter layouts (flat, row-major weight blocks then biases):
//   logistic_regression: [W (C x d)], [bias (C)]            -> C*(d+1)
//   mlp1:                [W1 (h x d)], [b1], [W2 (C x h)], [b2]
struct Model {
    LearnerSpec spec;
    int dim = 0;
    int num_classes = 0;
    Eigen::VectorXd params;
    std::optional<Eigen::VectorXd> perturbation; // linear objective term, kept for Newton removal
    TrainMeta meta;

    std::int64_t param_count() const noexcept { return params.size(); }
};

std::int64_t expected_param_count(const LearnerSpec& spec, int dim, int num_classes);

// Minimizes  mean cross-entropy + (l2_lambda/2)*||theta||^2
// (+ perturbation . theta / n   when objective perturbation is enabled;
//  the perturbation vector is drawn once from config.seed and stored on the
//  returned model). Full-batch gradient descent unless batch_size > 0.
// Deterministic given (spec, subset order, config). num_classes -1 infers
// max(label)+1 from the subset.
Model train(const LearnerSpec& spec, const std::vector<DataPoint>& subset,
            const TrainConfig& config, int num_classes = -1);

// Class-probability vector; non-negative, sums to 1.
Eigen::VectorXd predict_proba(const Model& model, const Eigen::VectorXd& features);

// Value and gradient of the regularized (and perturbed, when enabled)
// mean objective over `subset` at model.params.
double objective_value(const Model& model, const std::vector<DataPoint>& subset);
Eigen::VectorXd loss_gradient(const Model& model, const std::vector<DataPoint>& subset);

// Data-term pieces used by the removal machinery: no regularizer, no
// perturbation, plain sums over the subset.
Eigen::VectorXd per_example_data_gradient(const Model& model, const DataPoint& point);
Eigen::VectorXd sum_data_gradients(const Model& model, const std::vector<DataPoint>& subset);

// Exact Hessian of the regularized mean objective; logistic_regression only.
Eigen::MatrixXd hessian(const Model& model, const std::vector<DataPoint>& subset);
// Sum over subset of per-example data-term Hessians (no regularizer).
Eigen::MatrixXd sum_data_hessian(const Model& model, const std::vector<DataPoint>& subset);

// Empirical Fisher diagonal: mean of squared per-example log-likelihood
// gradients; entrywise >= 0.
Eigen::VectorXd fisher_diagonal(const Model& model, const std::vector<DataPoint>& subset);

// Versioned text record; exact (hexfloat) round-trip, byte-stable per platform.
std::string model_to_string(const Model& model);
Model model_from_string(const std::string& text);
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

} // namespace unlearn

#endif // UNLEARN_LEARNER_HPP
