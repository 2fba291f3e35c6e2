#ifndef UNLEARN_UNLEARNER_HPP
#define UNLEARN_UNLEARNER_HPP

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "unlearn/learner.hpp"

namespace unlearn {

enum class UnlearnerKind { Retrain, None, NegGrad, FtFinal, RetrFinal, Fisher, CrNewton };

std::string unlearner_kind_name(UnlearnerKind kind);
UnlearnerKind parse_unlearner_kind(const std::string& name);

struct UnlearnerSpec {
    UnlearnerKind kind = UnlearnerKind::Retrain;
    int steps = 0;              // neg_grad / ft_final / retr_final
    double learning_rate = 0.0; // neg_grad / ft_final / retr_final
    double noise_sigma = 0.0;   // fisher
    double epsilon_budget = 0.0; // cr_newton
    double delta = 0.0;          // cr_newton

    void validate() const;
    // Stable tag used in reports and seed derivation, e.g. "neg_grad".
    std::string name() const { return unlearner_kind_name(kind); }
    std::uint64_t digest() const;
};

// Removal-budget accounting for cr_newton. The budget is stored in gradient
// residual-norm units (epsilon_budget * sigma / c(delta)), so the trigger
// comparison is unit-consistent with accumulated_residual_norm;
// epsilon_consumed carries the same information on the epsilon scale.
struct RemovalLedger {
    double accumulated_residual_norm = 0.0;
    double budget = 0.0;
    bool retrain_triggered = false;
    double epsilon_consumed = 0.0;
};

struct UnlearnResult {
    Model model;
    std::optional<RemovalLedger> ledger; // present for cr_newton only
};

// epsilon consumed by a removal whose gradient residual norm is
// `residual_norm`, under objective perturbation scale `sigma`:
//   c(delta) * residual_norm / sigma,  c(delta) = sqrt(2 ln(1.5/delta)).
double residual_to_budget(double residual_norm, double sigma, double delta);

// One Newton step toward the retain optimum: theta + H^{-1} g, where H is the
// (positive definite) retain-objective Hessian and g the summed forget-point
// gradients at theta. Exact when the objective is quadratic.
Eigen::VectorXd newton_correction(const Eigen::VectorXd& theta, const Eigen::MatrixXd& hessian_retain,
                                  const Eigen::VectorXd& forget_gradient_sum);

// Unlearn(Learn(R u F), F). `seed` drives the method's own randomness;
// `retrain_seed` is the seed the retraining path uses (also the cr_newton
// fallback), so callers can share retrain draws across splits with equal
// retain sets. Defaults to `seed` when not given.
UnlearnResult unlearn(const UnlearnerSpec& spec, const Model& original,
                      const std::vector<DataPoint>& retain, const std::vector<DataPoint>& forget,
                      const LearnerSpec& learner, const TrainConfig& train_config,
                      std::uint64_t seed);
UnlearnResult unlearn(const UnlearnerSpec& spec, const Model& original,
                      const std::vector<DataPoint>& retain, const std::vector<DataPoint>& forget,
                      const LearnerSpec& learner, const TrainConfig& train_config,
                      std::uint64_t seed, std::uint64_t retrain_seed);

} // namespace unlearn

#endif // UNLEARN_UNLEARNER_HPP
