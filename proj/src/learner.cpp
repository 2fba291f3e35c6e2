#include "unlearn/learner.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "unlearn/errors.hpp"
#include "unlearn/rng.hpp"

namespace unlearn {

namespace {

std::uint64_t double_bits(double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    return bits;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    const double zmax = logits.maxCoeff();
    Eigen::VectorXd p = (logits.array() - zmax).exp();
    p /= p.sum();
    return p;
}

// Layout offsets for mlp1.
struct MlpLayout {
    int d, h, c;
    int w1() const { return 0; }
    int b1() const { return h * d; }
    int w2() const { return h * d + h; }
    int b2() const { return h * d + h + c * h; }
    int total() const { return h * d + h + c * h + c; }
};

Eigen::VectorXd logistic_logits(const Model& m, const Eigen::VectorXd& x) {
    const int d = m.dim;
    const int c = m.num_classes;
    Eigen::VectorXd z(c);
    for (int k = 0; k < c; ++k) {
        z[k] = m.params.segment(k * d, d).dot(x) + m.params[c * d + k];
    }
    return z;
}

struct MlpForward {
    Eigen::VectorXd hidden;     // tanh activations
    Eigen::VectorXd probs;
};

MlpForward mlp_forward(const Model& m, const Eigen::VectorXd& x) {
    const MlpLayout L{m.dim, m.spec.hidden_width, m.num_classes};
    MlpForward f;
    f.hidden.resize(L.h);
    for (int k = 0; k < L.h; ++k) {
        f.hidden[k] = std::tanh(m.params.segment(L.w1() + k * L.d, L.d).dot(x) +
                                m.params[L.b1() + k]);
    }
    Eigen::VectorXd z(L.c);
    for (int k = 0; k < L.c; ++k) {
        z[k] = m.params.segment(L.w2() + k * L.h, L.h).dot(f.hidden) + m.params[L.b2() + k];
    }
    f.probs = softmax(z);
    return f;
}

void check_point(const Model& m, const DataPoint& p) {
    if (static_cast<int>(p.features.size()) != m.dim) {
        throw DimensionMismatch("feature dimension " + std::to_string(p.features.size()) +
                                    " != model dimension " + std::to_string(m.dim),
                                "features");
    }
    if (p.label < 0 || p.label >= m.num_classes) {
        throw InvalidParameter("label out of range for model", "label");
    }
}

// Accumulates the data-term gradient of one example into `grad`.
void add_example_gradient(const Model& m, const DataPoint& p, Eigen::VectorXd& grad) {
    if (m.spec.kind == LearnerKind::LogisticRegression) {
        const int d = m.dim;
        const int c = m.num_classes;
        Eigen::VectorXd dz = softmax(logistic_logits(m, p.features));
        dz[p.label] -= 1.0;
        for (int k = 0; k < c; ++k) {
            grad.segment(k * d, d) += dz[k] * p.features;
            grad[c * d + k] += dz[k];
        }
        return;
    }
    const MlpLayout L{m.dim, m.spec.hidden_width, m.num_classes};
    const MlpForward f = mlp_forward(m, p.features);
    Eigen::VectorXd dz2 = f.probs;
    dz2[p.label] -= 1.0;
    Eigen::VectorXd da = Eigen::VectorXd::Zero(L.h);
    for (int k = 0; k < L.c; ++k) {
        grad.segment(L.w2() + k * L.h, L.h) += dz2[k] * f.hidden;
        grad[L.b2() + k] += dz2[k];
        da += dz2[k] * m.params.segment(L.w2() + k * L.h, L.h);
    }
    const Eigen::VectorXd dz1 = da.cwiseProduct(
        (1.0 - f.hidden.array().square()).matrix());
    for (int k = 0; k < L.h; ++k) {
        grad.segment(L.w1() + k * L.d, L.d) += dz1[k] * p.features;
        grad[L.b1() + k] += dz1[k];
    }
}

double example_loss(const Model& m, const DataPoint& p) {
    Eigen::VectorXd probs;
    if (m.spec.kind == LearnerKind::LogisticRegression) {
        const Eigen::VectorXd z = logistic_logits(m, p.features);
        const double zmax = z.maxCoeff();
        const double lse = std::log((z.array() - zmax).exp().sum()) + zmax;
        return lse - z[p.label];
    }
    probs = mlp_forward(m, p.features).probs;
    return -std::log(std::max(probs[p.label], 1e-300));
}

// Regularized mean objective gradient over an index range of `subset`.
Eigen::VectorXd objective_gradient(const Model& m, const std::vector<DataPoint>& subset,
                                   const std::vector<std::size_t>& idx, std::size_t lo,
                                   std::size_t hi, std::size_t full_n) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(m.params.size());
    for (std::size_t i = lo; i < hi; ++i) {
        add_example_gradient(m, subset[idx[i]], grad);
    }
    grad /= static_cast<double>(hi - lo);
    grad += m.spec.l2_lambda * m.params;
    if (m.perturbation) {
        grad += *m.perturbation / static_cast<double>(full_n);
    }
    return grad;
}

} // namespace

std::string learner_kind_name(LearnerKind kind) {
    return kind == LearnerKind::LogisticRegression ? "logistic_regression" : "mlp1";
}

LearnerKind parse_learner_kind(const std::string& name) {
    if (name == "logistic_regression") return LearnerKind::LogisticRegression;
    if (name == "mlp1") return LearnerKind::Mlp1;
    throw InvalidParameter("unknown learner kind: " + name, "learner.kind");
}

void LearnerSpec::validate() const {
    if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda)) {
        throw InvalidParameter("l2_lambda must be finite and >= 0", "learner.l2_lambda");
    }
    if (kind == LearnerKind::Mlp1) {
        if (hidden_width < 1) {
            throw InvalidParameter("mlp1 requires hidden_width >= 1", "learner.hidden_width");
        }
        if (objective_perturbation_sigma != 0.0) {
            throw InvalidParameter("objective perturbation is logistic_regression only",
                                   "learner.objective_perturbation_sigma");
        }
    } else {
        if (hidden_width != 0) {
            throw InvalidParameter("hidden_width applies to mlp1 only", "learner.hidden_width");
        }
        if (!(objective_perturbation_sigma >= 0.0) || !std::isfinite(objective_perturbation_sigma)) {
            throw InvalidParameter("objective_perturbation_sigma must be finite and >= 0",
                                   "learner.objective_perturbation_sigma");
        }
    }
}

std::uint64_t LearnerSpec::digest() const {
    std::uint64_t h = hash_string(0x9d2c5680u, learner_kind_name(kind));
    h = hash_combine(h, double_bits(l2_lambda));
    h = hash_combine(h, static_cast<std::uint64_t>(hidden_width));
    h = hash_combine(h, double_bits(objective_perturbation_sigma));
    return h;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw InvalidParameter("learning_rate must be finite and > 0", "train.learning_rate");
    }
    if (epochs < 1) {
        throw InvalidParameter("epochs must be >= 1", "train.epochs");
    }
    if (batch_size < 0) {
        throw InvalidParameter("batch_size must be >= 0 (0 = full batch)", "train.batch_size");
    }
    if (!(tolerance >= 0.0) || !std::isfinite(tolerance)) {
        throw InvalidParameter("tolerance must be finite and >= 0", "train.tolerance");
    }
}

std::uint64_t TrainConfig::digest() const {
    std::uint64_t h = double_bits(learning_rate);
    h = hash_combine(h, static_cast<std::uint64_t>(epochs));
    h = hash_combine(h, static_cast<std::uint64_t>(batch_size));
    h = hash_combine(h, seed);
    h = hash_combine(h, double_bits(tolerance));
    return h;
}

std::int64_t expected_param_count(const LearnerSpec& spec, int dim, int num_classes) {
    if (spec.kind == LearnerKind::LogisticRegression) {
        return static_cast<std::int64_t>(num_classes) * (dim + 1);
    }
    const MlpLayout L{dim, spec.hidden_width, num_classes};
    return L.total();
}

Model train(const LearnerSpec& spec, const std::vector<DataPoint>& subset,
            const TrainConfig& config, int num_classes) {
    spec.validate();
    config.validate();
    if (subset.empty()) {
        throw InvalidParameter("training subset must be nonempty", "subset");
    }
    const int dim = static_cast<int>(subset.front().features.size());
    int max_label = 0;
    for (const auto& p : subset) {
        if (static_cast<int>(p.features.size()) != dim) {
            throw DimensionMismatch("inconsistent feature dimension in training subset", "subset");
        }
        if (p.label < 0) throw InvalidParameter("negative label", "label");
        max_label = std::max(max_label, p.label);
    }
    if (num_classes < 0) num_classes = max_label + 1;
    if (max_label >= num_classes) {
        throw InvalidParameter("label out of range for num_classes", "label");
    }
    if (num_classes < 2) num_classes = 2;

    Model m;
    m.spec = spec;
    m.dim = dim;
    m.num_classes = num_classes;
    m.meta.seed = config.seed;
    const std::int64_t pcount = expected_param_count(spec, dim, num_classes);
    m.params = Eigen::VectorXd::Zero(pcount);

    if (spec.kind == LearnerKind::Mlp1) {
        // Seeded uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
        Rng init_rng(derive_seed(config.seed, "init"));
        const MlpLayout L{dim, spec.hidden_width, num_classes};
        const double s1 = 1.0 / std::sqrt(static_cast<double>(dim));
        const double s2 = 1.0 / std::sqrt(static_cast<double>(spec.hidden_width));
        for (int i = L.w1(); i < L.w2(); ++i) m.params[i] = (2.0 * init_rng.uniform() - 1.0) * s1;
        for (int i = L.w2(); i < L.total(); ++i) m.params[i] = (2.0 * init_rng.uniform() - 1.0) * s2;
    }

    if (spec.kind == LearnerKind::LogisticRegression && spec.objective_perturbation_sigma > 0.0) {
        Rng pert_rng(derive_seed(config.seed, "perturbation"));
        Eigen::VectorXd q(pcount);
        for (std::int64_t i = 0; i < pcount; ++i) {
            q[i] = spec.objective_perturbation_sigma * pert_rng.gaussian();
        }
        m.perturbation = std::move(q);
    }

    const std::size_t n = subset.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    const bool full_batch = config.batch_size == 0 || static_cast<std::size_t>(config.batch_size) >= n;
    int epochs_run = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Eigen::VectorXd full_grad = objective_gradient(m, subset, order, 0, n, n);
        if (!full_grad.allFinite() || !m.params.allFinite()) {
            throw DivergedTraining("training produced non-finite values at epoch " +
                                   std::to_string(epoch));
        }
        if (full_grad.norm() <= config.tolerance) break;
        if (full_batch) {
            m.params -= config.learning_rate * full_grad;
        } else {
            Rng epoch_rng(derive_seed(config.seed, "order", {static_cast<std::uint64_t>(epoch)}));
            std::vector<std::size_t> shuffled = order;
            epoch_rng.shuffle(shuffled);
            const std::size_t bs = static_cast<std::size_t>(config.batch_size);
            for (std::size_t lo = 0; lo < n; lo += bs) {
                const std::size_t hi = std::min(lo + bs, n);
                m.params -= config.learning_rate *
                            objective_gradient(m, subset, shuffled, lo, hi, n);
            }
        }
        epochs_run = epoch + 1;
    }
    m.meta.epochs_run = epochs_run;

    const Eigen::VectorXd final_grad = objective_gradient(m, subset, order, 0, n, n);
    if (!final_grad.allFinite() || !m.params.allFinite()) {
        throw DivergedTraining("training ended with non-finite values");
    }
    m.meta.final_grad_norm = final_grad.norm();
    return m;
}

Eigen::VectorXd predict_proba(const Model& model, const Eigen::VectorXd& features) {
    if (static_cast<int>(features.size()) != model.dim) {
        throw DimensionMismatch("feature dimension " + std::to_string(features.size()) +
                                    " != model dimension " + std::to_string(model.dim),
                                "features");
    }
    if (model.spec.kind == LearnerKind::LogisticRegression) {
        return softmax(logistic_logits(model, features));
    }
    return mlp_forward(model, features).probs;
}

double objective_value(const Model& model, const std::vector<DataPoint>& subset) {
    if (subset.empty()) {
        throw InvalidParameter("objective over empty subset", "subset");
    }
    double total = 0.0;
    for (const auto& p : subset) {
        check_point(model, p);
        total += example_loss(model, p);
    }
    double value = total / static_cast<double>(subset.size()) +
                   0.5 * model.spec.l2_lambda * model.params.squaredNorm();
    if (model.perturbation) {
        value += model.perturbation->dot(model.params) / static_cast<double>(subset.size());
    }
    return value;
}

Eigen::VectorXd loss_gradient(const Model& model, const std::vector<DataPoint>& subset) {
    if (subset.empty()) {
        throw InvalidParameter("gradient over empty subset", "subset");
    }
    for (const auto& p : subset) check_point(model, p);
    std::vector<std::size_t> idx(subset.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return objective_gradient(model, subset, idx, 0, subset.size(), subset.size());
}

Eigen::VectorXd per_example_data_gradient(const Model& model, const DataPoint& point) {
    check_point(model, point);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.params.size());
    add_example_gradient(model, point, grad);
    return grad;
}

Eigen::VectorXd sum_data_gradients(const Model& model, const std::vector<DataPoint>& subset) {
    if (subset.empty()) {
        throw InvalidParameter("gradient sum over empty subset", "subset");
    }
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.params.size());
    for (const auto& p : subset) {
        check_point(model, p);
        add_example_gradient(model, p, grad);
    }
    return grad;
}

Eigen::MatrixXd sum_data_hessian(const Model& model, const std::vector<DataPoint>& subset) {
    if (model.spec.kind != LearnerKind::LogisticRegression) {
        throw UnsupportedModel("hessian is available for logistic_regression only",
                               "learner.kind");
    }
    if (subset.empty()) {
        throw InvalidParameter("hessian over empty subset", "subset");
    }
    const int d = model.dim;
    const int c = model.num_classes;
    const int ext = d + 1;
    // Build in a class-grouped layout, then remap to the model layout.
    Eigen::MatrixXd grouped = Eigen::MatrixXd::Zero(c * ext, c * ext);
    Eigen::VectorXd xt(ext);
    for (const auto& p : subset) {
        check_point(model, p);
        xt.head(d) = p.features;
        xt[d] = 1.0;
        const Eigen::VectorXd probs = softmax(logistic_logits(model, p.features));
        const Eigen::MatrixXd outer = xt * xt.transpose();
        for (int a = 0; a < c; ++a) {
            for (int b = 0; b < c; ++b) {
                const double s = (a == b ? probs[a] * (1.0 - probs[a]) : -probs[a] * probs[b]);
                grouped.block(a * ext, b * ext, ext, ext) += s * outer;
            }
        }
    }
    std::vector<int> to_model(static_cast<std::size_t>(c * ext));
    for (int k = 0; k < c; ++k) {
        for (int j = 0; j < d; ++j) to_model[static_cast<std::size_t>(k * ext + j)] = k * d + j;
        to_model[static_cast<std::size_t>(k * ext + d)] = c * d + k;
    }
    Eigen::MatrixXd out(c * ext, c * ext);
    for (int i = 0; i < c * ext; ++i) {
        for (int j = 0; j < c * ext; ++j) {
            out(to_model[static_cast<std::size_t>(i)], to_model[static_cast<std::size_t>(j)]) =
                grouped(i, j);
        }
    }
    return out;
}

Eigen::MatrixXd hessian(const Model& model, const std::vector<DataPoint>& subset) {
    Eigen::MatrixXd h = sum_data_hessian(model, subset) / static_cast<double>(subset.size());
    h.diagonal().array() += model.spec.l2_lambda;
    return h;
}

Eigen::VectorXd fisher_diagonal(const Model& model, const std::vector<DataPoint>& subset) {
    if (subset.empty()) {
        throw InvalidParameter("fisher diagonal over empty subset", "subset");
    }
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(model.params.size());
    Eigen::VectorXd grad(model.params.size());
    for (const auto& p : subset) {
        check_point(model, p);
        grad.setZero();
        add_example_gradient(model, p, grad);
        acc += grad.cwiseProduct(grad);
    }
    return acc / static_cast<double>(subset.size());
}

namespace {

std::string hexfloat(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double parse_hexfloat(const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str()) {
        throw IoError("malformed float in model record: " + text, "model");
    }
    return v;
}

} // namespace

std::string model_to_string(const Model& model) {
    std::ostringstream out;
    out << "unlearn-model-v1\n";
    out << "kind " << learner_kind_name(model.spec.kind) << "\n";
    out << "l2_lambda " << hexfloat(model.spec.l2_lambda) << "\n";
    out << "hidden_width " << model.spec.hidden_width << "\n";
    out << "objective_perturbation_sigma " << hexfloat(model.spec.objective_perturbation_sigma)
        << "\n";
    out << "dim " << model.dim << "\n";
    out << "num_classes " << model.num_classes << "\n";
    out << "seed " << model.meta.seed << "\n";
    out << "final_grad_norm " << hexfloat(model.meta.final_grad_norm) << "\n";
    out << "epochs_run " << model.meta.epochs_run << "\n";
    out << "params " << model.params.size() << "\n";
    for (std::int64_t i = 0; i < model.params.size(); ++i) {
        out << hexfloat(model.params[i]) << "\n";
    }
    const std::int64_t psize = model.perturbation ? model.perturbation->size() : 0;
    out << "perturbation " << psize << "\n";
    for (std::int64_t i = 0; i < psize; ++i) {
        out << hexfloat((*model.perturbation)[i]) << "\n";
    }
    return out.str();
}

Model model_from_string(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    auto next_line = [&]() {
        if (!std::getline(in, line)) {
            throw IoError("truncated model record", "model");
        }
        return line;
    };
    if (next_line() != "unlearn-model-v1") {
        throw IoError("unknown model record version", "model");
    }
    auto field = [&](const std::string& key) {
        next_line();
        if (line.rfind(key + " ", 0) != 0) {
            throw IoError("expected field '" + key + "' in model record", "model");
        }
        return line.substr(key.size() + 1);
    };
    Model m;
    m.spec.kind = parse_learner_kind(field("kind"));
    m.spec.l2_lambda = parse_hexfloat(field("l2_lambda"));
    m.spec.hidden_width = std::stoi(field("hidden_width"));
    m.spec.objective_perturbation_sigma = parse_hexfloat(field("objective_perturbation_sigma"));
    m.dim = std::stoi(field("dim"));
    m.num_classes = std::stoi(field("num_classes"));
    m.meta.seed = std::stoull(field("seed"));
    m.meta.final_grad_norm = parse_hexfloat(field("final_grad_norm"));
    m.meta.epochs_run = std::stoi(field("epochs_run"));
    const std::int64_t pcount = std::stoll(field("params"));
    m.params.resize(pcount);
    for (std::int64_t i = 0; i < pcount; ++i) {
        m.params[i] = parse_hexfloat(next_line());
    }
    const std::int64_t qcount = std::stoll(field("perturbation"));
    if (qcount > 0) {
        Eigen::VectorXd q(qcount);
        for (std::int64_t i = 0; i < qcount; ++i) {
            q[i] = parse_hexfloat(next_line());
        }
        m.perturbation = std::move(q);
    }
    return m;
}

void save_model(const Model& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write model file: " + path, "model");
    }
    out << model_to_string(model);
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open model file: " + path, "model");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_string(buf.str());
}

} // namespace unlearn
