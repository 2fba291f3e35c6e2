#include "unlearn/config.hpp"

#include <fstream>

#include <openssl/evp.h>

#include "unlearn/errors.hpp"

namespace unlearn {

namespace {

using nlohmann::json;

void expect_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) {
        throw ConfigError(where + " must be an object", where);
    }
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown key '" + key + "' in " + where, where + "." + key);
        }
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for '" + key + "'", key);
    }
}

template <typename T>
T require(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) {
        throw ConfigError("missing key '" + key + "' in " + where, where + "." + key);
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for '" + key + "' in " + where, where + "." + key);
    }
}

Rational parse_rational_field(const json& value, const std::string& where) {
    try {
        if (value.is_string()) return Rational::parse(value.get<std::string>());
        if (value.is_number_integer()) return Rational(value.get<std::int64_t>(), 1);
        if (value.is_number_float()) {
            // Route through the decimal parser so 0.1 means exactly 1/10.
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.12g", value.get<double>());
            return Rational::parse(buf);
        }
    } catch (const Error& e) {
        throw ConfigError(std::string(e.what()), where);
    }
    throw ConfigError("expected rational (string \"a/b\" or number) in " + where, where);
}

DatasetSource parse_dataset(const json& obj) {
    expect_keys(obj, {"synthetic", "csv", "idx"}, "dataset");
    DatasetSource src;
    const int present = static_cast<int>(obj.contains("synthetic")) +
                        static_cast<int>(obj.contains("csv")) + static_cast<int>(obj.contains("idx"));
    if (present != 1) {
        throw ConfigError("dataset needs exactly one of synthetic | csv | idx", "dataset");
    }
    if (obj.contains("synthetic")) {
        const json& s = obj.at("synthetic");
        expect_keys(s, {"num_points", "dim", "num_classes", "cluster_separation", "noise_sigma", "seed"},
                    "dataset.synthetic");
        src.kind = DatasetSource::Kind::Synthetic;
        src.synthetic.num_points = require<std::int64_t>(s, "num_points", "dataset.synthetic");
        src.synthetic.dim = require<int>(s, "dim", "dataset.synthetic");
        src.synthetic.num_classes = get_or<int>(s, "num_classes", 2);
        src.synthetic.cluster_separation = require<double>(s, "cluster_separation", "dataset.synthetic");
        src.synthetic.noise_sigma = require<double>(s, "noise_sigma", "dataset.synthetic");
        src.synthetic.seed = get_or<std::uint64_t>(s, "seed", 0);
    } else if (obj.contains("csv")) {
        src.kind = DatasetSource::Kind::Csv;
        src.csv_path = require<std::string>(obj, "csv", "dataset");
    } else {
        const json& s = obj.at("idx");
        expect_keys(s, {"images", "labels", "keep_labels"}, "dataset.idx");
        src.kind = DatasetSource::Kind::Idx;
        src.idx_images = require<std::string>(s, "images", "dataset.idx");
        src.idx_labels = require<std::string>(s, "labels", "dataset.idx");
        for (int l : require<std::vector<int>>(s, "keep_labels", "dataset.idx")) {
            src.keep_labels.insert(l);
        }
    }
    return src;
}

LearnerSpec parse_learner(const json& obj) {
    expect_keys(obj, {"kind", "l2_lambda", "hidden_width", "objective_perturbation_sigma"},
                "learner");
    LearnerSpec spec;
    spec.kind = parse_learner_kind(require<std::string>(obj, "kind", "learner"));
    spec.l2_lambda = get_or<double>(obj, "l2_lambda", 0.0);
    spec.hidden_width = get_or<int>(obj, "hidden_width", 0);
    spec.objective_perturbation_sigma = get_or<double>(obj, "objective_perturbation_sigma", 0.0);
    return spec;
}

TrainConfig parse_train(const json& obj) {
    expect_keys(obj, {"learning_rate", "epochs", "batch_size", "tolerance"}, "train");
    TrainConfig cfg;
    cfg.learning_rate = require<double>(obj, "learning_rate", "train");
    cfg.epochs = require<int>(obj, "epochs", "train");
    cfg.batch_size = get_or<int>(obj, "batch_size", 0);
    cfg.tolerance = get_or<double>(obj, "tolerance", 1e-8);
    return cfg;
}

UnlearnerSpec parse_unlearner(const json& obj, std::size_t index) {
    const std::string where = "unlearners[" + std::to_string(index) + "]";
    expect_keys(obj, {"kind", "steps", "learning_rate", "noise_sigma", "epsilon_budget", "delta"},
                where);
    UnlearnerSpec spec;
    spec.kind = parse_unlearner_kind(require<std::string>(obj, "kind", where));
    spec.steps = get_or<int>(obj, "steps", 0);
    spec.learning_rate = get_or<double>(obj, "learning_rate", 0.0);
    spec.noise_sigma = get_or<double>(obj, "noise_sigma", 0.0);
    spec.epsilon_budget = get_or<double>(obj, "epsilon_budget", 0.0);
    spec.delta = get_or<double>(obj, "delta", 0.0);
    return spec;
}

AdversaryConfig parse_adversary(const json& obj, std::size_t index) {
    const std::string where = "adversaries[" + std::to_string(index) + "]";
    expect_keys(obj, {"kind", "num_shadow"}, where);
    AdversaryConfig cfg;
    cfg.kind = require<std::string>(obj, "kind", where);
    if (cfg.kind != "correctness" && cfg.kind != "confidence" && cfg.kind != "mentropy" &&
        cfg.kind != "shadow") {
        throw ConfigError("unknown adversary kind: " + cfg.kind, where + ".kind");
    }
    cfg.num_shadow = get_or<int>(obj, "num_shadow", 2);
    return cfg;
}

EstimatorSpec parse_estimator(const json& obj) {
    expect_keys(obj, {"kind", "num_pairs", "num_splits"}, "estimator");
    EstimatorSpec spec;
    const std::string kind = require<std::string>(obj, "kind", "estimator");
    if (kind == "exact") {
        spec.kind = EstimatorKind::Exact;
    } else if (kind == "swap") {
        spec.kind = EstimatorKind::Swap;
        spec.num_pairs = require<int>(obj, "num_pairs", "estimator");
    } else if (kind == "mc") {
        spec.kind = EstimatorKind::MonteCarlo;
        spec.num_splits = require<int>(obj, "num_splits", "estimator");
    } else {
        throw ConfigError("unknown estimator kind: " + kind, "estimator.kind");
    }
    return spec;
}

} // namespace

void RunConfig::validate() const {
    if (dataset.kind == DatasetSource::Kind::Synthetic) dataset.synthetic.validate();
    if (!(target_shadow_fraction > 0.0 && target_shadow_fraction < 1.0)) {
        throw ConfigError("target_shadow.fraction must lie in (0, 1)", "target_shadow.fraction");
    }
    if (!alpha.in_open_unit_interval()) {
        throw ConfigError("alpha must lie in (0, 1)", "alpha");
    }
    learner.validate();
    train.validate();
    if (unlearners.empty()) {
        throw ConfigError("unlearners must be nonempty", "unlearners");
    }
    for (const auto& u : unlearners) u.validate();
    if (adversaries.empty()) {
        throw ConfigError("adversaries must be nonempty", "adversaries");
    }
    for (const auto& a : adversaries) {
        if (a.num_shadow < 1) {
            throw ConfigError("num_shadow must be >= 1", "adversaries.num_shadow");
        }
    }
    if (estimator.kind == EstimatorKind::Swap && estimator.num_pairs < 1) {
        throw ConfigError("estimator.num_pairs must be >= 1", "estimator.num_pairs");
    }
    if (estimator.kind == EstimatorKind::MonteCarlo && estimator.num_splits < 2) {
        throw ConfigError("estimator.num_splits must be >= 2", "estimator.num_splits");
    }
    if (models_per_split < 1) {
        throw ConfigError("models_per_split must be >= 1", "models_per_split");
    }
}

RunConfig parse_run_config(const nlohmann::json& doc) {
    expect_keys(doc,
                {"dataset", "target_shadow", "alpha", "sensitivity", "learner", "train",
                 "unlearners", "adversaries", "estimator", "models_per_split", "master_seed",
                 "num_threads", "output"},
                "config");
    RunConfig cfg;
    if (!doc.contains("dataset")) {
        throw ConfigError("missing key 'dataset'", "dataset");
    }
    cfg.dataset = parse_dataset(doc.at("dataset"));
    if (doc.contains("target_shadow")) {
        const json& ts = doc.at("target_shadow");
        expect_keys(ts, {"fraction", "seed"}, "target_shadow");
        cfg.target_shadow_fraction = get_or<double>(ts, "fraction", 0.5);
        cfg.target_shadow_seed = get_or<std::uint64_t>(ts, "seed", 0);
    }
    if (doc.contains("alpha")) {
        cfg.alpha = parse_rational_field(doc.at("alpha"), "alpha");
    }
    if (doc.contains("sensitivity")) {
        const json& s = doc.at("sensitivity");
        if (s.is_string() && s.get<std::string>() == "uniform") {
            cfg.sensitivity.uniform = true;
        } else if (s.is_object()) {
            expect_keys(s, {"csv"}, "sensitivity");
            cfg.sensitivity.uniform = false;
            cfg.sensitivity.csv_path = require<std::string>(s, "csv", "sensitivity");
        } else {
            throw ConfigError("sensitivity must be \"uniform\" or {\"csv\": path}", "sensitivity");
        }
    }
    cfg.learner = parse_learner(require<json>(doc, "learner", "config"));
    cfg.train = parse_train(require<json>(doc, "train", "config"));
    for (std::size_t i = 0; i < require<json>(doc, "unlearners", "config").size(); ++i) {
        cfg.unlearners.push_back(parse_unlearner(doc.at("unlearners").at(i), i));
    }
    for (std::size_t i = 0; i < require<json>(doc, "adversaries", "config").size(); ++i) {
        cfg.adversaries.push_back(parse_adversary(doc.at("adversaries").at(i), i));
    }
    cfg.estimator = parse_estimator(require<json>(doc, "estimator", "config"));
    cfg.models_per_split = get_or<int>(doc, "models_per_split", 3);
    cfg.master_seed = get_or<std::uint64_t>(doc, "master_seed", 1);
    cfg.num_threads = get_or<int>(doc, "num_threads", 0);
    if (doc.contains("output")) {
        const json& out = doc.at("output");
        expect_keys(out, {"dir", "prefix"}, "output");
        cfg.output.dir = get_or<std::string>(out, "dir", "out");
        cfg.output.prefix = get_or<std::string>(out, "prefix", "run");
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path, "config");
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("malformed config json: " + std::string(e.what()), "config");
    }
    return parse_run_config(doc);
}

nlohmann::json config_to_canonical_json(const RunConfig& config) {
    json doc;
    switch (config.dataset.kind) {
    case DatasetSource::Kind::Synthetic:
        doc["dataset"]["synthetic"] = {{"num_points", config.dataset.synthetic.num_points},
                                       {"dim", config.dataset.synthetic.dim},
                                       {"num_classes", config.dataset.synthetic.num_classes},
                                       {"cluster_separation", config.dataset.synthetic.cluster_separation},
                                       {"noise_sigma", config.dataset.synthetic.noise_sigma},
                                       {"seed", config.dataset.synthetic.seed}};
        break;
    case DatasetSource::Kind::Csv:
        doc["dataset"]["csv"] = config.dataset.csv_path;
        break;
    case DatasetSource::Kind::Idx:
        doc["dataset"]["idx"] = {{"images", config.dataset.idx_images},
                                 {"labels", config.dataset.idx_labels},
                                 {"keep_labels", std::vector<int>(config.dataset.keep_labels.begin(),
                                                                  config.dataset.keep_labels.end())}};
        break;
    }
    doc["target_shadow"] = {{"fraction", config.target_shadow_fraction},
                            {"seed", config.target_shadow_seed}};
    doc["alpha"] = config.alpha.to_string();
    doc["sensitivity"] =
        config.sensitivity.uniform ? json("uniform") : json{{"csv", config.sensitivity.csv_path}};
    doc["learner"] = {{"kind", learner_kind_name(config.learner.kind)},
                      {"l2_lambda", config.learner.l2_lambda},
                      {"hidden_width", config.learner.hidden_width},
                      {"objective_perturbation_sigma", config.learner.objective_perturbation_sigma}};
    doc["train"] = {{"learning_rate", config.train.learning_rate},
                    {"epochs", config.train.epochs},
                    {"batch_size", config.train.batch_size},
                    {"tolerance", config.train.tolerance}};
    doc["unlearners"] = json::array();
    for (const auto& u : config.unlearners) {
        doc["unlearners"].push_back({{"kind", u.name()},
                                     {"steps", u.steps},
                                     {"learning_rate", u.learning_rate},
                                     {"noise_sigma", u.noise_sigma},
                                     {"epsilon_budget", u.epsilon_budget},
                                     {"delta", u.delta}});
    }
    doc["adversaries"] = json::array();
    for (const auto& a : config.adversaries) {
        doc["adversaries"].push_back({{"kind", a.kind}, {"num_shadow", a.num_shadow}});
    }
    doc["estimator"] = {{"kind", config.estimator.kind == EstimatorKind::Exact      ? "exact"
                                 : config.estimator.kind == EstimatorKind::Swap     ? "swap"
                                                                                    : "mc"},
                        {"num_pairs", config.estimator.num_pairs},
                        {"num_splits", config.estimator.num_splits}};
    doc["models_per_split"] = config.models_per_split;
    doc["master_seed"] = config.master_seed;
    // num_threads and output paths are execution details, not semantics.
    return doc;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr ||
        EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, digest, &length) != 1) {
        EVP_MD_CTX_free(ctx);
        throw IoError("sha256 digest failed", "digest");
    }
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string config_digest(const RunConfig& config) {
    return sha256_hex(config_to_canonical_json(config).dump());
}

} // namespace unlearn
