#include "unlearn/runner.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "unlearn/errors.hpp"
#include "unlearn/idx.hpp"
#include "unlearn/rng.hpp"

namespace unlearn {

namespace {

SensitivityDistribution build_sensitivity(const SensitivitySource& source,
                                          const Dataset& ingested,
                                          const std::vector<std::int64_t>& target_provenance) {
    if (source.uniform) {
        return SensitivityDistribution::uniform(static_cast<std::int64_t>(target_provenance.size()));
    }
    // CSV weights refer to the ingested dataset; project onto the target part
    // (renormalization happens in from_weights).
    const SensitivityDistribution full = read_sensitivity_csv(source.csv_path, ingested.size());
    std::vector<double> projected;
    projected.reserve(target_provenance.size());
    for (std::int64_t original_id : target_provenance) {
        projected.push_back(full.weight(original_id));
    }
    return SensitivityDistribution::from_weights(std::move(projected));
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write output file: " + path, "output");
    }
    out << body;
}

} // namespace

Dataset load_source_dataset(const DatasetSource& source) {
    switch (source.kind) {
    case DatasetSource::Kind::Synthetic: return generate_synthetic(source.synthetic);
    case DatasetSource::Kind::Csv: return read_dataset_csv(source.csv_path);
    case DatasetSource::Kind::Idx:
        return load_idx_pair(source.idx_images, source.idx_labels, source.keep_labels);
    }
    throw InvalidParameter("unhandled dataset source", "dataset");
}

std::vector<WeakAdversaryFamily> build_roster(const std::vector<AdversaryConfig>& configs,
                                              const Dataset& shadow_dataset,
                                              const LearnerSpec& learner, const TrainConfig& train,
                                              std::uint64_t master_seed) {
    if (configs.empty()) {
        throw InvalidParameter("adversary roster must be nonempty", "adversaries");
    }

    bool needs_shadow = false;
    int num_shadow = 1;
    for (const auto& cfg : configs) {
        if (cfg.kind != "correctness") needs_shadow = true;
        if (cfg.kind == "shadow") num_shadow = std::max(num_shadow, cfg.num_shadow);
    }

    std::shared_ptr<const ShadowEnsemble> ensemble;
    if (needs_shadow) {
        ShadowConfig shadow_cfg;
        shadow_cfg.shadow_dataset = shadow_dataset;
        shadow_cfg.num_shadow = num_shadow;
        shadow_cfg.learner = learner;
        shadow_cfg.train_config = train;
        shadow_cfg.seed = derive_seed(master_seed, "shadow");
        ensemble = std::make_shared<const ShadowEnsemble>(shadow_cfg);
    }

    std::vector<WeakAdversaryFamily> roster;
    for (const auto& cfg : configs) {
        WeakAdversaryFamily family;
        family.name = cfg.kind;
        if (cfg.kind == "correctness") {
            family.fit_meta = "prediction correctness; no calibration";
            family.fit = [](const Model& m) { return fit_correctness(m); };
        } else if (cfg.kind == "confidence") {
            const WeakAdversary calibrated =
                fit_confidence(ensemble->shadow_model(0), ensemble->calibration(0));
            family.fit_meta = "threshold from shadow model 0 in/out calibration: " +
                              calibrated.fit_meta;
            const auto thresholds = calibrated.thresholds;
            const std::string meta = family.fit_meta;
            family.fit = [thresholds, meta](const Model& m) {
                return confidence_with_thresholds(m, thresholds, meta);
            };
        } else if (cfg.kind == "mentropy") {
            const WeakAdversary calibrated =
                fit_mentropy(ensemble->shadow_model(0), ensemble->calibration(0));
            family.fit_meta = "per-class thresholds from shadow model 0 in/out calibration: " +
                              calibrated.fit_meta;
            const auto thresholds = calibrated.thresholds;
            const std::string meta = family.fit_meta;
            family.fit = [thresholds, meta](const Model& m) {
                return mentropy_with_thresholds(m, thresholds, meta);
            };
        } else if (cfg.kind == "shadow") {
            family.fit_meta = ensemble->fit(ensemble->shadow_model(0)).fit_meta;
            const auto shared = ensemble;
            family.fit = [shared](const Model& m) { return shared->fit(m); };
        } else {
            throw InvalidParameter("unknown adversary kind: " + cfg.kind, "adversaries.kind");
        }
        roster.push_back(std::move(family));
    }
    return roster;
}

RunOutcome run(const RunConfig& config) {
    config.validate();

    const Dataset ingested = load_source_dataset(config.dataset);
    const TargetShadowPartition parts =
        partition_target_shadow(ingested, config.target_shadow_fraction, config.target_shadow_seed);
    const SensitivityDistribution sensitivity =
        build_sensitivity(config.sensitivity, ingested, parts.target_provenance);

    EvalConfig eval_cfg;
    eval_cfg.alpha = config.alpha;
    eval_cfg.learner = config.learner;
    eval_cfg.train_config = config.train;
    eval_cfg.models_per_split = config.models_per_split;
    eval_cfg.master_seed = config.master_seed;
    eval_cfg.num_threads = config.num_threads;
    GameEvaluator evaluator(parts.target, sensitivity, eval_cfg);

    const auto roster = build_roster(config.adversaries, parts.shadow, config.learner, config.train,
                                     config.master_seed);

    RunReport report;
    report.config_digest = config_digest(config);
    report.master_seed = config.master_seed;
    report.alpha = config.alpha.to_string();
    report.estimator = config.estimator.name();
    for (const auto& method : config.unlearners) {
        report.methods.push_back(evaluator.evaluate_method(roster, method, config.estimator));
    }

    std::string out_dir = config.output.dir;
    if (const char* env = std::getenv(kOutputDirEnvVar); env != nullptr && env[0] != '\0') {
        out_dir = env;
    }
    std::filesystem::create_directories(out_dir);
    const std::string base = out_dir + "/" + config.output.prefix;

    RunOutcome outcome;
    outcome.report = report;
    outcome.report_path = base + "_report.json";
    outcome.csv_path = base + "_per_split.csv";
    outcome.summary_path = base + "_summary.txt";
    outcome.summary_text = render_summary(report);

    write_text_file(outcome.report_path, report_to_json(report).dump(2) + "\n");
    write_text_file(outcome.csv_path, per_split_csv(report));
    write_text_file(outcome.summary_path, outcome.summary_text);
    return outcome;
}

} // namespace unlearn
