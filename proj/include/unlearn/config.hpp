#ifndef UNLEARN_CONFIG_HPP
#define UNLEARN_CONFIG_HPP

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "unlearn/advantage.hpp"
#include "unlearn/datagen.hpp"
#include "unlearn/learner.hpp"
#include "unlearn/rational.hpp"
#include "unlearn/unlearner.hpp"

namespace unlearn {

struct DatasetSource {
    enum class Kind { Synthetic, Csv, Idx };
    Kind kind = Kind::Synthetic;
    SyntheticSpec synthetic;
    std::string csv_path;
    std::string idx_images;
    std::string idx_labels;
    std::set<int> keep_labels;
};

struct SensitivitySource {
    bool uniform = true;
    std::string csv_path; // over the ingested dataset's ids; projected onto the target part
};

struct AdversaryConfig {
    std::string kind; // correctness | confidence | mentropy | shadow
    int num_shadow = 2;
};

struct OutputSpec {
    std::string dir = "out";
    std::string prefix = "run";
};

// The full experiment description; the pipeline is a pure function of this.
struct RunConfig {
    DatasetSource dataset;
    double target_shadow_fraction = 0.5;
    std::uint64_t target_shadow_seed = 0;
    Rational alpha{1, 10};
    SensitivitySource sensitivity;
    LearnerSpec learner;
    TrainConfig train;
    std::vector<UnlearnerSpec> unlearners;
    std::vector<AdversaryConfig> adversaries;
    EstimatorSpec estimator;
    int models_per_split = 3;
    std::uint64_t master_seed = 1;
    int num_threads = 0;
    OutputSpec output;

    void validate() const;
};

// Strict parse: unknown keys are ConfigError.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

// Canonical form with defaults filled in; two configs have equal digests iff
// they describe the same run.
nlohmann::json config_to_canonical_json(const RunConfig& config);
std::string config_digest(const RunConfig& config);

std::string sha256_hex(const std::string& bytes);

} // namespace unlearn

#endif // UNLEARN_CONFIG_HPP
