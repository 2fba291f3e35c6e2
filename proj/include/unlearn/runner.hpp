#ifndef UNLEARN_RUNNER_HPP
#define UNLEARN_RUNNER_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "unlearn/adversary.hpp"
#include "unlearn/config.hpp"
#include "unlearn/report.hpp"

namespace unlearn {

// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutputDirEnvVar = "UNLEARN_EVAL_OUTPUT_DIR";

// The adversary roster for a run. Thresholds for confidence/mentropy are
// calibrated on shadow-model in/out points (scored under the shadow model)
// and transferred to each target model; evaluation-split membership never
// reaches any fitting path.
std::vector<WeakAdversaryFamily> build_roster(const std::vector<AdversaryConfig>& configs,
                                              const Dataset& shadow_dataset,
                                              const LearnerSpec& learner, const TrainConfig& train,
                                              std::uint64_t master_seed);

struct RunOutcome {
    RunReport report;
    std::string report_path;
    std::string csv_path;
    std::string summary_path;
    std::string summary_text;
};

// Initialization -> challenger -> adversary -> advantage pipeline for every
// configured unlearner; writes report.json, per_split.csv and summary.txt
// under the output directory.
RunOutcome run(const RunConfig& config);

// Pipeline pieces, exposed for tests and the CLI.
Dataset load_source_dataset(const DatasetSource& source);

} // namespace unlearn

#endif // UNLEARN_RUNNER_HPP
