#ifndef UNLEARN_REPORT_HPP
#define UNLEARN_REPORT_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "unlearn/advantage.hpp"

namespace unlearn {

struct RunReport {
    std::string version = "unlearn-report-v1";
    std::string config_digest;
    std::uint64_t master_seed = 0;
    std::string alpha;
    std::string estimator;
    std::vector<MethodReport> methods;
};

// Versioned structured document with stable key order.
nlohmann::ordered_json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& doc);

// Flat per-split rows: every summary advantage re-derives from these by
// re-aggregation (mean of per-pair |sums|/2 for swap, |mean signed| otherwise).
std::string per_split_csv(const RunReport& report);

// Human-readable method x adversary table plus Q and bound/ledger columns.
std::string render_summary(const RunReport& report);

} // namespace unlearn

#endif // UNLEARN_REPORT_HPP
