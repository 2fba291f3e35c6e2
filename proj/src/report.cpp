#include "unlearn/report.hpp"

#include <cstdio>
#include <sstream>

#include "unlearn/errors.hpp"

namespace unlearn {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json split_record_to_json(const SplitRecord& rec) {
    ordered_json row;
    row["group"] = rec.group;
    row["forget"] = rec.split.forget;
    row["test"] = rec.split.test;
    row["accept_rate_b0"] = rec.accept_rate_b0;
    row["accept_rate_b1"] = rec.accept_rate_b1;
    row["signed_value"] = rec.signed_value;
    row["num_models"] = rec.num_models;
    return row;
}

ordered_json method_spec_to_json(const UnlearnerSpec& spec) {
    ordered_json m;
    m["kind"] = spec.name();
    m["steps"] = spec.steps;
    m["learning_rate"] = spec.learning_rate;
    m["noise_sigma"] = spec.noise_sigma;
    m["epsilon_budget"] = spec.epsilon_budget;
    m["delta"] = spec.delta;
    return m;
}

std::string format_double(double v, const char* fmt = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

std::string join_ids(const std::vector<std::int64_t>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out.push_back(';');
        out += std::to_string(ids[i]);
    }
    return out;
}

} // namespace

ordered_json report_to_json(const RunReport& report) {
    ordered_json doc;
    doc["version"] = report.version;
    doc["config_digest"] = report.config_digest;
    doc["master_seed"] = report.master_seed;
    doc["alpha"] = report.alpha;
    doc["estimator"] = report.estimator;
    doc["methods"] = ordered_json::array();
    for (const auto& method : report.methods) {
        ordered_json m;
        m["method"] = method_spec_to_json(method.method);
        m["unlearning_quality"] = method.unlearning_quality;
        if (method.certified_bound_value) {
            m["certified_bound"] = *method.certified_bound_value;
        }
        if (method.certified_quality_lower) {
            m["certified_quality_lower"] = *method.certified_quality_lower;
        }
        if (method.ledger) {
            ordered_json l;
            l["invocations"] = method.ledger->invocations;
            l["retrain_triggered"] = method.ledger->retrain_triggered;
            l["max_residual_norm"] = method.ledger->max_residual_norm;
            l["mean_epsilon_consumed"] = method.ledger->mean_epsilon_consumed;
            l["max_epsilon_consumed"] = method.ledger->max_epsilon_consumed;
            l["max_epsilon_kept"] = method.ledger->max_epsilon_kept;
            l["budget_residual_norm"] = method.ledger->budget_residual_norm;
            l["removals"] = ordered_json::array();
            for (const auto& entry : method.ledger_entries) {
                l["removals"].push_back({{"residual_norm", entry.accumulated_residual_norm},
                                         {"epsilon_consumed", entry.epsilon_consumed},
                                         {"retrain_triggered", entry.retrain_triggered}});
            }
            m["ledger"] = l;
        }
        m["adversaries"] = ordered_json::array();
        for (const auto& adv : method.adversaries) {
            ordered_json a;
            a["adversary"] = adv.adversary;
            a["fit_meta"] = adv.fit_meta;
            a["estimator"] = adv.estimate.estimator;
            a["value"] = adv.estimate.value;
            a["unclamped"] = adv.estimate.unclamped;
            if (adv.estimate.standard_error) {
                a["standard_error"] = *adv.estimate.standard_error;
            }
            a["splits"] = ordered_json::array();
            for (const auto& rec : adv.estimate.records) {
                a["splits"].push_back(split_record_to_json(rec));
            }
            m["adversaries"].push_back(std::move(a));
        }
        doc["methods"].push_back(std::move(m));
    }
    return doc;
}

RunReport report_from_json(const json& doc) {
    try {
        RunReport report;
        report.version = doc.at("version").get<std::string>();
        if (report.version != "unlearn-report-v1") {
            throw IoError("unknown report version: " + report.version, "report.version");
        }
        report.config_digest = doc.at("config_digest").get<std::string>();
        report.master_seed = doc.at("master_seed").get<std::uint64_t>();
        report.alpha = doc.at("alpha").get<std::string>();
        report.estimator = doc.at("estimator").get<std::string>();
        for (const auto& m : doc.at("methods")) {
            MethodReport method;
            const auto& spec = m.at("method");
            method.method.kind = parse_unlearner_kind(spec.at("kind").get<std::string>());
            method.method.steps = spec.at("steps").get<int>();
            method.method.learning_rate = spec.at("learning_rate").get<double>();
            method.method.noise_sigma = spec.at("noise_sigma").get<double>();
            method.method.epsilon_budget = spec.at("epsilon_budget").get<double>();
            method.method.delta = spec.at("delta").get<double>();
            method.unlearning_quality = m.at("unlearning_quality").get<double>();
            if (m.contains("certified_bound")) {
                method.certified_bound_value = m.at("certified_bound").get<double>();
            }
            if (m.contains("certified_quality_lower")) {
                method.certified_quality_lower = m.at("certified_quality_lower").get<double>();
            }
            if (m.contains("ledger")) {
                LedgerSummary ledger;
                const auto& l = m.at("ledger");
                ledger.invocations = l.at("invocations").get<int>();
                ledger.retrain_triggered = l.at("retrain_triggered").get<int>();
                ledger.max_residual_norm = l.at("max_residual_norm").get<double>();
                ledger.mean_epsilon_consumed = l.at("mean_epsilon_consumed").get<double>();
                ledger.max_epsilon_consumed = l.at("max_epsilon_consumed").get<double>();
                ledger.max_epsilon_kept = l.at("max_epsilon_kept").get<double>();
                ledger.budget_residual_norm = l.at("budget_residual_norm").get<double>();
                method.ledger = ledger;
                if (l.contains("removals")) {
                    for (const auto& entry : l.at("removals")) {
                        RemovalLedger removal;
                        removal.accumulated_residual_norm = entry.at("residual_norm").get<double>();
                        removal.epsilon_consumed = entry.at("epsilon_consumed").get<double>();
                        removal.retrain_triggered = entry.at("retrain_triggered").get<bool>();
                        removal.budget = ledger.budget_residual_norm;
                        method.ledger_entries.push_back(removal);
                    }
                }
            }
            for (const auto& a : m.at("adversaries")) {
                AdversaryResult adv;
                adv.adversary = a.at("adversary").get<std::string>();
                adv.fit_meta = a.at("fit_meta").get<std::string>();
                adv.estimate.estimator = a.at("estimator").get<std::string>();
                adv.estimate.value = a.at("value").get<double>();
                adv.estimate.unclamped = a.at("unclamped").get<double>();
                if (a.contains("standard_error")) {
                    adv.estimate.standard_error = a.at("standard_error").get<double>();
                }
                for (const auto& row : a.at("splits")) {
                    SplitRecord rec;
                    rec.group = row.at("group").get<int>();
                    rec.split.forget = row.at("forget").get<std::vector<std::int64_t>>();
                    rec.split.test = row.at("test").get<std::vector<std::int64_t>>();
                    rec.accept_rate_b0 = row.at("accept_rate_b0").get<double>();
                    rec.accept_rate_b1 = row.at("accept_rate_b1").get<double>();
                    rec.signed_value = row.at("signed_value").get<double>();
                    rec.num_models = row.at("num_models").get<int>();
                    adv.estimate.records.push_back(std::move(rec));
                }
                method.adversaries.push_back(std::move(adv));
            }
            report.methods.push_back(std::move(method));
        }
        return report;
    } catch (const json::exception& e) {
        throw IoError("malformed report json: " + std::string(e.what()), "report");
    }
}

std::string per_split_csv(const RunReport& report) {
    std::ostringstream out;
    out << "method,adversary,estimator,group,forget_ids,test_ids,accept_rate_b0,accept_rate_b1,"
           "signed_value,num_models\n";
    for (const auto& method : report.methods) {
        for (const auto& adv : method.adversaries) {
            for (const auto& rec : adv.estimate.records) {
                out << method.method.name() << ',' << adv.adversary << ','
                    << adv.estimate.estimator << ',' << rec.group << ','
                    << join_ids(rec.split.forget) << ',' << join_ids(rec.split.test) << ','
                    << format_double(rec.accept_rate_b0) << ','
                    << format_double(rec.accept_rate_b1) << ','
                    << format_double(rec.signed_value) << ',' << rec.num_models << "\n";
            }
        }
    }
    return out.str();
}

std::string render_summary(const RunReport& report) {
    std::vector<std::string> adversary_names;
    for (const auto& method : report.methods) {
        for (const auto& adv : method.adversaries) {
            bool known = false;
            for (const auto& name : adversary_names) {
                if (name == adv.adversary) known = true;
            }
            if (!known) adversary_names.push_back(adv.adversary);
        }
    }

    std::ostringstream out;
    out << "Unlearning evaluation summary  (estimator " << report.estimator << ", alpha "
        << report.alpha << ", master_seed " << report.master_seed << ")\n";
    out << "config digest: " << report.config_digest << "\n\n";

    const int name_width = 12;
    {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%-*s", name_width, "method");
        out << buf;
    }
    for (const auto& name : adversary_names) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "  %-12s", name.c_str());
        out << buf;
    }
    out << "  Q\n";

    for (const auto& method : report.methods) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%-*s", name_width, method.method.name().c_str());
        out << buf;
        for (const auto& name : adversary_names) {
            const AdversaryResult* found = nullptr;
            for (const auto& adv : method.adversaries) {
                if (adv.adversary == name) found = &adv;
            }
            if (found) {
                std::snprintf(buf, sizeof(buf), "  %-12s",
                              format_double(found->estimate.value, "%.4f").c_str());
            } else {
                std::snprintf(buf, sizeof(buf), "  %-12s", "-");
            }
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), "  %.3f", method.unlearning_quality);
        out << buf << "\n";
        if (method.certified_bound_value) {
            out << "    certified bound " << format_double(*method.certified_bound_value, "%.4f")
                << " (quality lower bound "
                << format_double(method.certified_quality_lower.value_or(0.0), "%.4f") << ")";
            if (method.ledger) {
                out << "; ledger: " << method.ledger->invocations << " removals, "
                    << method.ledger->retrain_triggered << " retrain fallbacks, max residual "
                    << format_double(method.ledger->max_residual_norm, "%.3g")
                    << ", residual budget "
                    << format_double(method.ledger->budget_residual_norm, "%.3g")
                    << ", mean epsilon consumed "
                    << format_double(method.ledger->mean_epsilon_consumed, "%.3g")
                    << ", max epsilon consumed "
                    << format_double(method.ledger->max_epsilon_consumed, "%.3g");
            }
            out << "\n";
        }
    }
    return out.str();
}

} // namespace unlearn
