// Command-line front end: gen-data, enumerate, run, report.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "unlearn/config.hpp"
#include "unlearn/datagen.hpp"
#include "unlearn/errors.hpp"
#include "unlearn/report.hpp"
#include "unlearn/runner.hpp"
#include "unlearn/split.hpp"

namespace {

int cmd_gen_data(const unlearn::SyntheticSpec& spec, const std::string& out_path) {
    const unlearn::Dataset dataset = unlearn::generate_synthetic(spec);
    unlearn::write_dataset_csv(dataset, out_path);
    std::cout << "wrote " << dataset.size() << " points (dim " << dataset.dim() << ", "
              << dataset.num_classes() << " classes) to " << out_path << "\n";
    return 0;
}

int cmd_enumerate(std::int64_t n, const std::string& alpha_text) {
    const unlearn::Rational alpha = unlearn::Rational::parse(alpha_text);
    const unlearn::SplitSizes sizes = unlearn::split_sizes(n, alpha);
    const std::uint64_t count = unlearn::count_splits(n, alpha);
    std::cout << "n = " << n << ", alpha = " << alpha.to_string() << ": feasible\n";
    std::cout << "|retain| = " << sizes.retain << ", |forget| = |test| = " << sizes.forget_test
              << "\n";
    std::cout << "|S_alpha| = " << count << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir_override) {
    unlearn::RunConfig config = unlearn::load_run_config(config_path);
    if (!out_dir_override.empty()) {
        config.output.dir = out_dir_override;
    }
    const unlearn::RunOutcome outcome = unlearn::run(config);
    std::cout << outcome.summary_text;
    std::cout << "\nreport:    " << outcome.report_path << "\n";
    std::cout << "per-split: " << outcome.csv_path << "\n";
    std::cout << "summary:   " << outcome.summary_path << "\n";
    return 0;
}

int cmd_report(const std::string& report_path) {
    std::ifstream in(report_path);
    if (!in) {
        throw unlearn::IoError("cannot open report file: " + report_path, "report");
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw unlearn::IoError("malformed report json: " + std::string(e.what()), "report");
    }
    std::cout << unlearn::render_summary(unlearn::report_from_json(doc));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Game-based evaluation of machine-unlearning methods"};
    app.require_subcommand(1);

    unlearn::SyntheticSpec spec;
    std::string gen_out = "data.csv";
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic blob dataset as CSV");
    gen->add_option("--num-points", spec.num_points, "number of points")->required();
    gen->add_option("--dim", spec.dim, "feature dimension")->required();
    gen->add_option("--num-classes", spec.num_classes, "number of classes");
    gen->add_option("--separation", spec.cluster_separation, "cluster separation")->required();
    gen->add_option("--noise", spec.noise_sigma, "per-coordinate noise sigma")->required();
    gen->add_option("--seed", spec.seed, "generator seed");
    gen->add_option("--out", gen_out, "output CSV path");

    std::int64_t enum_n = 0;
    std::string enum_alpha;
    auto* enm = app.add_subcommand("enumerate", "print |S_alpha| and feasibility for n, alpha");
    enm->add_option("--n", enum_n, "dataset size")->required();
    enm->add_option("--alpha", enum_alpha, "unlearning portion, e.g. 1/5")->required();

    std::string run_config;
    std::string run_out_dir;
    auto* runc = app.add_subcommand("run", "run the full evaluation pipeline from a config file");
    runc->add_option("--config", run_config, "config JSON path")->required();
    runc->add_option("--out-dir", run_out_dir, "override the output directory");

    std::string report_path;
    auto* rep = app.add_subcommand("report", "re-render the summary from a stored report");
    rep->add_option("--report", report_path, "report JSON path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_data(spec, gen_out);
        if (enm->parsed()) return cmd_enumerate(enum_n, enum_alpha);
        if (runc->parsed()) return cmd_run(run_config, run_out_dir);
        if (rep->parsed()) return cmd_report(report_path);
    } catch (const unlearn::Error& e) {
        nlohmann::ordered_json record;
        record["code"] = std::string(e.code_name());
        record["message"] = e.what();
        record["field"] = e.field();
        std::cerr << record.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        nlohmann::ordered_json record;
        record["code"] = "Internal";
        record["message"] = e.what();
        record["field"] = "";
        std::cerr << record.dump() << "\n";
        return 2;
    }
    return 0;
}
