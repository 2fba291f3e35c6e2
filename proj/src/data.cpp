#include "unlearn/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "unlearn/errors.hpp"

namespace unlearn {

Dataset::Dataset(std::vector<DataPoint> points, int num_classes)
    : points_(std::move(points)), num_classes_(num_classes) {
    if (points_.empty()) {
        throw InvalidParameter("dataset must be nonempty", "dataset");
    }
    if (num_classes_ < 2) {
        throw InvalidParameter("dataset needs at least two classes", "num_classes");
    }
    dim_ = static_cast<int>(points_.front().features.size());
    if (dim_ < 1) {
        throw InvalidParameter("dataset feature dimension must be positive", "dim");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        auto& p = points_[i];
        if (static_cast<int>(p.features.size()) != dim_) {
            throw DimensionMismatch("inconsistent feature dimension at row " + std::to_string(i), "features");
        }
        if (p.label < 0 || p.label >= num_classes_) {
            throw InvalidParameter("label out of range at row " + std::to_string(i), "label");
        }
        p.id = static_cast<std::int64_t>(i);
    }
}

std::vector<DataPoint> Dataset::subset(const std::vector<std::int64_t>& ids) const {
    std::vector<DataPoint> out;
    out.reserve(ids.size());
    for (std::int64_t id : ids) {
        out.push_back(point(id));
    }
    return out;
}

SensitivityDistribution SensitivityDistribution::uniform(std::int64_t n) {
    if (n <= 0) {
        throw InvalidParameter("uniform sensitivity needs a nonempty universe", "sensitivity");
    }
    SensitivityDistribution d;
    d.weights_.assign(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
    return d;
}

SensitivityDistribution SensitivityDistribution::from_weights(std::vector<double> weights) {
    if (weights.empty()) {
        throw InvalidParameter("sensitivity weights must be nonempty", "sensitivity");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw InvalidParameter("sensitivity weights must be finite and non-negative", "sensitivity");
        }
        total += w;
    }
    if (total <= 0.0) {
        throw InvalidParameter("sensitivity weights must have positive total mass", "sensitivity");
    }
    SensitivityDistribution d;
    d.weights_ = std::move(weights);
    for (double& w : d.weights_) w /= total;
    return d;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double parse_double(const std::string& text, const std::string& what, const std::string& path) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw IoError("malformed " + what + " '" + text + "' in " + path, what);
    }
}

std::int64_t parse_int(const std::string& text, const std::string& what, const std::string& path) {
    try {
        std::size_t pos = 0;
        const std::int64_t v = std::stoll(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw IoError("malformed " + what + " '" + text + "' in " + path, what);
    }
}

} // namespace

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open dataset csv: " + path, "dataset");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("empty dataset csv: " + path, "dataset");
    }
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "id" || header[1] != "label") {
        throw IoError("dataset csv header must be id,label,f0,...: " + path, "dataset");
    }
    const int dim = static_cast<int>(header.size()) - 2;
    for (int j = 0; j < dim; ++j) {
        if (header[static_cast<std::size_t>(j) + 2] != "f" + std::to_string(j)) {
            throw IoError("dataset csv feature columns must be f0..f{d-1}: " + path, "dataset");
        }
    }
    std::vector<DataPoint> points;
    int max_label = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != dim + 2) {
            throw IoError("dataset csv row with wrong field count in " + path, "dataset");
        }
        DataPoint p;
        p.id = parse_int(fields[0], "id", path);
        const std::int64_t label = parse_int(fields[1], "label", path);
        if (label < 0) {
            throw IoError("negative label in " + path, "label");
        }
        p.label = static_cast<int>(label);
        max_label = std::max(max_label, p.label);
        p.features.resize(dim);
        for (int j = 0; j < dim; ++j) {
            p.features[j] = parse_double(fields[static_cast<std::size_t>(j) + 2], "feature", path);
        }
        points.push_back(std::move(p));
    }
    if (points.empty()) {
        throw IoError("dataset csv has no data rows: " + path, "dataset");
    }
    return Dataset(std::move(points), max_label + 1);
}

void write_dataset_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write dataset csv: " + path, "dataset");
    }
    out << "id,label";
    for (int j = 0; j < dataset.dim(); ++j) out << ",f" << j;
    out << "\n";
    char buf[64];
    for (const auto& p : dataset.points()) {
        out << p.id << "," << p.label;
        for (int j = 0; j < dataset.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", p.features[j]);
            out << "," << buf;
        }
        out << "\n";
    }
}

SensitivityDistribution read_sensitivity_csv(const std::string& path, std::int64_t n) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open sensitivity csv: " + path, "sensitivity");
    }
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"id", "weight"}) {
        throw IoError("sensitivity csv header must be id,weight: " + path, "sensitivity");
    }
    std::vector<double> weights(static_cast<std::size_t>(n), 0.0);
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2) {
            throw IoError("sensitivity csv row with wrong field count in " + path, "sensitivity");
        }
        const std::int64_t id = parse_int(fields[0], "id", path);
        if (id < 0 || id >= n) {
            throw IoError("sensitivity id outside dataset universe in " + path, "id");
        }
        if (seen[static_cast<std::size_t>(id)]) {
            throw IoError("duplicate sensitivity id in " + path, "id");
        }
        seen[static_cast<std::size_t>(id)] = true;
        weights[static_cast<std::size_t>(id)] = parse_double(fields[1], "weight", path);
    }
    return SensitivityDistribution::from_weights(std::move(weights));
}

} // namespace unlearn
