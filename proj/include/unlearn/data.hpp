#ifndef UNLEARN_DATA_HPP
#define UNLEARN_DATA_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace unlearn {

struct DataPoint {
    std::int64_t id = 0;
    Eigen::VectorXd features;
    int label = 0;
};

// The finite universe the game is played over. Ingestion canonicalizes ids
// to 0..n-1 in input order; every split and sensitivity distribution refers
// to these canonical ids.
class Dataset {
public:
    Dataset() = default;
    // Reassigns ids 0..n-1 in the given order and validates dimensions/labels.
    Dataset(std::vector<DataPoint> points, int num_classes);

    const std::vector<DataPoint>& points() const noexcept { return points_; }
    const DataPoint& point(std::int64_t id) const { return points_.at(static_cast<std::size_t>(id)); }
    std::int64_t size() const noexcept { return static_cast<std::int64_t>(points_.size()); }
    int num_classes() const noexcept { return num_classes_; }
    int dim() const noexcept { return dim_; }

    std::vector<DataPoint> subset(const std::vector<std::int64_t>& ids) const;

private:
    std::vector<DataPoint> points_;
    int num_classes_ = 0;
    int dim_ = 0;
};

// P_D: per-id sampling weight; more sensitive points get more oracle mass.
class SensitivityDistribution {
public:
    SensitivityDistribution() = default;

    static SensitivityDistribution uniform(std::int64_t n);
    // Raw non-negative weights indexed by canonical id; normalized to sum 1.
    static SensitivityDistribution from_weights(std::vector<double> weights);

    double weight(std::int64_t id) const { return weights_.at(static_cast<std::size_t>(id)); }
    std::int64_t size() const noexcept { return static_cast<std::int64_t>(weights_.size()); }
    const std::vector<double>& weights() const noexcept { return weights_; }

private:
    std::vector<double> weights_;
};

// CSV with header `id,label,f0,...,f{d-1}`.
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const Dataset& dataset, const std::string& path);

// CSV with header `id,weight`; ids refer to the dataset's canonical ids.
SensitivityDistribution read_sensitivity_csv(const std::string& path, std::int64_t n);

} // namespace unlearn

#endif // UNLEARN_DATA_HPP
