#include "unlearn/datagen.hpp"

#include <algorithm>
#include <cmath>

#include "unlearn/errors.hpp"
#include "unlearn/rng.hpp"

namespace unlearn {

void SyntheticSpec::validate() const {
    if (num_classes < 2) {
        throw InvalidParameter("num_classes must be >= 2", "synthetic.num_classes");
    }
    if (num_points < 3 * static_cast<std::int64_t>(num_classes)) {
        throw InvalidParameter("num_points must be >= 3 * num_classes", "synthetic.num_points");
    }
    if (dim < num_classes) {
        throw InvalidParameter("dim must be >= num_classes for the simplex embedding",
                               "synthetic.dim");
    }
    if (!(cluster_separation > 0.0) || !std::isfinite(cluster_separation)) {
        throw InvalidParameter("cluster_separation must be finite and > 0",
                               "synthetic.cluster_separation");
    }
    if (!(noise_sigma > 0.0) || !std::isfinite(noise_sigma)) {
        throw InvalidParameter("noise_sigma must be finite and > 0", "synthetic.noise_sigma");
    }
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const int c = spec.num_classes;
    // Scaled unit vectors minus their centroid give a regular simplex with
    // pairwise distance exactly cluster_separation.
    const double scale = spec.cluster_separation / std::sqrt(2.0);
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(c, spec.dim);
    for (int k = 0; k < c; ++k) {
        for (int j = 0; j < c; ++j) {
            means(k, j) = scale * ((j == k ? 1.0 : 0.0) - 1.0 / static_cast<double>(c));
        }
    }

    Rng rng(derive_seed(spec.seed, "synthetic"));
    std::vector<DataPoint> points;
    points.reserve(static_cast<std::size_t>(spec.num_points));
    for (std::int64_t i = 0; i < spec.num_points; ++i) {
        DataPoint p;
        p.label = static_cast<int>(i % c);
        p.features.resize(spec.dim);
        for (int j = 0; j < spec.dim; ++j) {
            p.features[j] = means(p.label, j) + spec.noise_sigma * rng.gaussian();
        }
        points.push_back(std::move(p));
    }
    return Dataset(std::move(points), c);
}

TargetShadowPartition partition_target_shadow(const Dataset& dataset, double fraction,
                                              std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw InvalidParameter("fraction must lie in (0, 1)", "target_shadow.fraction");
    }
    const std::int64_t n = dataset.size();
    std::int64_t target_size = std::llround(fraction * static_cast<double>(n));
    target_size = std::max<std::int64_t>(1, std::min(n - 1, target_size));
    if (n < 2) {
        throw InvalidParameter("dataset too small to partition", "dataset");
    }

    std::vector<std::int64_t> ids(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
    Rng rng(derive_seed(seed, "target_shadow"));
    rng.shuffle(ids);

    std::vector<std::int64_t> target_ids(ids.begin(), ids.begin() + target_size);
    std::vector<std::int64_t> shadow_ids(ids.begin() + target_size, ids.end());
    std::sort(target_ids.begin(), target_ids.end());
    std::sort(shadow_ids.begin(), shadow_ids.end());

    TargetShadowPartition out;
    out.target = Dataset(dataset.subset(target_ids), dataset.num_classes());
    out.shadow = Dataset(dataset.subset(shadow_ids), dataset.num_classes());
    out.target_provenance = std::move(target_ids);
    out.shadow_provenance = std::move(shadow_ids);
    return out;
}

} // namespace unlearn
