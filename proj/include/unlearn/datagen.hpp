#ifndef UNLEARN_DATAGEN_HPP
#define UNLEARN_DATAGEN_HPP

#include <cstdint>
#include <vector>

#include "unlearn/data.hpp"

namespace unlearn {

// Seeded Gaussian blobs: one mean per class on a centered regular simplex
// with edge length cluster_separation (needs dim >= num_classes); labels
// assigned round-robin so classes stay balanced within one point.
struct SyntheticSpec {
    std::int64_t num_points = 0;
    int dim = 0;
    int num_classes = 2;
    double cluster_separation = 1.0;
    double noise_sigma = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

Dataset generate_synthetic(const SyntheticSpec& spec);

// Seeded disjoint partition into a target dataset (the game universe) and a
// shadow dataset (adversary calibration). ids are re-canonicalized per part;
// provenance maps canonical id -> original id.
struct TargetShadowPartition {
    Dataset target;
    Dataset shadow;
    std::vector<std::int64_t> target_provenance;
    std::vector<std::int64_t> shadow_provenance;
};

TargetShadowPartition partition_target_shadow(const Dataset& dataset, double fraction,
                                              std::uint64_t seed);

} // namespace unlearn

#endif // UNLEARN_DATAGEN_HPP
