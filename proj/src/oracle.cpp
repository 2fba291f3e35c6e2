#include "unlearn/oracle.hpp"

#include <algorithm>

#include "unlearn/errors.hpp"

namespace unlearn {

std::map<std::int64_t, double> oracle_mass(const OracleSpec& spec) {
    if (spec.bit != 0 && spec.bit != 1) {
        throw InvalidParameter("oracle bit must be 0 or 1", "bit");
    }
    const auto& selected = spec.bit == 0 ? spec.split.forget : spec.split.test;
    double total = 0.0;
    for (std::int64_t id : selected) {
        total += spec.sensitivity.weight(id);
    }
    if (total <= 0.0) {
        throw DegenerateOracle("selected set carries zero sensitivity mass", "sensitivity");
    }
    std::map<std::int64_t, double> mass;
    for (std::int64_t id : selected) {
        mass[id] = spec.sensitivity.weight(id) / total;
    }
    return mass;
}

OracleSampler::OracleSampler(const Dataset& dataset, const OracleSpec& spec)
    : dataset_(&dataset), mass_(oracle_mass(spec)) {
    ids_.reserve(mass_.size());
    cumulative_.reserve(mass_.size());
    double acc = 0.0;
    for (const auto& [id, p] : mass_) {
        acc += p;
        ids_.push_back(id);
        cumulative_.push_back(acc);
    }
    cumulative_.back() = 1.0;
}

const DataPoint& OracleSampler::draw(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const std::size_t idx = std::min<std::size_t>(
        static_cast<std::size_t>(it - cumulative_.begin()), ids_.size() - 1);
    return dataset_->point(ids_[idx]);
}

DataPoint oracle_draw(const Dataset& dataset, const OracleSpec& spec, std::uint64_t seed) {
    OracleSampler sampler(dataset, spec);
    Rng rng(seed);
    return sampler.draw(rng);
}

} // namespace unlearn
