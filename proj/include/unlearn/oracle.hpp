#ifndef UNLEARN_ORACLE_HPP
#define UNLEARN_ORACLE_HPP

#include <cstdint>
#include <map>

#include "unlearn/data.hpp"
#include "unlearn/rng.hpp"
#include "unlearn/split.hpp"

namespace unlearn {

// O_s(b): emits points from F (bit 0) or T (bit 1), weighted by the
// sensitivity distribution conditioned on the selected set.
struct OracleSpec {
    Split split;
    int bit = 0; // 0 selects forget, 1 selects test
    SensitivityDistribution sensitivity;
};

// Renormalized restriction of P_D to the selected set. Throws
// DegenerateOracle when the selected set carries zero mass.
std::map<std::int64_t, double> oracle_mass(const OracleSpec& spec);

// Stateful sampler over a fixed oracle; draws are i.i.d. given the stream.
class OracleSampler {
public:
    OracleSampler(const Dataset& dataset, const OracleSpec& spec);

    const DataPoint& draw(Rng& rng) const;
    const std::map<std::int64_t, double>& mass() const noexcept { return mass_; }

private:
    const Dataset* dataset_;
    std::map<std::int64_t, double> mass_;
    std::vector<std::int64_t> ids_;
    std::vector<double> cumulative_;
};

// One seeded draw from O_s(b).
DataPoint oracle_draw(const Dataset& dataset, const OracleSpec& spec, std::uint64_t seed);

} // namespace unlearn

#endif // UNLEARN_ORACLE_HPP
