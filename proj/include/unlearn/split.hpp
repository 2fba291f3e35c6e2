#ifndef UNLEARN_SPLIT_HPP
#define UNLEARN_SPLIT_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "unlearn/data.hpp"
#include "unlearn/rational.hpp"

namespace unlearn {

// One element of S_alpha: an ordered triple (retain, forget, test) of sorted
// disjoint id sets with |forget| == |test| and alpha == |F| / (|R|+|F|).
struct Split {
    std::vector<std::int64_t> retain;
    std::vector<std::int64_t> forget;
    std::vector<std::int64_t> test;
    Rational alpha;

    // Throws InvalidParameter when the triple is not a valid member of
    // S_alpha over the universe {0..n-1}.
    void validate(std::int64_t n) const;

    std::vector<std::int64_t> train_ids() const; // retain ∪ forget, sorted
    std::uint64_t digest() const;
};

struct SplitSizes {
    std::int64_t retain = 0;
    std::int64_t forget_test = 0; // |F| == |T|
};

// Solves r + 2t = n with alpha == t/(r+t) exactly. Throws NonIntegralSplit
// when no integer solution exists; rounding is never applied.
SplitSizes split_sizes(std::int64_t n, const Rational& alpha);

// |S_alpha| = n! / (r! t! t!); saturates at max uint64 on overflow.
std::uint64_t count_splits(std::int64_t n, const Rational& alpha);

// Streams S_alpha in canonical order: lexicographic by sorted F, then by
// sorted T over the remaining ids.
class SplitEnumerator {
public:
    SplitEnumerator(std::int64_t n, const Rational& alpha);

    std::optional<Split> next();
    std::uint64_t total() const noexcept { return total_; }

private:
    bool advance_combination(std::vector<std::int64_t>& comb, const std::vector<std::int64_t>& pool);
    void rebuild_test_pool();

    std::int64_t n_;
    Rational alpha_;
    SplitSizes sizes_;
    std::uint64_t total_;
    bool done_ = false;
    bool first_ = true;
    std::vector<std::int64_t> forget_idx_;      // indices into 0..n-1
    std::vector<std::int64_t> test_pool_;       // ids not in forget, sorted
    std::vector<std::int64_t> test_idx_;        // current T as ids
};

// Materializes the full enumeration; throws EnumerationTooLarge above cap.
std::vector<Split> enumerate_splits(const Dataset& dataset, const Rational& alpha,
                                    std::uint64_t cap = 100000);

// Uniform over S_alpha: seeded Fisher-Yates shuffle of ids, sliced r/t/t.
Split sample_split(const Dataset& dataset, const Rational& alpha, std::uint64_t seed);

// The swap pair (R, T, F) of (R, F, T); an involution on S_alpha.
Split swap_split(const Split& split);

} // namespace unlearn

#endif // UNLEARN_SPLIT_HPP
