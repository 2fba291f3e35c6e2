#include "unlearn/split.hpp"

#include <algorithm>
#include <limits>

#include "unlearn/errors.hpp"
#include "unlearn/rng.hpp"

namespace unlearn {

namespace {

bool sorted_unique(const std::vector<std::int64_t>& ids) {
    for (std::size_t i = 1; i < ids.size(); ++i) {
        if (ids[i - 1] >= ids[i]) return false;
    }
    return true;
}

} // namespace

void Split::validate(std::int64_t n) const {
    if (!sorted_unique(retain) || !sorted_unique(forget) || !sorted_unique(test)) {
        throw InvalidParameter("split id sets must be sorted and duplicate-free", "split");
    }
    if (forget.size() != test.size()) {
        throw InvalidParameter("split requires |forget| == |test|", "split");
    }
    std::vector<std::int64_t> all;
    all.reserve(retain.size() + forget.size() + test.size());
    all.insert(all.end(), retain.begin(), retain.end());
    all.insert(all.end(), forget.begin(), forget.end());
    all.insert(all.end(), test.begin(), test.end());
    std::sort(all.begin(), all.end());
    if (static_cast<std::int64_t>(all.size()) != n) {
        throw InvalidParameter("split does not cover the dataset universe", "split");
    }
    for (std::int64_t i = 0; i < n; ++i) {
        if (all[static_cast<std::size_t>(i)] != i) {
            throw InvalidParameter("split sets must partition ids 0..n-1", "split");
        }
    }
    const auto r = static_cast<std::int64_t>(retain.size());
    const auto t = static_cast<std::int64_t>(forget.size());
    if (t == 0 || r == 0) {
        throw InvalidParameter("split sets must be nonempty", "split");
    }
    if (Rational(t, r + t) != alpha) {
        throw InvalidParameter("split alpha mismatch: " + Rational(t, r + t).to_string() +
                                   " != " + alpha.to_string(),
                               "alpha");
    }
}

std::vector<std::int64_t> Split::train_ids() const {
    std::vector<std::int64_t> ids;
    ids.reserve(retain.size() + forget.size());
    ids.insert(ids.end(), retain.begin(), retain.end());
    ids.insert(ids.end(), forget.begin(), forget.end());
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::uint64_t Split::digest() const {
    std::uint64_t h = 0xd6e8feb86659fd93ULL;
    h = hash_combine(h, id_set_digest(retain));
    h = hash_combine(h, id_set_digest(forget));
    h = hash_combine(h, id_set_digest(test));
    return h;
}

SplitSizes split_sizes(std::int64_t n, const Rational& alpha) {
    if (n < 3) {
        throw InvalidParameter("split_sizes requires n >= 3", "n");
    }
    if (!alpha.in_open_unit_interval()) {
        throw InvalidParameter("alpha must lie in (0, 1)", "alpha");
    }
    // t/(r+t) = a/b with r+2t = n  =>  t = a*n/(a+b), unique when integral.
    const std::int64_t a = alpha.num();
    const std::int64_t b = alpha.den();
    const std::int64_t denom = a + b;
    if ((a * n) % denom != 0) {
        throw NonIntegralSplit("no integer split for n=" + std::to_string(n) +
                                   ", alpha=" + alpha.to_string(),
                               "alpha");
    }
    SplitSizes sizes;
    sizes.forget_test = (a * n) / denom;
    sizes.retain = n - 2 * sizes.forget_test;
    if (sizes.forget_test < 1 || sizes.retain < 1) {
        throw NonIntegralSplit("split sizes degenerate for n=" + std::to_string(n) +
                                   ", alpha=" + alpha.to_string(),
                               "alpha");
    }
    return sizes;
}

std::uint64_t count_splits(std::int64_t n, const Rational& alpha) {
    const SplitSizes sizes = split_sizes(n, alpha);
    const auto t = sizes.forget_test;
    auto choose = [](std::int64_t m, std::int64_t k) -> unsigned __int128 {
        unsigned __int128 result = 1;
        for (std::int64_t i = 1; i <= k; ++i) {
            result = result * static_cast<unsigned __int128>(m - k + i) /
                     static_cast<unsigned __int128>(i);
        }
        return result;
    };
    const unsigned __int128 total = choose(n, t) * choose(n - t, t);
    constexpr auto max64 = std::numeric_limits<std::uint64_t>::max();
    if (total > static_cast<unsigned __int128>(max64)) return max64;
    return static_cast<std::uint64_t>(total);
}

SplitEnumerator::SplitEnumerator(std::int64_t n, const Rational& alpha)
    : n_(n), alpha_(alpha), sizes_(split_sizes(n, alpha)), total_(count_splits(n, alpha)) {
    forget_idx_.resize(static_cast<std::size_t>(sizes_.forget_test));
    for (std::int64_t i = 0; i < sizes_.forget_test; ++i) {
        forget_idx_[static_cast<std::size_t>(i)] = i;
    }
    rebuild_test_pool();
}

void SplitEnumerator::rebuild_test_pool() {
    test_pool_.clear();
    std::size_t fi = 0;
    for (std::int64_t id = 0; id < n_; ++id) {
        if (fi < forget_idx_.size() && forget_idx_[fi] == id) {
            ++fi;
        } else {
            test_pool_.push_back(id);
        }
    }
    test_idx_.assign(test_pool_.begin(), test_pool_.begin() + sizes_.forget_test);
}

// Lexicographic next k-combination drawn from a sorted pool.
bool SplitEnumerator::advance_combination(std::vector<std::int64_t>& comb,
                                          const std::vector<std::int64_t>& pool) {
    const std::int64_t k = static_cast<std::int64_t>(comb.size());
    const std::int64_t m = static_cast<std::int64_t>(pool.size());
    std::vector<std::int64_t> pos(comb.size());
    for (std::int64_t i = 0; i < k; ++i) {
        pos[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(
            std::lower_bound(pool.begin(), pool.end(), comb[static_cast<std::size_t>(i)]) -
            pool.begin());
    }
    std::int64_t i = k - 1;
    while (i >= 0 && pos[static_cast<std::size_t>(i)] == m - k + i) --i;
    if (i < 0) return false;
    ++pos[static_cast<std::size_t>(i)];
    for (std::int64_t j = i + 1; j < k; ++j) {
        pos[static_cast<std::size_t>(j)] = pos[static_cast<std::size_t>(j - 1)] + 1;
    }
    for (std::int64_t j = 0; j < k; ++j) {
        comb[static_cast<std::size_t>(j)] = pool[static_cast<std::size_t>(pos[static_cast<std::size_t>(j)])];
    }
    return true;
}

std::optional<Split> SplitEnumerator::next() {
    if (done_) return std::nullopt;
    if (!first_) {
        if (!advance_combination(test_idx_, test_pool_)) {
            std::vector<std::int64_t> universe(static_cast<std::size_t>(n_));
            for (std::int64_t i = 0; i < n_; ++i) universe[static_cast<std::size_t>(i)] = i;
            if (!advance_combination(forget_idx_, universe)) {
                done_ = true;
                return std::nullopt;
            }
            rebuild_test_pool();
        }
    }
    first_ = false;

    Split s;
    s.alpha = alpha_;
    s.forget = forget_idx_;
    s.test = test_idx_;
    std::size_t fi = 0, ti = 0;
    for (std::int64_t id = 0; id < n_; ++id) {
        if (fi < s.forget.size() && s.forget[fi] == id) {
            ++fi;
        } else if (ti < s.test.size() && s.test[ti] == id) {
            ++ti;
        } else {
            s.retain.push_back(id);
        }
    }
    return s;
}

std::vector<Split> enumerate_splits(const Dataset& dataset, const Rational& alpha,
                                    std::uint64_t cap) {
    const std::uint64_t total = count_splits(dataset.size(), alpha);
    if (total > cap) {
        throw EnumerationTooLarge("|S_alpha| = " + std::to_string(total) +
                                      " exceeds enumeration cap " + std::to_string(cap),
                                  "alpha");
    }
    SplitEnumerator it(dataset.size(), alpha);
    std::vector<Split> splits;
    splits.reserve(static_cast<std::size_t>(total));
    while (auto s = it.next()) {
        splits.push_back(std::move(*s));
    }
    return splits;
}

Split sample_split(const Dataset& dataset, const Rational& alpha, std::uint64_t seed) {
    const SplitSizes sizes = split_sizes(dataset.size(), alpha);
    std::vector<std::int64_t> ids(static_cast<std::size_t>(dataset.size()));
    for (std::int64_t i = 0; i < dataset.size(); ++i) ids[static_cast<std::size_t>(i)] = i;
    Rng rng(seed);
    rng.shuffle(ids);

    Split s;
    s.alpha = alpha;
    s.retain.assign(ids.begin(), ids.begin() + sizes.retain);
    s.forget.assign(ids.begin() + sizes.retain, ids.begin() + sizes.retain + sizes.forget_test);
    s.test.assign(ids.begin() + sizes.retain + sizes.forget_test, ids.end());
    std::sort(s.retain.begin(), s.retain.end());
    std::sort(s.forget.begin(), s.forget.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

Split swap_split(const Split& split) {
    Split s;
    s.retain = split.retain;
    s.forget = split.test;
    s.test = split.forget;
    s.alpha = split.alpha;
    return s;
}

} // namespace unlearn
