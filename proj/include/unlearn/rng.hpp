#ifndef UNLEARN_RNG_HPP
#define UNLEARN_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace unlearn {

// SplitMix64 mixing step (Steele, Lea, Flood 2014). Used both as the stream
// generator and as the seed-derivation hash, so every piece of randomness in
// a run is a pure function of the master seed and a derivation path.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
    return splitmix64(seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

std::uint64_t hash_string(std::uint64_t seed, std::string_view tag) noexcept;

// Folds an ordered list of 64-bit tokens into one seed.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::initializer_list<std::uint64_t> path = {}) noexcept;

// Digest of an id set, independent of input order.
std::uint64_t id_set_digest(const std::vector<std::int64_t>& ids);

// Deterministic stream generator. Distributions are hand-rolled (bounded
// uniform via rejection, gaussian via Box-Muller) so sequences do not depend
// on the standard library's unspecified distribution algorithms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : state_(splitmix64(seed ^ 0x5bf0f3a3c253e1b5ULL)) {}

    std::uint64_t next_u64() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound); exact via rejection.
    std::uint64_t uniform_int(std::uint64_t bound) noexcept;

    double gaussian() noexcept;

    template <typename T>
    void shuffle(std::vector<T>& values) noexcept {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace unlearn

#endif // UNLEARN_RNG_HPP
