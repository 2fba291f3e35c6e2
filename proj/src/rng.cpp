#include "unlearn/rng.hpp"

#include <algorithm>
#include <cmath>

namespace unlearn {

std::uint64_t hash_string(std::uint64_t seed, std::string_view tag) noexcept {
    std::uint64_t h = hash_combine(seed, 0x9ae16a3b2f90404fULL);
    for (unsigned char c : tag) {
        h = hash_combine(h, static_cast<std::uint64_t>(c));
    }
    return hash_combine(h, static_cast<std::uint64_t>(tag.size()));
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t token : path) {
        h = hash_combine(h, token);
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = hash_string(splitmix64(master), tag);
    for (std::uint64_t token : path) {
        h = hash_combine(h, token);
    }
    return h;
}

std::uint64_t id_set_digest(const std::vector<std::int64_t>& ids) {
    std::vector<std::int64_t> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t h = 0x8c74b2a3e1f5d96bULL;
    for (std::int64_t id : sorted) {
        h = hash_combine(h, static_cast<std::uint64_t>(id));
    }
    return hash_combine(h, static_cast<std::uint64_t>(sorted.size()));
}

std::uint64_t Rng::uniform_int(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % bound;
}

double Rng::gaussian() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1, u2;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double two_pi = 6.283185307179586476925286766559;
    spare_ = mag * std::sin(two_pi * u2);
    has_spare_ = true;
    return mag * std::cos(two_pi * u2);
}

} // namespace unlearn
