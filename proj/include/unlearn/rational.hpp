#ifndef UNLEARN_RATIONAL_HPP
#define UNLEARN_RATIONAL_HPP

#include <cstdint>
#include <string>

namespace unlearn {

// Exact rational with canonical (reduced, positive-denominator) form. The
// unlearning portion alpha is a structural constraint of the game, so it is
// stored and compared exactly, never as a float.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(std::int64_t num, std::int64_t den);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }

    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::string to_string() const;

    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) noexcept { return !(a == b); }

    bool in_open_unit_interval() const noexcept { return num_ > 0 && num_ < den_; }

    // Accepts "a/b", an integer, or a plain decimal such as "0.1" (converted
    // exactly to 1/10).
    static Rational parse(const std::string& text);

private:
    std::int64_t num_;
    std::int64_t den_;
};

} // namespace unlearn

#endif // UNLEARN_RATIONAL_HPP
