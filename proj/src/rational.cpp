#include "unlearn/rational.hpp"

#include <cctype>
#include <cstdlib>
#include <numeric>

#include "unlearn/errors.hpp"

namespace unlearn {

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) {
        throw InvalidParameter("rational with zero denominator", "alpha");
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    num_ = g == 0 ? 0 : num / g;
    den_ = g == 0 ? 1 : den / g;
}

std::string Rational::to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::parse(const std::string& text) {
    if (text.empty()) {
        throw InvalidParameter("empty rational literal", "alpha");
    }
    const auto slash = text.find('/');
    try {
        if (slash != std::string::npos) {
            const std::int64_t num = std::stoll(text.substr(0, slash));
            const std::int64_t den = std::stoll(text.substr(slash + 1));
            return Rational(num, den);
        }
        const auto dot = text.find('.');
        if (dot == std::string::npos) {
            return Rational(std::stoll(text), 1);
        }
        const std::string whole = text.substr(0, dot);
        const std::string frac = text.substr(dot + 1);
        if (frac.size() > 18) {
            throw InvalidParameter("decimal literal too precise for exact rational: " + text, "alpha");
        }
        for (char c : frac) {
            if (!std::isdigit(static_cast<unsigned char>(c))) {
                throw InvalidParameter("malformed rational literal: " + text, "alpha");
            }
        }
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        const bool negative = !whole.empty() && whole[0] == '-';
        const std::int64_t whole_part = whole.empty() || whole == "-" ? 0 : std::stoll(whole);
        const std::int64_t frac_part = frac.empty() ? 0 : std::stoll(frac);
        std::int64_t num = whole_part * den + (negative ? -frac_part : frac_part);
        return Rational(num, den);
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        throw InvalidParameter("malformed rational literal: " + text, "alpha");
    }
}

} // namespace unlearn
