#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sofic {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Bad arguments, schema violations, malformed inputs. CLI maps this to exit code 1.
struct validation_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A feasibility guard was exceeded (enumeration too large, schedule too deep).
/// CLI maps this to exit code 2.
struct guard_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// log of a positive big integer, exact to double precision even when the
/// integer does not fit in a double.
inline double log_big(const BigInt& x) {
    if (x <= 0) throw validation_error("log_big: argument must be positive");
    const std::size_t bits = boost::multiprecision::msb(x);
    if (bits < 512) return std::log(x.convert_to<double>());
    const BigInt top = x >> (bits - 52);
    return std::log(top.convert_to<double>()) +
           static_cast<double>(bits - 52) * std::numbers::ln2;
}

inline BigInt factorial_big(std::uint64_t n) {
    BigInt f = 1;
    for (std::uint64_t i = 2; i <= n; ++i) f *= i;
    return f;
}

inline BigInt binomial_big(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r *= (n - k + i);
        r /= i;
    }
    return r;
}

inline BigInt ipow_big(std::uint64_t base, std::uint64_t exp) {
    BigInt r = 1, b = base;
    while (exp) {
        if (exp & 1) r *= b;
        b *= b;
        exp >>= 1;
    }
    return r;
}

/// Parses an exact rational from "p/q", integer, or decimal notation
/// ("0.3" -> 3/10, "-1.25e-2" -> -1/80). No floating point involved.
inline Rational parse_exact_rational(std::string_view s) {
    auto fail = [&] { throw validation_error("not a rational literal: '" + std::string(s) + "'"); };
    if (s.empty()) fail();
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        BigInt num, den;
        try {
            num = BigInt(std::string(s.substr(0, slash)));
            den = BigInt(std::string(s.substr(slash + 1)));
        } catch (const std::exception&) {
            fail();
        }
        if (den == 0) throw validation_error("zero denominator: '" + std::string(s) + "'");
        return Rational(num, den);
    }
    bool neg = false;
    std::size_t i = 0;
    if (s[i] == '+' || s[i] == '-') {
        neg = s[i] == '-';
        ++i;
    }
    BigInt mantissa = 0;
    std::int64_t frac_digits = 0, exponent = 0;
    bool any_digit = false, in_frac = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c >= '0' && c <= '9') {
            mantissa = mantissa * 10 + (c - '0');
            if (in_frac) ++frac_digits;
            any_digit = true;
        } else if (c == '.') {
            if (in_frac) fail();
            in_frac = true;
        } else if (c == 'e' || c == 'E') {
            ++i;
            bool eneg = false;
            if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
                eneg = s[i] == '-';
                ++i;
            }
            if (i >= s.size()) fail();
            std::int64_t e = 0;
            for (; i < s.size(); ++i) {
                if (s[i] < '0' || s[i] > '9') fail();
                e = e * 10 + (s[i] - '0');
                if (e > 100000) fail();
            }
            exponent = eneg ? -e : e;
            break;
        } else {
            fail();
        }
    }
    if (!any_digit) fail();
    Rational r(mantissa, 1);
    std::int64_t shift = exponent - frac_digits;
    if (shift > 0)
        r *= Rational(ipow_big(10, static_cast<std::uint64_t>(shift)), 1);
    else if (shift < 0)
        r /= Rational(ipow_big(10, static_cast<std::uint64_t>(-shift)), 1);
    if (neg) r = -r;
    return r;
}

/// Exact rational carried by a double's shortest round-trip decimal form,
/// so a config value written as 0.1 means 1/10, not the binary double.
inline Rational rational_from_double_text(double d) {
    if (!std::isfinite(d)) throw validation_error("non-finite number in input");
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), d);
    return parse_exact_rational(std::string_view(buf, res.ptr - buf));
}

inline std::string rational_to_string(const Rational& r) {
    return r.str();
}

/// Compensated (Kahan) summation; keeps Shannon sums accurate to ~1 ulp.
class KahanSum {
  public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0.0, c_ = 0.0;
};

inline const Rational& tolerance_1e12() {
    static const Rational t(1, BigInt("1000000000000"));
    return t;
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw validation_error("integer overflow in group arithmetic");
    return r;
}

inline std::int64_t checked_neg(std::int64_t a) {
    if (a == std::numeric_limits<std::int64_t>::min()) throw validation_error("integer overflow in group arithmetic");
    return -a;
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

inline std::int64_t mod_positive(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

}  // namespace sofic
