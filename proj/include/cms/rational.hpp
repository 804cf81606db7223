#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>

namespace cms {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// 2^-k as an exact rational, k >= 0.
inline Rational pow2_inv(unsigned k) {
    BigInt d = BigInt(1) << k;
    return Rational(1, d);
}

// b^k for rational b, integer k >= 0.
inline Rational rat_pow(const Rational& b, unsigned k) {
    Rational r = 1;
    Rational base = b;
    while (k) {
        if (k & 1u) r *= base;
        base *= base;
        k >>= 1u;
    }
    return r;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// Directed rounding to a dyadic grid: the largest multiple of 2^-bits that is
// <= r (floor) or the smallest >= r (ceil). Keeps certified bounds valid while
// stopping numerator/denominator growth in long recursions.
inline Rational dyadic_floor(const Rational& r, unsigned bits) {
    BigInt num = boost::multiprecision::numerator(r) << bits;
    BigInt den = boost::multiprecision::denominator(r);
    BigInt q = num / den;
    if (num < 0 && q * den != num) --q;  // integer division truncates toward zero
    return Rational(q, BigInt(1) << bits);
}

inline Rational dyadic_ceil(const Rational& r, unsigned bits) { return -dyadic_floor(-r, bits); }

// Certified lower/upper bounds on a measure in [0,1].
// Exact values are represented as zero-width intervals.
struct MeasureInterval {
    Rational lower = 0;
    Rational upper = 0;
    int depth = 0;

    double lower_d() const { return to_double(lower); }
    double upper_d() const { return to_double(upper); }
    double width_d() const { return to_double(upper - lower); }

    void validate() const {
        if (lower < 0 || upper > 1 || lower > upper)
            throw std::invalid_argument("MeasureInterval: need 0 <= lower <= upper <= 1");
    }
};

}  // namespace cms
