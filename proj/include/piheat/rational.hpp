#pragma once

#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "piheat/errors.hpp"

namespace piheat {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// p^k for k >= 0.
inline Integer int_pow(const Integer& p, long long k) {
    Integer r = 1;
    for (long long i = 0; i < k; ++i) r *= p;
    return r;
}

/// p^k as a rational, k may be negative.
inline Rational rat_pow(const Integer& p, long long k) {
    if (k >= 0) return Rational(int_pow(p, k));
    return Rational(1, int_pow(p, -k));
}

/// x^k for rational x, integer k (x != 0 when k < 0).
inline Rational rat_pow(const Rational& x, long long k) {
    if (k == 0) return 1;
    bool neg = k < 0;
    long long n = neg ? -k : k;
    Rational r = 1;
    Rational b = x;
    while (n > 0) {
        if (n & 1) r *= b;
        b *= b;
        n >>= 1;
    }
    if (neg) {
        if (r == 0) throw invalid_input_error("zero to a negative power");
        r = 1 / r;
    }
    return r;
}

/// Parses "num/den" or "num" (optional sign, base 10).
inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(Integer(s));
        Integer num(s.substr(0, slash));
        Integer den(s.substr(slash + 1));
        if (den == 0) throw invalid_input_error("zero denominator in '" + s + "'");
        return Rational(num, den);
    } catch (const std::runtime_error&) {
        throw invalid_input_error("cannot parse rational '" + s + "'");
    }
}

/// Canonical "num/den" string, integers without the "/1".
inline std::string format_rational(const Rational& x) {
    if (denominator(x) == 1) return numerator(x).str();
    return numerator(x).str() + "/" + denominator(x).str();
}

/// Extended gcd on cpp_int: g = a*x + b*y.
inline Integer ext_gcd(const Integer& a, const Integer& b, Integer& x, Integer& y) {
    if (b == 0) {
        x = 1;
        y = 0;
        return a;
    }
    Integer x1, y1;
    Integer g = ext_gcd(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

/// Inverse of a modulo m (gcd(a, m) = 1 required).
inline Integer mod_inverse(const Integer& a, const Integer& m) {
    Integer x, y;
    Integer aa = a % m;
    if (aa < 0) aa += m;
    Integer g = ext_gcd(aa, m, x, y);
    if (g != 1) throw invalid_input_error("element not invertible modulo " + m.str());
    Integer r = x % m;
    if (r < 0) r += m;
    return r;
}

} // namespace piheat
