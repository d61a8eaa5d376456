#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "piheat/rational.hpp"

namespace piheat {

/// Arithmetic data of the local field K: residue characteristic p,
/// ramification index e and residue degree f. The uniformiser has
/// |pi| = p^{-1/e} and a ball pi^m O_K has measure p^{-m f}.
struct FieldParams {
    Integer p = 2;
    long long e = 1;
    long long f = 1;

    bool qp_mode() const { return e == 1 && f == 1; }

    /// Residue field size p^f.
    Integer residue_size() const { return int_pow(p, f); }

    void validate() const;
};

/// A magnitude p^{-k/e} carried as the exponent k; k = +infinity encodes
/// magnitude zero. Ordered by magnitude (larger k means smaller magnitude).
struct ValExp {
    long long k = 0;
    bool infinite = false;

    static ValExp infinity() { return ValExp{0, true}; }
    static ValExp finite(long long k) { return ValExp{k, false}; }

    bool operator==(const ValExp& o) const {
        return infinite == o.infinite && (infinite || k == o.k);
    }
    bool operator!=(const ValExp& o) const { return !(*this == o); }

    /// Magnitude comparison: |this| < |o|.
    bool smaller_than(const ValExp& o) const {
        if (infinite) return !o.infinite;
        if (o.infinite) return false;
        return k > o.k;
    }

    /// Exponent addition (magnitude multiplication).
    ValExp operator+(const ValExp& o) const {
        if (infinite || o.infinite) return infinity();
        return finite(k + o.k);
    }

    /// Magnitude as a double, p^{-k/e}.
    double magnitude(const FieldParams& fp) const {
        if (infinite) return 0.0;
        return std::pow(fp.p.convert_to<double>(), -double(k) / double(fp.e));
    }

    /// Magnitude as an exact rational when it is one (k divisible by e).
    std::optional<Rational> exact_magnitude(const FieldParams& fp) const {
        if (infinite) return Rational(0);
        if (k % fp.e != 0) return std::nullopt;
        return rat_pow(fp.p, -(k / fp.e));
    }
};

/// A value carried exactly as a rational whenever possible, with a double
/// shadow that is always present.
struct Scalar {
    std::optional<Rational> exact;
    double approx = 0.0;

    Scalar() = default;
    Scalar(const Rational& r) : exact(r), approx(r.convert_to<double>()) {}
    Scalar(double d) : approx(d) {}
    Scalar(std::optional<Rational> e, double a) : exact(std::move(e)), approx(a) {}

    static Scalar zero() { return Scalar(Rational(0)); }

    Scalar operator+(const Scalar& o) const {
        if (exact && o.exact) return Scalar(*exact + *o.exact);
        return Scalar(std::nullopt, approx + o.approx);
    }
    Scalar operator*(const Scalar& o) const {
        if (exact && o.exact) return Scalar(*exact * *o.exact);
        return Scalar(std::nullopt, approx * o.approx);
    }
    Scalar operator-() const {
        if (exact) return Scalar(Rational(-*exact));
        return Scalar(std::nullopt, -approx);
    }
    Scalar operator-(const Scalar& o) const { return *this + (-o); }
    Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
};

/// p-adic valuation of a nonzero rational: v_p(num) - v_p(den).
long long rational_vp(const Integer& p, const Rational& x);

/// |x|_K as a ValExp; requires Q_p mode (e = f = 1). The exponent is
/// e * v_p(x), so the general value-group convention is respected.
ValExp valuation(const Rational& x, const FieldParams& fp);

/// mu of a ball of radius p^{-k/e}: exactly p^{-k f / e}; k must describe an
/// attainable radius (k divisible by ... any integer k is attainable in K).
Rational ball_measure(const ValExp& radius, const FieldParams& fp);

/// p-adic fractional part of a rational (Q_p mode): the unique
/// n / p^m in [0,1) with x - n/p^m in Z_p.
Rational fractional_part(const Rational& x, const FieldParams& fp);

/// The standard additive character chi(x) = exp(2 pi i {x}_p) on Q_p.
std::complex<double> character(const Rational& x, const FieldParams& fp);

/// Lift of the residue field into O_K; tau(j) = j for Q_p.
struct ResidueLift {
    FieldParams params;
    Integer operator()(const Integer& j) const;
};

/// Canonical representative of x modulo p^k (Q_p mode): the unique
/// r = p^{v} * (integer in [0, p^{k-v})) with v = v_p(x), when v < k,
/// else 0. Two rationals are congruent mod p^k iff they share this key.
Rational canonical_mod(const Rational& x, long long k, const FieldParams& fp);

} // namespace piheat
