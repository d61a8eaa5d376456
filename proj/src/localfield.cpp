#include "piheat/localfield.hpp"

#include <cmath>

namespace piheat {

namespace {

bool is_prime(const Integer& n) {
    if (n < 2) return false;
    for (Integer d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

} // namespace

void FieldParams::validate() const {
    if (!is_prime(p)) throw invalid_input_error("p = " + p.str() + " is not prime");
    if (e < 1) throw invalid_input_error("ramification index must be >= 1");
    if (f < 1) throw invalid_input_error("residue degree must be >= 1");
}

long long rational_vp(const Integer& p, const Rational& x) {
    if (x == 0) throw invalid_input_error("valuation of zero requested");
    long long v = 0;
    Integer n = numerator(x);
    Integer d = denominator(x);
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    while (d % p == 0) {
        d /= p;
        --v;
    }
    return v;
}

ValExp valuation(const Rational& x, const FieldParams& fp) {
    if (!fp.qp_mode())
        throw unsupported_mode_error("point arithmetic requires e = f = 1 (Q_p mode)");
    if (x == 0) return ValExp::infinity();
    return ValExp::finite(fp.e * rational_vp(fp.p, x));
}

Rational ball_measure(const ValExp& radius, const FieldParams& fp) {
    if (radius.infinite) throw degenerate_ball_error("ball of radius zero has no verticial role");
    // radius p^{-k/e} corresponds to pi^k O_K, of measure p^{-k f} ... with
    // the exponent convention k in units of 1/e, measure is p^{-(k/e) * e f}?
    // No: pi^m O_K has radius p^{-m/e} (k = m) and measure p^{-m f}.
    return rat_pow(fp.p, -radius.k * fp.f);
}

Rational fractional_part(const Rational& x, const FieldParams& fp) {
    if (!fp.qp_mode())
        throw unsupported_mode_error("the additive character is evaluated in Q_p mode only");
    if (x == 0) return 0;
    long long v = rational_vp(fp.p, x);
    if (v >= 0) return 0;
    long long m = -v;
    Integer pm = int_pow(fp.p, m);
    // x = a / (b' * p^m) with a, b' coprime to p; {x}_p = (a b'^{-1} mod p^m)/p^m.
    Integer a = numerator(x);
    Integer bp = denominator(x);
    while (bp % fp.p == 0) bp /= fp.p;
    Integer r = (a % pm) * mod_inverse(bp % pm, pm) % pm;
    if (r < 0) r += pm;
    return Rational(r, pm);
}

std::complex<double> character(const Rational& x, const FieldParams& fp) {
    Rational frac = fractional_part(x, fp);
    double theta = 2.0 * M_PI * frac.convert_to<double>();
    return {std::cos(theta), std::sin(theta)};
}

Integer ResidueLift::operator()(const Integer& j) const {
    if (!params.qp_mode())
        throw unsupported_mode_error("residue lift table exists in Q_p mode only");
    if (j < 0 || j >= params.residue_size())
        throw invalid_input_error("residue index out of range");
    return j; // smallest-natural lift; recovers the classical Kozyrev family
}

Rational canonical_mod(const Rational& x, long long k, const FieldParams& fp) {
    if (!fp.qp_mode())
        throw unsupported_mode_error("canonical residues require Q_p mode");
    if (x == 0) return 0;
    long long v = rational_vp(fp.p, x);
    if (v >= k) return 0;
    // x = p^v * u with u a unit; reduce u modulo p^{k-v}.
    Rational u = x / rat_pow(fp.p, v);
    Integer modulus = int_pow(fp.p, k - v);
    Integer un = numerator(u) % modulus;
    if (un < 0) un += modulus;
    Integer r = un * mod_inverse(denominator(u) % modulus, modulus) % modulus;
    if (r < 0) r += modulus;
    return Rational(r) * rat_pow(fp.p, v);
}

} // namespace piheat
