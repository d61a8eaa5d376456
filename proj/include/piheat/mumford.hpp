#pragma once

#include <array>
#include <string>
#include <vector>

#include "piheat/operators.hpp"

namespace piheat {

/// Fractional-linear map z -> (az + b)/(cz + d) with rational entries,
/// understood up to a scalar.
struct Mobius {
    Rational a, b, c, d;

    Rational det() const { return a * d - b * c; }
    Rational trace() const { return a + d; }

    /// Image of a point; the pole -d/c must not be hit.
    Rational apply(const Rational& z) const;

    /// Inverse up to scalar: (d, -b; -c, a).
    Mobius inverse() const { return Mobius{d, -b, -c, a}; }

    Mobius operator*(const Mobius& o) const;

    /// Entries divided by the first nonzero one; equal keys mean equal
    /// projective transformations.
    std::array<Rational, 4> projective_key() const;

    void validate() const;
};

/// |tr|^2 > |det| (the scale-invariant form of the hyperbolicity test);
/// false for trace zero.
bool is_hyperbolic(const Mobius& g, const FieldParams& fp);

/// |g'(z)| = |det| / |cz + d|^2 as a ValExp exponent.
ValExp derivative_exp(const Mobius& g, const Rational& z,
                      const FieldParams& fp);

/// Per-cell derivative magnitudes over a holed disc, with the overall
/// maximum; constant-on-ball shortcut when the denominator cannot vary.
struct DerivReport {
    ValExp max_exp;
    std::vector<std::pair<Rational, ValExp>> cells; ///< (cell center, exp)
};

DerivReport derivative_magnitude(const Mobius& g, const HoledDisc& S,
                                 long long depth, const FieldParams& fp);

/// Exact integral of |g'(z)| over a holed disc (Q_p mode), by recursive
/// subdivision with the constancy shortcut.
Rational derivative_integral(const Mobius& g, const HoledDisc& S,
                             const FieldParams& fp);

/// max_S |g'| as a ValExp exponent.
ValExp derivative_max_exp(const Mobius& g, const HoledDisc& S,
                          const FieldParams& fp);

/// All reduced words up to the cutoff length over the generators and
/// their inverses (no immediate backtracking). g = 1 yields exactly
/// 2L + 1 words. A repeated projective matrix among distinct words means
/// the group is not free on these generators.
struct WordEnum {
    std::vector<Mobius> words;
    std::vector<long long> lengths;
    bool free_violation = false;
};

WordEnum enumerate_words(const std::vector<Mobius>& generators,
                         long long cutoff);

/// Discrete cocompact group data: hyperbolic generators, a compiled
/// covering of the fundamental domain, the reduction-graph coupling, and
/// the word-length cutoff for truncated sums.
struct SchottkyData {
    FieldParams params;
    std::vector<Mobius> generators;
    CompiledCovering cover;
    UMatrix graph;
    long long cutoff = 20;

    void validate() const;

    /// Checks that generator images of the fundamental domain leave it
    /// (at the covering's structural depth).
    bool fundamental_domain_ok() const;
};

/// A truncated group sum together with a geometric tail certificate.
struct TailSum {
    Scalar value;
    double tail_bound = 0;
    bool free_violation = false;
};

/// sum over words of max_U |w'| * m_{w,U}^{-s} with m = max{1, max|w'|};
/// requires s > 1.
TailSum weight_sum(const SchottkyData& data, std::size_t u, const Rational& s);

/// Group-invariant degree
///   deg(U) = sum_V A_{UV} d(U,V)^alpha
///            * sum_words m_{w,V}^{-s} int_V |w'(z)| dz,
/// truncated at the cutoff with a geometric tail bound.
struct InvariantDegree {
    std::size_t member = 0;
    Scalar value;
    double tail_bound = 0;
    long long cutoff = 0;
};

InvariantDegree invariant_degree(const SchottkyData& data,
                                 const Rational& alpha, const Rational& s,
                                 std::size_t u);

/// Closed-form invariant degree on the genus-1 curve K^x / <q> with
/// |q| = p^{-(n+1)/e} and the cover by the spheres U_0..U_n:
///   deg(U_i) = C_alpha(i) * S_q(s),
///   S_q(s) = 1/(1 - |q|) + |q|^{s-1}/(1 - |q|^{s-1}),
/// and s -> infinity keeps only the 1/(1 - |q|) factor.
Scalar tate_degree(const FieldParams& fp, long long n, const Rational& alpha,
                   const Rational& s, long long i, bool s_infinite = false);

/// The n+1 spheres as an abstract covering (any e, f).
AbstractCovering tate_abstract(const FieldParams& fp, long long n);

/// Geometric genus-1 data over Q_p: generator z -> q z with q = p^{n+1},
/// the sphere cover of Z_p minus p^{n+1} Z_p, and the cycle graph.
SchottkyData make_tate(const FieldParams& fp, long long n,
                       long long cutoff = 20);

/// Graph eigenvalues (plain distance-weighted Laplacian), invariant
/// wavelet eigenvalues -deg(U) with tail bounds, the spectral gap, and a
/// residual report of the truncated invariant generator applied to the
/// graph eigenvectors (recorded, not asserted: the two weightings need
/// not agree).
struct InvariantSpectrum {
    std::vector<double> graph_eigenvalues;
    std::vector<InvariantDegree> wavelet;
    double spectral_gap = 0;
    std::string gap_kind; ///< "laplacian" or "wavelet"
    double generator_residual = 0;
};

InvariantSpectrum invariant_spectrum(const SchottkyData& data,
                                     const Rational& alpha, const Rational& s);

/// One row of a spectral-gap scan over the genus-1 family.
struct GapRow {
    long long n = 0;
    double gap = 0;
    std::string kind;
    Rational min_measure;
};

std::vector<GapRow> gap_scan(const FieldParams& fp, long long n_from,
                             long long n_to, const Rational& alpha,
                             const Rational& s);

/// Normalization constant of a group-summed oscillation on U:
/// sqrt( sum_words m_{w,U}^{-s} int_U |w'| dz / mu(U) ); 1 for the
/// trivial group.
TailSum invariant_wavelet_norm(const SchottkyData& data, std::size_t u,
                               const Rational& s);

/// deg_G(U) * max_{V: A_UV != 0} mu(V) d(U,V)^alpha * C(s, lambda) with
/// C(s, l) = 1/(1 - p^{-l/e}) + p^{-l(s-1)/e}/(1 - p^{-l(s-1)/e});
/// lambda is the smallest observed exponent gap of the word weights
/// (fallback 1).
double degree_upper_bound(const SchottkyData& data, const Rational& alpha,
                          const Rational& s, std::size_t u);

} // namespace piheat
