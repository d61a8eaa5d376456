#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "piheat/affinoid.hpp"

namespace piheat {

/// Symmetric non-negative coupling matrix on covering labels with zero
/// diagonal.
struct UMatrix {
    std::vector<std::vector<Rational>> a;

    std::size_t size() const { return a.size(); }
    void validate(std::size_t n) const;
};

/// A covering, a coupling matrix and the distance exponent alpha: the data
/// of the jump kernel sum_{U != V} A_{UV} |x-y|^alpha.
struct KernelSpec {
    AbstractCovering cov;
    UMatrix A;
    Rational alpha = 0;

    void validate() const;
};

/// d^alpha for a ValExp distance: exact p-power when the exponent
/// k*alpha/e is an integer, floating point otherwise.
Scalar dist_pow(const ValExp& d, const Rational& alpha, const FieldParams& fp);

/// deg(U) = sum_V A_{UV} d(U,V)^alpha mu(V).
Scalar degree(const KernelSpec& spec, std::size_t u);

/// The finite generator acting on member values c_U (the value of a
/// covering-constant function on U): off-diagonal A_{UV} d^alpha mu(V),
/// diagonal -deg(U). Rows sum to zero.
struct GeneratorMatrix {
    std::vector<std::vector<Scalar>> m;

    std::size_t size() const { return m.size(); }
    Eigen::MatrixXd dense() const;
};

GeneratorMatrix generator(const KernelSpec& spec);

/// One eigenpair of the generator; coeff holds member values c with the
/// lifted function sum c_U 1_U of unit L^2 norm, first significant
/// coefficient positive.
struct EigenPair {
    double lambda = 0;
    Eigen::VectorXd coeff;
    double residual = 0;
};

/// Full spectrum of the generator via the symmetrization
/// D^{1/2} M D^{-1/2}, D = diag(mu); ascending eigenvalues.
std::vector<EigenPair> laplacian_spectrum(const KernelSpec& spec);

/// Eigenvalues of the plain combinatorial Laplacian B - diag(row sums) of
/// the weighted adjacency B_{UV} = A_{UV} d^alpha (no measure weights);
/// ascending.
std::vector<double> adjacency_laplacian_spectrum(const KernelSpec& spec);

/// Eigenvalue -deg(U) shared by all small-scale oscillations inside U,
/// with its multiplicity mu(U) p^{mf} - 1 at resolution depth m.
struct WaveletEigen {
    std::size_t member = 0;
    Scalar eigenvalue;
    Integer multiplicity;
};

std::vector<WaveletEigen> wavelet_eigenvalues(const KernelSpec& spec,
                                              long long depth);

struct SpectrumReport {
    std::vector<EigenPair> laplacian;
    std::vector<WaveletEigen> wavelets;
    std::size_t components = 0; ///< connected components of the A-graph
};

SpectrumReport spectrum(const KernelSpec& spec, long long depth);

/// Character-modulated indicator psi(x) = mu(W)^{-1/2} chi(p^{-scale}
/// tau(j) x) on the ball W; mean zero, unit L^2 norm. For a ball of
/// radius p^{-r} the natural scale is r + 1.
struct Wavelet {
    Ball support;
    Integer j = 1;
    long long scale = 1;
};

std::complex<double> eval_wavelet(const Wavelet& w, const Rational& x,
                                  const FieldParams& fp);

/// Applies the jump operator to a depth-m cell function g, exactly:
/// (Dg)(c) = sum_V A_{UV} d^alpha [ p^{-mf} sum_{c' in V} g(c') ]
///           - deg(U) g(c)      for c a cell of member U.
/// cell_member maps each cell index to its member index; each member must
/// hold exactly mu(U) p^{mf} cells.
std::vector<Scalar> apply_operator(const KernelSpec& spec,
                                   const std::vector<std::size_t>& cell_member,
                                   long long depth,
                                   const std::vector<Scalar>& g);

/// 2 max_U deg(U): an L^2 operator-norm bound for the jump operator. The
/// off-diagonal part has symmetric kernel with row mass deg(U(x)), so the
/// Schur test bounds it by max deg; the multiplication part is bounded by
/// the same quantity.
double bound_constant(const KernelSpec& spec);

/// The two squared norms that the matrix-to-kernel dictionary must match:
/// sum A^2 mu mu from the matrix, and the discretized double integral of
/// the kernel sum A_{UV} 1_U(x) 1_V(y). Exactly equal for rational input.
struct IsometryCheck {
    Rational matrix_norm_sq;
    Rational kernel_norm_sq;
};

IsometryCheck dictionary_isometry_check(const UMatrix& A,
                                        const AbstractCovering& cov,
                                        long long depth);

/// Dimension bookkeeping of the orthogonal splitting of depth-m functions:
/// oscillating parts inside members, the image of the graph incidence map,
/// and one constant per component.
struct DecompositionReport {
    Integer wavelet_dim;
    std::size_t graph_dim = 0;
    std::size_t const_dim = 0;
    Integer total_cells;
};

DecompositionReport l2_decomposition_report(const KernelSpec& spec,
                                            long long depth);

std::size_t component_count(const UMatrix& A, std::size_t n);

/// Complete orthonormal eigenbasis at depth m as cell-value vectors,
/// aligned with discretize(geometry, depth): the |V| lifted graph
/// eigenfunctions followed by all wavelets (character families on every
/// sub-ball, plus a real mean-zero family across the top cells of holed
/// members). Requires Q_p geometry.
std::vector<std::vector<std::complex<double>>> assemble_basis(
    const CompiledCovering& cc, const UMatrix& A, const Rational& alpha,
    long long depth);

} // namespace piheat
