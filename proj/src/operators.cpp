#include "piheat/operators.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

namespace piheat {

namespace {

/// Cell count mu(U) p^{mf} of a member at depth m; must be a positive
/// integer or the depth is too coarse for the member's measure.
Integer cell_count(const Rational& mu, long long depth, const FieldParams& fp) {
    Rational n = mu * rat_pow(fp.p, depth * fp.f);
    if (denominator(n) != 1 || n < 1)
        throw refine_depth_error(
            "depth too small to resolve a member of measure " +
            format_rational(mu));
    return numerator(n);
}

void normalize_sign(Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > 1e-12) {
            if (v[i] < 0) v = -v;
            return;
        }
    }
}

} // namespace

void UMatrix::validate(std::size_t n) const {
    if (a.size() != n)
        throw invalid_input_error("coupling matrix size does not match cover");
    for (const auto& row : a)
        if (row.size() != n)
            throw invalid_input_error("coupling matrix is not square");
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i][i] != 0)
            throw invalid_input_error("coupling matrix diagonal must be zero");
        for (std::size_t j = 0; j < n; ++j) {
            if (a[i][j] < 0)
                throw invalid_input_error("coupling entries must be >= 0");
            if (a[i][j] != a[j][i])
                throw invalid_input_error("coupling matrix must be symmetric");
        }
    }
}

void KernelSpec::validate() const {
    cov.validate();
    A.validate(cov.size());
}

Scalar dist_pow(const ValExp& d, const Rational& alpha, const FieldParams& fp) {
    if (d.infinite)
        throw invalid_input_error("zero distance raised to a power");
    if (alpha == 0) return Scalar(Rational(1));
    Rational ex = Rational(d.k) * alpha / fp.e;
    if (denominator(ex) == 1)
        return Scalar(rat_pow(fp.p, -numerator(ex).convert_to<long long>()));
    double pd = fp.p.convert_to<double>();
    return Scalar(std::pow(pd, -ex.convert_to<double>()));
}

Scalar degree(const KernelSpec& spec, std::size_t u) {
    Scalar deg = Scalar::zero();
    for (std::size_t v = 0; v < spec.cov.size(); ++v) {
        if (v == u || spec.A.a[u][v] == 0) continue;
        deg += Scalar(spec.A.a[u][v]) *
               dist_pow(spec.cov.dist[u][v], spec.alpha, spec.cov.params) *
               Scalar(spec.cov.measures[v]);
    }
    return deg;
}

GeneratorMatrix generator(const KernelSpec& spec) {
    spec.validate();
    std::size_t n = spec.cov.size();
    GeneratorMatrix g;
    g.m.assign(n, std::vector<Scalar>(n, Scalar::zero()));
    for (std::size_t u = 0; u < n; ++u) {
        Scalar row = Scalar::zero();
        for (std::size_t v = 0; v < n; ++v) {
            if (v == u || spec.A.a[u][v] == 0) continue;
            g.m[u][v] = Scalar(spec.A.a[u][v]) *
                        dist_pow(spec.cov.dist[u][v], spec.alpha,
                                 spec.cov.params) *
                        Scalar(spec.cov.measures[v]);
            row += g.m[u][v];
        }
        g.m[u][u] = -row;
    }
    return g;
}

Eigen::MatrixXd GeneratorMatrix::dense() const {
    std::size_t n = size();
    Eigen::MatrixXd d(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d(i, j) = m[i][j].approx;
    return d;
}

std::vector<EigenPair> laplacian_spectrum(const KernelSpec& spec) {
    spec.validate();
    std::size_t n = spec.cov.size();
    Eigen::MatrixXd S(n, n);
    std::vector<double> sqmu(n);
    for (std::size_t i = 0; i < n; ++i)
        sqmu[i] = std::sqrt(spec.cov.measures[i].convert_to<double>());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                S(i, j) = -degree(spec, i).approx;
            } else if (spec.A.a[i][j] == 0) {
                S(i, j) = 0;
            } else {
                S(i, j) = spec.A.a[i][j].convert_to<double>() *
                          dist_pow(spec.cov.dist[i][j], spec.alpha,
                                   spec.cov.params)
                              .approx *
                          sqmu[i] * sqmu[j];
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success)
        throw numeric_error("eigen decomposition did not converge");
    Eigen::MatrixXd M = generator(spec).dense();
    std::vector<EigenPair> out;
    for (std::size_t k = 0; k < n; ++k) {
        EigenPair ep;
        ep.lambda = es.eigenvalues()[Eigen::Index(k)];
        Eigen::VectorXd w = es.eigenvectors().col(Eigen::Index(k));
        ep.coeff = w;
        for (std::size_t i = 0; i < n; ++i) ep.coeff[Eigen::Index(i)] /= sqmu[i];
        normalize_sign(ep.coeff);
        ep.residual = (M * ep.coeff - ep.lambda * ep.coeff).norm();
        out.push_back(std::move(ep));
    }
    return out;
}

std::vector<double> adjacency_laplacian_spectrum(const KernelSpec& spec) {
    spec.validate();
    std::size_t n = spec.cov.size();
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || spec.A.a[i][j] == 0) continue;
            double b = spec.A.a[i][j].convert_to<double>() *
                       dist_pow(spec.cov.dist[i][j], spec.alpha,
                                spec.cov.params)
                           .approx;
            L(i, j) = b;
            L(i, i) -= b;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    if (es.info() != Eigen::Success)
        throw numeric_error("eigen decomposition did not converge");
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = es.eigenvalues()[Eigen::Index(k)];
    return out;
}

std::vector<WaveletEigen> wavelet_eigenvalues(const KernelSpec& spec,
                                              long long depth) {
    spec.validate();
    std::vector<WaveletEigen> out;
    for (std::size_t u = 0; u < spec.cov.size(); ++u) {
        WaveletEigen we;
        we.member = u;
        we.eigenvalue = -degree(spec, u);
        we.multiplicity =
            cell_count(spec.cov.measures[u], depth, spec.cov.params) - 1;
        out.push_back(std::move(we));
    }
    return out;
}

SpectrumReport spectrum(const KernelSpec& spec, long long depth) {
    SpectrumReport r;
    r.laplacian = laplacian_spectrum(spec);
    r.wavelets = wavelet_eigenvalues(spec, depth);
    r.components = component_count(spec.A, spec.cov.size());
    return r;
}

std::complex<double> eval_wavelet(const Wavelet& w, const Rational& x,
                                  const FieldParams& fp) {
    if (!fp.qp_mode())
        throw unsupported_mode_error("wavelet evaluation requires Q_p mode");
    if (w.j <= 0 || w.j >= fp.residue_size())
        throw invalid_input_error("wavelet frequency index out of range");
    if (!w.support.contains_point(x, fp)) return 0;
    double amp = std::sqrt(
        rat_pow(fp.p, w.support.radius_exp * fp.f).convert_to<double>());
    ResidueLift tau{fp};
    Rational arg = rat_pow(fp.p, -w.scale) * Rational(tau(w.j)) * x;
    return amp * character(arg, fp);
}

std::vector<Scalar> apply_operator(const KernelSpec& spec,
                                   const std::vector<std::size_t>& cell_member,
                                   long long depth,
                                   const std::vector<Scalar>& g) {
    spec.validate();
    std::size_t n = spec.cov.size();
    if (g.size() != cell_member.size())
        throw invalid_input_error("cell data size mismatch");
    std::vector<Integer> counts(n, 0);
    std::vector<Scalar> sums(n, Scalar::zero());
    for (std::size_t c = 0; c < cell_member.size(); ++c) {
        if (cell_member[c] >= n)
            throw invalid_input_error("cell mapped to a nonexistent member");
        counts[cell_member[c]] += 1;
        sums[cell_member[c]] += g[c];
    }
    Scalar cellmass{rat_pow(spec.cov.params.p, -depth * spec.cov.params.f)};
    for (std::size_t u = 0; u < n; ++u)
        if (counts[u] != cell_count(spec.cov.measures[u], depth,
                                    spec.cov.params))
            throw refine_depth_error("cell counts disagree with measures");

    // jump-in term per member and the degree per member
    std::vector<Scalar> jump_in(n, Scalar::zero());
    std::vector<Scalar> degs(n, Scalar::zero());
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (v == u || spec.A.a[u][v] == 0) continue;
            Scalar w = Scalar(spec.A.a[u][v]) *
                       dist_pow(spec.cov.dist[u][v], spec.alpha,
                                spec.cov.params);
            jump_in[u] += w * sums[v] * cellmass;
            degs[u] += w * Scalar(spec.cov.measures[v]);
        }
    }
    std::vector<Scalar> out(g.size(), Scalar::zero());
    for (std::size_t c = 0; c < g.size(); ++c) {
        std::size_t u = cell_member[c];
        out[c] = jump_in[u] - degs[u] * g[c];
    }
    return out;
}

double bound_constant(const KernelSpec& spec) {
    double worst = 0;
    for (std::size_t u = 0; u < spec.cov.size(); ++u)
        worst = std::max(worst, degree(spec, u).approx);
    return 2.0 * worst;
}

IsometryCheck dictionary_isometry_check(const UMatrix& A,
                                        const AbstractCovering& cov,
                                        long long depth) {
    cov.validate();
    A.validate(cov.size());
    IsometryCheck out;
    out.matrix_norm_sq = 0;
    for (std::size_t u = 0; u < cov.size(); ++u)
        for (std::size_t v = 0; v < cov.size(); ++v)
            out.matrix_norm_sq +=
                A.a[u][v] * A.a[u][v] * cov.measures[u] * cov.measures[v];

    // independent route: discretize and integrate the piecewise-constant
    // kernel over all cell pairs
    std::vector<std::size_t> cell_member;
    for (std::size_t u = 0; u < cov.size(); ++u) {
        Integer n = cell_count(cov.measures[u], depth, cov.params);
        for (Integer c = 0; c < n; ++c) cell_member.push_back(u);
    }
    Rational cellmass = rat_pow(cov.params.p, -depth * cov.params.f);
    out.kernel_norm_sq = 0;
    for (std::size_t i = 0; i < cell_member.size(); ++i)
        for (std::size_t j = 0; j < cell_member.size(); ++j) {
            const Rational& a = A.a[cell_member[i]][cell_member[j]];
            if (a != 0) out.kernel_norm_sq += a * a * cellmass * cellmass;
        }
    return out;
}

DecompositionReport l2_decomposition_report(const KernelSpec& spec,
                                            long long depth) {
    spec.validate();
    DecompositionReport r;
    r.wavelet_dim = 0;
    r.total_cells = 0;
    for (std::size_t u = 0; u < spec.cov.size(); ++u) {
        Integer n = cell_count(spec.cov.measures[u], depth, spec.cov.params);
        r.wavelet_dim += n - 1;
        r.total_cells += n;
    }
    r.const_dim = component_count(spec.A, spec.cov.size());
    r.graph_dim = spec.cov.size() - r.const_dim;
    return r;
}

std::size_t component_count(const UMatrix& A, std::size_t n) {
    std::vector<int> comp(n, -1);
    std::size_t count = 0;
    for (std::size_t start = 0; start < n; ++start) {
        if (comp[start] >= 0) continue;
        ++count;
        std::vector<std::size_t> stack{start};
        comp[start] = int(count);
        while (!stack.empty()) {
            std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t v = 0; v < n; ++v)
                if (A.a[u][v] != 0 && comp[v] < 0) {
                    comp[v] = int(count);
                    stack.push_back(v);
                }
        }
    }
    return count;
}

std::vector<std::vector<std::complex<double>>> assemble_basis(
    const CompiledCovering& cc, const UMatrix& A, const Rational& alpha,
    long long depth) {
    const FieldParams& fp = cc.geometry.params;
    if (!fp.qp_mode())
        throw unsupported_mode_error("basis assembly requires Q_p mode");
    std::vector<Cell> cells = discretize(cc.geometry, depth);
    std::size_t nc = cells.size();
    std::size_t nm = cc.abstract.size();
    std::vector<std::vector<std::size_t>> by_member(nm);
    for (std::size_t c = 0; c < nc; ++c) by_member[cells[c].member].push_back(c);

    std::vector<std::vector<std::complex<double>>> basis;

    // graph part: lifted eigenfunctions of the generator
    KernelSpec spec{cc.abstract, A, alpha};
    for (const EigenPair& ep : laplacian_spectrum(spec)) {
        std::vector<std::complex<double>> f(nc, 0.0);
        for (std::size_t c = 0; c < nc; ++c)
            f[c] = ep.coeff[Eigen::Index(cells[c].member)];
        basis.push_back(std::move(f));
    }

    // wavelet part per member
    for (std::size_t u = 0; u < nm; ++u) {
        const HoledDisc& member = cc.geometry.members[u];
        long long top = member.holes.empty() ? member.outer.radius_exp
                                             : member.structural_depth();
        if (depth < top)
            throw refine_depth_error("depth below a member's finest hole");

        if (!member.holes.empty()) {
            // real mean-zero family across the top-level cells
            std::vector<Rational> top_cells = member_cells(member, top, fp);
            std::size_t kappa = top_cells.size();
            std::map<Rational, std::size_t> top_index;
            for (std::size_t i = 0; i < kappa; ++i)
                top_index[canonical_mod(top_cells[i], top, fp)] = i;
            double cellmu = rat_pow(fp.p, -top * fp.f).convert_to<double>();
            for (std::size_t k = 1; k < kappa; ++k) {
                double a = 1.0 / std::sqrt(double(k) * double(k + 1) * cellmu);
                std::vector<std::complex<double>> f(nc, 0.0);
                for (std::size_t c : by_member[u]) {
                    std::size_t i =
                        top_index.at(canonical_mod(cells[c].center, top, fp));
                    if (i < k)
                        f[c] = a;
                    else if (i == k)
                        f[c] = -double(k) * a;
                }
                basis.push_back(std::move(f));
            }
        }

        // character families on every sub-ball between the top level and m
        for (long long level = top; level < depth; ++level) {
            std::vector<Rational> balls;
            if (member.holes.empty() && level == member.outer.radius_exp)
                balls = {member.outer.center};
            else
                balls = member_cells(member, level, fp);
            for (const Rational& b : balls) {
                for (Integer j = 1; j < fp.p; ++j) {
                    Wavelet w{Ball{b, level}, j, level + 1};
                    std::vector<std::complex<double>> f(nc, 0.0);
                    for (std::size_t c : by_member[u])
                        f[c] = eval_wavelet(w, cells[c].center, fp);
                    basis.push_back(std::move(f));
                }
            }
        }
    }
    return basis;
}

} // namespace piheat
