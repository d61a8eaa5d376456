#include "piheat/mumford.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Eigenvalues>

namespace piheat {

namespace {

Scalar scalar_inv(const Scalar& x) {
    if (x.exact) {
        if (*x.exact == 0) throw numeric_error("division by zero");
        return Scalar(Rational(1 / *x.exact));
    }
    return Scalar(std::nullopt, 1.0 / x.approx);
}

/// Walks the maximal balls inside a holed disc on which |g'| is constant
/// and reports (ball, exponent of |g'| as p^{-k/e}).
template <class F>
void foreach_constant_ball(const Mobius& g, const HoledDisc& S,
                           const FieldParams& fp, F&& emit) {
    long long vdet = rational_vp(fp.p, g.det());
    bool affine = g.c == 0;
    Rational pole = affine ? Rational(0) : Rational(-g.d / g.c);
    if (!affine && S.contains_point(pole, fp))
        throw pole_in_domain_error("pole of the transformation lies in the "
                                   "integration domain");
    long long vc = affine ? 0 : rational_vp(fp.p, g.c);

    std::vector<Ball> stack{S.outer};
    while (!stack.empty()) {
        Ball b = stack.back();
        stack.pop_back();
        bool in_hole = false, meets_hole = false;
        for (const Ball& h : S.holes) {
            if (h.contains_ball(b, fp)) in_hole = true;
            else if (!b.disjoint_from(h, fp)) meets_hole = true;
        }
        if (in_hole) continue;
        if (affine) {
            // derivative a/d is globally constant; only the hole geometry
            // needs resolving
            if (!meets_hole) {
                emit(b, vdet - 2 * rational_vp(fp.p, g.d));
                continue;
            }
            for (Ball& c : b.children(fp)) stack.push_back(c);
            continue;
        }
        Rational w = g.c * b.center + g.d;
        bool constant =
            w != 0 && rational_vp(fp.p, w) < vc + b.radius_exp;
        if (constant && !meets_hole) {
            emit(b, vdet - 2 * rational_vp(fp.p, w));
            continue;
        }
        for (Ball& c : b.children(fp)) stack.push_back(c);
    }
}

/// Geometric tail certificate for truncated word sums: the observed term
/// magnitudes p^{-e_i} determine the smallest exponent gap lambda; words
/// beyond the cutoff contribute at most
///   (frontier sum) * rho / (1 - rho),  rho = branching * p^{-lambda/e}.
struct TailEstimator {
    std::vector<double> exponents; ///< -log_p of each positive term
    double frontier_sum = 0;

    void add(long long length, double value, long long cutoff, double logp) {
        if (value <= 0) return;
        exponents.push_back(-std::log(value) / logp);
        if (length == cutoff) frontier_sum += value;
    }

    double bound(std::size_t n_generators, const FieldParams& fp) const {
        std::vector<double> distinct;
        std::vector<double> sorted = exponents;
        std::sort(sorted.begin(), sorted.end());
        for (double e : sorted)
            if (distinct.empty() || e - distinct.back() > 1e-9)
                distinct.push_back(e);
        double lambda = 1.0;
        if (distinct.size() >= 3) {
            lambda = 1e300;
            for (std::size_t i = 1; i < distinct.size(); ++i)
                lambda = std::min(lambda, distinct[i] - distinct[i - 1]);
        }
        double branching =
            n_generators <= 1 ? 1.0 : double(2 * n_generators - 1);
        double rho = branching * std::pow(fp.p.convert_to<double>(),
                                          -lambda / double(fp.e));
        if (rho >= 1.0) return std::numeric_limits<double>::infinity();
        return frontier_sum * rho / (1.0 - rho);
    }
};

/// W_V = sum over words of m_{w,V}^{-s} * int_V |w'| dz, with tail bound.
TailSum member_weight(const SchottkyData& data, std::size_t v,
                      const Rational& s) {
    if (s <= 1) throw invalid_input_error("weight exponent must exceed 1");
    const FieldParams& fp = data.params;
    const HoledDisc& V = data.cover.geometry.members[v];
    WordEnum words = enumerate_words(data.generators, data.cutoff);
    TailSum out;
    out.value = Scalar::zero();
    out.free_violation = words.free_violation;
    TailEstimator tail;
    double logp = std::log(fp.p.convert_to<double>());
    for (std::size_t w = 0; w < words.words.size(); ++w) {
        ValExp kmax = derivative_max_exp(words.words[w], V, fp);
        long long j = std::max<long long>(0, -kmax.k); // m = p^{j/e}
        Scalar term = dist_pow(ValExp::finite(j), s, fp) *
                      Scalar(derivative_integral(words.words[w], V, fp));
        out.value += term;
        tail.add(words.lengths[w], term.approx, data.cutoff, logp);
    }
    out.tail_bound = tail.bound(data.generators.size(), fp);
    return out;
}

} // namespace

Rational Mobius::apply(const Rational& z) const {
    Rational den = c * z + d;
    if (den == 0)
        throw pole_in_domain_error("point is the pole of the transformation");
    return (a * z + b) / den;
}

Mobius Mobius::operator*(const Mobius& o) const {
    return Mobius{a * o.a + b * o.c, a * o.b + b * o.d,
                  c * o.a + d * o.c, c * o.b + d * o.d};
}

std::array<Rational, 4> Mobius::projective_key() const {
    std::array<Rational, 4> k{a, b, c, d};
    for (const Rational& x : k)
        if (x != 0) {
            Rational pivot = x; // copy: x aliases an entry being divided
            for (Rational& y : k) y /= pivot;
            return k;
        }
    throw invalid_input_error("zero matrix is not a transformation");
}

void Mobius::validate() const {
    if (det() == 0)
        throw invalid_input_error("transformation must have nonzero "
                                  "determinant");
}

bool is_hyperbolic(const Mobius& g, const FieldParams& fp) {
    g.validate();
    Rational tr = g.trace();
    if (tr == 0) return false;
    // |tr|^2 > |det|  <=>  2 v(tr) < v(det)
    return 2 * rational_vp(fp.p, tr) < rational_vp(fp.p, g.det());
}

ValExp derivative_exp(const Mobius& g, const Rational& z,
                      const FieldParams& fp) {
    g.validate();
    Rational den = g.c * z + g.d;
    if (den == 0)
        throw pole_in_domain_error("derivative at the pole");
    return ValExp::finite(rational_vp(fp.p, g.det()) -
                          2 * rational_vp(fp.p, den));
}

DerivReport derivative_magnitude(const Mobius& g, const HoledDisc& S,
                                 long long depth, const FieldParams& fp) {
    g.validate();
    DerivReport r;
    bool first = true;
    long long m = std::max(depth, S.structural_depth());
    for (const Rational& cell : member_cells(S, m, fp)) {
        ValExp e = derivative_max_exp(g, HoledDisc{Ball{cell, m}, {}}, fp);
        r.cells.emplace_back(cell, e);
        if (first || e.k < r.max_exp.k) r.max_exp = e;
        first = false;
    }
    if (first) throw invalid_input_error("empty domain");
    return r;
}

Rational derivative_integral(const Mobius& g, const HoledDisc& S,
                             const FieldParams& fp) {
    if (!fp.qp_mode())
        throw unsupported_mode_error("exact integration requires Q_p mode");
    g.validate();
    Rational total = 0;
    foreach_constant_ball(g, S, fp, [&](const Ball& b, long long k) {
        total += b.measure(fp) * rat_pow(fp.p, -k);
    });
    return total;
}

ValExp derivative_max_exp(const Mobius& g, const HoledDisc& S,
                          const FieldParams& fp) {
    g.validate();
    bool first = true;
    long long best = 0;
    foreach_constant_ball(g, S, fp, [&](const Ball&, long long k) {
        if (first || k < best) best = k;
        first = false;
    });
    if (first) throw invalid_input_error("empty domain");
    return ValExp::finite(best);
}

WordEnum enumerate_words(const std::vector<Mobius>& generators,
                         long long cutoff) {
    for (const Mobius& g : generators) g.validate();
    WordEnum out;
    out.words.push_back(Mobius{1, 0, 0, 1});
    out.lengths.push_back(0);
    std::set<std::array<Rational, 4>> seen;
    seen.insert(out.words[0].projective_key());

    // letters: 2i = generator i, 2i + 1 = its inverse
    std::vector<Mobius> letters;
    for (const Mobius& g : generators) {
        letters.push_back(g);
        letters.push_back(g.inverse());
    }
    struct Node {
        Mobius mat;
        int last;
    };
    std::vector<Node> frontier{{out.words[0], -1}};
    for (long long len = 1; len <= cutoff; ++len) {
        std::vector<Node> next;
        for (const Node& node : frontier)
            for (std::size_t l = 0; l < letters.size(); ++l) {
                if (node.last >= 0 &&
                    (std::size_t(node.last) ^ 1u) == l)
                    continue; // immediate backtracking
                Node child{node.mat * letters[l], int(l)};
                if (!seen.insert(child.mat.projective_key()).second)
                    out.free_violation = true;
                out.words.push_back(child.mat);
                out.lengths.push_back(len);
                next.push_back(child);
            }
        frontier = std::move(next);
    }
    return out;
}

void SchottkyData::validate() const {
    params.validate();
    if (generators.empty())
        throw invalid_input_error("at least one generator required");
    for (const Mobius& g : generators)
        if (!is_hyperbolic(g, params))
            throw invalid_input_error("generators must be hyperbolic");
    cover.abstract.validate();
    graph.validate(cover.abstract.size());
    if (cutoff < 0) throw invalid_input_error("negative word cutoff");
}

bool SchottkyData::fundamental_domain_ok() const {
    const FieldParams& fp = params;
    long long depth = cover.geometry.structural_depth();
    for (const HoledDisc& member : cover.geometry.members)
        for (const Rational& x : member_cells(member, depth, fp))
            for (const Mobius& g : generators)
                for (const Mobius& image : {g, g.inverse()}) {
                    Rational y;
                    try {
                        y = image.apply(x);
                    } catch (const pole_in_domain_error&) {
                        continue; // maps to infinity: outside
                    }
                    for (const HoledDisc& m : cover.geometry.members)
                        if (m.contains_point(y, fp)) return false;
                }
    return true;
}

TailSum weight_sum(const SchottkyData& data, std::size_t u, const Rational& s) {
    if (s <= 1) throw invalid_input_error("weight exponent must exceed 1");
    data.validate();
    const FieldParams& fp = data.params;
    const HoledDisc& U = data.cover.geometry.members.at(u);
    WordEnum words = enumerate_words(data.generators, data.cutoff);
    TailSum out;
    out.value = Scalar::zero();
    out.free_violation = words.free_violation;
    TailEstimator tail;
    double logp = std::log(fp.p.convert_to<double>());
    for (std::size_t w = 0; w < words.words.size(); ++w) {
        ValExp kmax = derivative_max_exp(words.words[w], U, fp);
        long long j = std::max<long long>(0, -kmax.k);
        // max|w'| * m^{-s} = p^{-kmax/e} * p^{-j s/e}
        Scalar term = dist_pow(kmax, 1, fp) *
                      dist_pow(ValExp::finite(j), s, fp);
        out.value += term;
        tail.add(words.lengths[w], term.approx, data.cutoff, logp);
    }
    out.tail_bound = tail.bound(data.generators.size(), fp);
    return out;
}

InvariantDegree invariant_degree(const SchottkyData& data,
                                 const Rational& alpha, const Rational& s,
                                 std::size_t u) {
    data.validate();
    if (u >= data.cover.abstract.size())
        throw invalid_input_error("member index out of range");
    InvariantDegree out;
    out.member = u;
    out.cutoff = data.cutoff;
    out.value = Scalar::zero();
    for (std::size_t v = 0; v < data.cover.abstract.size(); ++v) {
        if (v == u || data.graph.a[u][v] == 0) continue;
        Scalar weight = Scalar(data.graph.a[u][v]) *
                        dist_pow(data.cover.abstract.dist[u][v], alpha,
                                 data.params);
        TailSum wv = member_weight(data, v, s);
        out.value += weight * wv.value;
        out.tail_bound += weight.approx * wv.tail_bound;
    }
    return out;
}

AbstractCovering tate_abstract(const FieldParams& fp, long long n) {
    fp.validate();
    if (n < 2)
        throw invalid_input_error(
            "need n >= 2 for a simple cycle reduction graph");
    AbstractCovering a;
    a.params = fp;
    Rational unit = 1 - rat_pow(fp.p, -fp.f);
    for (long long i = 0; i <= n; ++i) {
        a.labels.push_back("U" + std::to_string(i));
        a.measures.push_back(rat_pow(fp.p, -i * fp.f) * unit);
    }
    a.dist.assign(n + 1, std::vector<ValExp>(n + 1, ValExp::infinity()));
    for (long long i = 0; i <= n; ++i)
        for (long long j = 0; j <= n; ++j)
            if (i != j) a.dist[i][j] = ValExp::finite(std::min(i, j));
    a.validate();
    return a;
}

namespace {

UMatrix cycle_graph(std::size_t n) {
    UMatrix A;
    A.a.assign(n, std::vector<Rational>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        A.a[i][(i + 1) % n] = 1;
        A.a[(i + 1) % n][i] = 1;
    }
    return A;
}

} // namespace

Scalar tate_degree(const FieldParams& fp, long long n, const Rational& alpha,
                   const Rational& s, long long i, bool s_infinite) {
    if (i < 0 || i > n) throw invalid_input_error("sphere index out of range");
    if (!s_infinite && s <= 1)
        throw invalid_input_error("weight exponent must exceed 1");
    KernelSpec spec{tate_abstract(fp, n), cycle_graph(n + 1), alpha};
    Scalar c = degree(spec, std::size_t(i));
    // S_q(s) with |q| = p^{-(n+1)/e}
    Scalar q = dist_pow(ValExp::finite(n + 1), 1, fp);
    Scalar S = scalar_inv(Scalar(Rational(1)) - q);
    if (!s_infinite) {
        Scalar qs = dist_pow(ValExp::finite(n + 1), s - 1, fp);
        S += qs * scalar_inv(Scalar(Rational(1)) - qs);
    }
    return c * S;
}

SchottkyData make_tate(const FieldParams& fp, long long n, long long cutoff) {
    fp.validate();
    if (!fp.qp_mode())
        throw unsupported_mode_error(
            "the geometric genus-1 construction requires Q_p mode");
    if (n < 2)
        throw invalid_input_error(
            "need n >= 2 for a simple cycle reduction graph");
    SchottkyData d;
    d.params = fp;
    d.generators = {Mobius{rat_pow(fp.p, n + 1), 0, 0, 1}};
    HoledDisc X{Ball{0, 0}, {Ball{0, n + 1}}};
    d.cover = compile(verticial_cover(build_reduction_tree(X, fp)));
    d.graph = cycle_graph(n + 1);
    d.cutoff = cutoff;
    return d;
}

InvariantSpectrum invariant_spectrum(const SchottkyData& data,
                                     const Rational& alpha,
                                     const Rational& s) {
    data.validate();
    std::size_t n = data.cover.abstract.size();
    InvariantSpectrum out;
    KernelSpec spec{data.cover.abstract, data.graph, alpha};
    out.graph_eigenvalues = adjacency_laplacian_spectrum(spec);

    std::vector<TailSum> W(n);
    for (std::size_t v = 0; v < n; ++v) W[v] = member_weight(data, v, s);
    for (std::size_t u = 0; u < n; ++u) {
        InvariantDegree d;
        d.member = u;
        d.cutoff = data.cutoff;
        d.value = Scalar::zero();
        for (std::size_t v = 0; v < n; ++v) {
            if (v == u || data.graph.a[u][v] == 0) continue;
            Scalar weight =
                Scalar(data.graph.a[u][v]) *
                dist_pow(data.cover.abstract.dist[u][v], alpha, data.params);
            d.value += weight * W[v].value;
            d.tail_bound += weight.approx * W[v].tail_bound;
        }
        d.value = -d.value; // eigenvalue is minus the degree
        out.wavelet.push_back(std::move(d));
    }

    double gap = std::numeric_limits<double>::infinity();
    for (double l : out.graph_eigenvalues)
        if (std::abs(l) > 1e-9 && std::abs(l) < gap) {
            gap = std::abs(l);
            out.gap_kind = "laplacian";
        }
    for (const InvariantDegree& d : out.wavelet)
        if (std::abs(d.value.approx) > 1e-9 &&
            std::abs(d.value.approx) < gap) {
            gap = std::abs(d.value.approx);
            out.gap_kind = "wavelet";
        }
    out.spectral_gap = std::isfinite(gap) ? gap : 0.0;

    // residual of the truncated group-summed generator on the graph
    // eigenvectors; recorded, not asserted (the group weighting and the
    // plain adjacency weighting need not share eigenvectors)
    Eigen::MatrixXd MG = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v) {
            if (v == u || data.graph.a[u][v] == 0) continue;
            double w = data.graph.a[u][v].convert_to<double>() *
                       dist_pow(data.cover.abstract.dist[u][v], alpha,
                                data.params)
                           .approx *
                       W[v].value.approx;
            MG(u, v) = w;
            MG(u, u) -= w;
        }
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v) {
            if (v == u || data.graph.a[u][v] == 0) continue;
            double w = data.graph.a[u][v].convert_to<double>() *
                       dist_pow(data.cover.abstract.dist[u][v], alpha,
                                data.params)
                           .approx;
            L(u, v) = w;
            L(u, u) -= w;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        Eigen::VectorXd w = es.eigenvectors().col(k);
        out.generator_residual =
            std::max(out.generator_residual,
                     (MG * w - es.eigenvalues()[k] * w).norm());
    }
    return out;
}

std::vector<GapRow> gap_scan(const FieldParams& fp, long long n_from,
                             long long n_to, const Rational& alpha,
                             const Rational& s) {
    if (n_from < 2 || n_to < n_from)
        throw invalid_input_error("bad scan range");
    std::vector<GapRow> rows;
    for (long long n = n_from; n <= n_to; ++n) {
        KernelSpec spec{tate_abstract(fp, n), cycle_graph(n + 1), alpha};
        GapRow row;
        row.n = n;
        row.gap = std::numeric_limits<double>::infinity();
        for (double l : adjacency_laplacian_spectrum(spec))
            if (std::abs(l) > 1e-9 && std::abs(l) < row.gap) {
                row.gap = std::abs(l);
                row.kind = "laplacian";
            }
        for (long long i = 0; i <= n; ++i) {
            double d = tate_degree(fp, n, alpha, s, i).approx;
            if (std::abs(d) > 1e-9 && std::abs(d) < row.gap) {
                row.gap = std::abs(d);
                row.kind = "wavelet";
            }
        }
        row.min_measure =
            rat_pow(fp.p, -n * fp.f) * (1 - rat_pow(fp.p, -fp.f));
        rows.push_back(std::move(row));
    }
    return rows;
}

TailSum invariant_wavelet_norm(const SchottkyData& data, std::size_t u,
                               const Rational& s) {
    data.validate();
    TailSum W = member_weight(data, u, s);
    Rational mu = data.cover.abstract.measures.at(u);
    double mud = mu.convert_to<double>();
    TailSum out;
    out.free_violation = W.free_violation;
    out.value = Scalar(std::sqrt(W.value.approx / mud));
    if (W.value.exact) {
        Rational sq = *W.value.exact / mu;
        if (sq == 1) out.value = Scalar(Rational(1));
    }
    out.tail_bound = W.tail_bound / mud;
    return out;
}

double degree_upper_bound(const SchottkyData& data, const Rational& alpha,
                          const Rational& s, std::size_t u) {
    if (s <= 1) throw invalid_input_error("weight exponent must exceed 1");
    data.validate();
    const FieldParams& fp = data.params;
    double deg_g = 0;
    double worst = 0;
    for (std::size_t v = 0; v < data.cover.abstract.size(); ++v) {
        if (v == u || data.graph.a[u][v] == 0) continue;
        deg_g += 1.0;
        double t = data.cover.abstract.measures[v].convert_to<double>() *
                   dist_pow(data.cover.abstract.dist[u][v], alpha, fp).approx;
        worst = std::max(worst, t);
    }
    if (deg_g == 0) return 0.0;

    // lambda from the observed word-weight exponents on the neighbors
    double logp = std::log(fp.p.convert_to<double>());
    std::vector<double> exps;
    WordEnum words = enumerate_words(data.generators, data.cutoff);
    for (std::size_t v = 0; v < data.cover.abstract.size(); ++v) {
        if (v == u || data.graph.a[u][v] == 0) continue;
        const HoledDisc& V = data.cover.geometry.members[v];
        for (std::size_t w = 0; w < words.words.size(); ++w) {
            ValExp kmax = derivative_max_exp(words.words[w], V, fp);
            long long j = std::max<long long>(0, -kmax.k);
            double term = dist_pow(kmax, 1, fp).approx *
                          dist_pow(ValExp::finite(j), s, fp).approx;
            if (term > 0) exps.push_back(-std::log(term) / logp);
        }
    }
    std::sort(exps.begin(), exps.end());
    std::vector<double> distinct;
    for (double e : exps)
        if (distinct.empty() || e - distinct.back() > 1e-9)
            distinct.push_back(e);
    double lambda = 1.0;
    if (distinct.size() >= 3) {
        lambda = 1e300;
        for (std::size_t i = 1; i < distinct.size(); ++i)
            lambda = std::min(lambda, distinct[i] - distinct[i - 1]);
    }
    double pd = fp.p.convert_to<double>();
    double sd = s.convert_to<double>();
    double x = std::pow(pd, -lambda / double(fp.e));
    double y = std::pow(pd, -lambda * (sd - 1.0) / double(fp.e));
    double C = 1.0 / (1.0 - x) + y / (1.0 - y);
    return deg_g * worst * C;
}

} // namespace piheat
