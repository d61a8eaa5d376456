#include "piheat/affinoid.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace piheat {

namespace {

/// v_p(x - y) as a ValExp (in Q_p mode, exponent units of 1/e with e = 1).
ValExp point_distance_exp(const Rational& x, const Rational& y,
                          const FieldParams& fp) {
    return valuation(x - y, fp);
}

} // namespace

bool Ball::contains_point(const Rational& x, const FieldParams& fp) const {
    ValExp d = valuation(x - center, fp);
    return d.infinite || d.k >= radius_exp;
}

bool Ball::contains_ball(const Ball& b, const FieldParams& fp) const {
    return b.radius_exp >= radius_exp && contains_point(b.center, fp);
}

bool Ball::disjoint_from(const Ball& b, const FieldParams& fp) const {
    ValExp d = valuation(center - b.center, fp);
    long long outer_exp = std::min(radius_exp, b.radius_exp);
    return !d.infinite && d.k < outer_exp;
}

bool Ball::same_ball(const Ball& b, const FieldParams& fp) const {
    if (radius_exp != b.radius_exp) return false;
    return contains_point(b.center, fp);
}

std::vector<Ball> Ball::children(const FieldParams& fp) const {
    if (!fp.qp_mode())
        throw unsupported_mode_error("ball subdivision requires Q_p mode");
    std::vector<Ball> out;
    Rational step = rat_pow(fp.p, radius_exp);
    for (Integer c = 0; c < fp.p; ++c)
        out.push_back(Ball{center + Rational(c) * step, radius_exp + 1});
    return out;
}

void HoledDisc::validate(const FieldParams& fp,
                         bool require_positive_measure) const {
    for (std::size_t i = 0; i < holes.size(); ++i) {
        if (holes[i].radius_exp <= outer.radius_exp ||
            !outer.contains_ball(holes[i], fp))
            throw invalid_input_error(
                "hole is not strictly contained in the outer ball");
        for (std::size_t j = i + 1; j < holes.size(); ++j)
            if (!holes[i].disjoint_from(holes[j], fp))
                throw invalid_input_error("holes overlap");
    }
    if (require_positive_measure && measure(fp) <= 0)
        throw invalid_input_error("holed disc has no points left");
}

Rational HoledDisc::measure(const FieldParams& fp) const {
    Rational m = outer.measure(fp);
    for (const Ball& h : holes) m -= h.measure(fp);
    return m;
}

bool HoledDisc::contains_point(const Rational& x, const FieldParams& fp) const {
    if (!outer.contains_point(x, fp)) return false;
    for (const Ball& h : holes)
        if (h.contains_point(x, fp)) return false;
    return true;
}

long long HoledDisc::structural_depth() const {
    long long d = outer.radius_exp;
    for (const Ball& h : holes) d = std::max(d, h.radius_exp);
    return d;
}

Rational GeometricCovering::total_measure() const {
    Rational m = 0;
    for (const HoledDisc& u : members) m += u.measure(params);
    return m;
}

long long GeometricCovering::structural_depth() const {
    long long d = 0;
    for (const HoledDisc& u : members)
        d = std::max(d, u.structural_depth());
    return d;
}

void AbstractCovering::validate() const {
    std::size_t n = size();
    if (measures.size() != n || dist.size() != n)
        throw invalid_input_error("covering arrays have mismatched sizes");
    for (const auto& row : dist)
        if (row.size() != n)
            throw invalid_input_error("distance matrix is not square");
    for (std::size_t i = 0; i < n; ++i) {
        if (measures[i] <= 0)
            throw invalid_input_error("member measure must be positive");
        if (!dist[i][i].infinite)
            throw invalid_input_error("distance diagonal must be +infinity");
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dist[i][j] != dist[j][i])
                throw invalid_input_error("distance matrix is not symmetric");
            if (dist[i][j].infinite)
                throw invalid_input_error(
                    "distinct members must be a positive distance apart");
        }
    }
    // ultrametric triangle inequality: |U,W| <= max(|U,V|, |V,W|),
    // i.e. k_UW >= min(k_UV, k_VW) on exponents.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t l = 0; l < n; ++l) {
                if (i == j || j == l || i == l) continue;
                if (dist[i][l].k < std::min(dist[i][j].k, dist[j][l].k))
                    throw invalid_input_error(
                        "distances violate the ultrametric inequality");
            }
}

ReductionTree build_reduction_tree(const HoledDisc& X, const FieldParams& fp) {
    if (!fp.qp_mode())
        throw unsupported_mode_error("tree construction requires Q_p mode");
    X.validate(fp, false);

    long long root_level = X.outer.radius_exp;

    // Vertex balls: for every hole, all balls on the geodesic from the
    // outer ball down to one level above the hole. Deduplicate by the
    // canonical residue of the center at each level.
    using Key = std::pair<long long, Rational>;
    auto key_of = [&](const Rational& center, long long level) {
        return Key{level, canonical_mod(center - X.outer.center, level, fp)};
    };
    std::map<Key, Ball> balls;
    balls[key_of(X.outer.center, root_level)] = X.outer;
    for (const Ball& h : X.holes)
        for (long long k = root_level; k < h.radius_exp; ++k)
            balls.emplace(key_of(h.center, k), Ball{h.center, k});

    ReductionTree t;
    t.params = fp;
    std::map<Key, int> index;
    // std::map order on (level, canonical residue) gives a deterministic
    // breadth-first layout with the root first.
    for (auto& [key, ball] : balls) {
        index[key] = int(t.vertices.size());
        TreeVertex v;
        v.ball = ball;
        v.level = key.first;
        t.vertices.push_back(std::move(v));
    }

    for (std::size_t i = 0; i < t.vertices.size(); ++i) {
        TreeVertex& v = t.vertices[i];
        if (v.level == root_level) continue;
        auto it = index.find(key_of(v.ball.center, v.level - 1));
        if (it == index.end())
            throw numeric_error("reduction tree lost a geodesic vertex");
        v.parent = it->second;
        t.vertices[it->second].children.push_back(int(i));
    }

    // Members: the vertex ball minus its child balls and minus the holes
    // that end directly below it.
    for (TreeVertex& v : t.vertices) {
        v.member.outer = v.ball;
        for (int c : v.children)
            v.member.holes.push_back(t.vertices[c].ball);
    }
    for (const Ball& h : X.holes) {
        auto it = index.find(key_of(h.center, h.radius_exp - 1));
        if (it == index.end())
            throw numeric_error("hole detached from the reduction tree");
        t.vertices[it->second].member.holes.push_back(h);
    }
    return t;
}

GeometricCovering verticial_cover(const ReductionTree& t) {
    GeometricCovering cov;
    cov.params = t.params;
    for (const TreeVertex& v : t.vertices) cov.members.push_back(v.member);
    return cov;
}

std::vector<Rational> member_cells(const HoledDisc& m, long long depth,
                                   const FieldParams& fp) {
    if (!fp.qp_mode())
        throw unsupported_mode_error("discretization requires Q_p mode");
    if (depth < m.structural_depth())
        throw refine_depth_error(
            "discretization depth is finer than requested cell size");
    std::vector<Rational> out;
    // Recursively subdivide the outer ball; at or below the structural
    // depth a ball is either inside a hole or disjoint from all holes.
    std::vector<Ball> stack{m.outer};
    while (!stack.empty()) {
        Ball b = stack.back();
        stack.pop_back();
        bool in_hole = false;
        for (const Ball& h : m.holes)
            if (h.contains_ball(b, fp) || h.same_ball(b, fp)) {
                in_hole = true;
                break;
            }
        if (in_hole) continue;
        bool meets_hole = false;
        for (const Ball& h : m.holes)
            if (!b.disjoint_from(h, fp)) {
                meets_hole = true;
                break;
            }
        if (b.radius_exp == depth) {
            if (meets_hole)
                throw numeric_error("cell straddles a hole boundary");
            out.push_back(b.center);
            continue;
        }
        if (!meets_hole && b.radius_exp >= m.structural_depth()) {
            // whole ball survives; expand arithmetically
            std::vector<Ball> flat{b};
            while (flat.front().radius_exp < depth) {
                std::vector<Ball> next;
                for (const Ball& x : flat)
                    for (Ball& c : x.children(fp)) next.push_back(c);
                flat = std::move(next);
            }
            for (const Ball& c : flat) out.push_back(c.center);
            continue;
        }
        for (Ball& c : b.children(fp)) stack.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Cell> discretize(const GeometricCovering& cov, long long depth) {
    if (depth < cov.structural_depth())
        throw refine_depth_error("depth below the covering's structural depth");
    std::vector<Cell> out;
    for (std::size_t i = 0; i < cov.members.size(); ++i)
        for (const Rational& c : member_cells(cov.members[i], depth, cov.params))
            out.push_back(Cell{c, depth, i});
    return out;
}

CompiledCovering compile(const GeometricCovering& cov) {
    CompiledCovering out;
    out.geometry.params = cov.params;
    for (const HoledDisc& u : cov.members) {
        u.validate(cov.params, false);
        if (u.measure(cov.params) > 0) out.geometry.members.push_back(u);
    }
    const GeometricCovering& g = out.geometry;
    std::size_t n = g.members.size();

    AbstractCovering& a = out.abstract;
    a.params = cov.params;
    for (std::size_t i = 0; i < n; ++i) {
        a.labels.push_back("U" + std::to_string(i));
        a.measures.push_back(g.members[i].measure(cov.params));
    }
    a.dist.assign(n, std::vector<ValExp>(n, ValExp::infinity()));

    long long depth = g.structural_depth();
    std::vector<std::vector<Rational>> cells(n);
    for (std::size_t i = 0; i < n; ++i)
        cells[i] = member_cells(g.members[i], depth, cov.params);

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            bool first = true;
            ValExp d;
            for (const Rational& x : cells[i])
                for (const Rational& y : cells[j]) {
                    ValExp e = point_distance_exp(x, y, cov.params);
                    // cells are radius p^{-depth}; a cross-member distance
                    // at that scale or finer would make the members meet
                    if (e.infinite || e.k >= depth)
                        throw invalid_input_error("covering members overlap");
                    if (first) {
                        d = e;
                        first = false;
                    } else if (e != d) {
                        throw invalid_input_error(
                            "covering is not verticial: pairwise distance "
                            "varies between " +
                            a.labels[i] + " and " + a.labels[j]);
                    }
                }
            if (first)
                throw invalid_input_error("covering member has no cells");
            a.dist[i][j] = a.dist[j][i] = d;
        }
    a.validate();
    return out;
}

} // namespace piheat
