#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "piheat/localfield.hpp"

namespace piheat {

/// Closed ball {|x - center| <= p^{-radius_exp/e}} with rational center.
/// In the ultrametric, two balls are disjoint or nested, never partially
/// overlapping.
struct Ball {
    Rational center;
    long long radius_exp = 0;

    Rational measure(const FieldParams& fp) const {
        return ball_measure(ValExp::finite(radius_exp), fp);
    }
    bool contains_point(const Rational& x, const FieldParams& fp) const;
    bool contains_ball(const Ball& b, const FieldParams& fp) const;
    bool disjoint_from(const Ball& b, const FieldParams& fp) const;
    bool same_ball(const Ball& b, const FieldParams& fp) const;

    /// The p^f children one level down (Q_p mode: centers a + c p^k).
    std::vector<Ball> children(const FieldParams& fp) const;
};

/// A ball minus finitely many disjoint sub-balls; the K-rational point set
/// of a rational affinoid domain. An empty hole list is a plain ball.
struct HoledDisc {
    Ball outer;
    std::vector<Ball> holes;

    /// Checks hole disjointness and containment; optionally that some
    /// points remain.
    void validate(const FieldParams& fp, bool require_positive_measure) const;
    Rational measure(const FieldParams& fp) const;
    bool contains_point(const Rational& x, const FieldParams& fp) const;

    /// Smallest level at which the disc is a union of balls of that level:
    /// max of the outer level and all hole levels.
    long long structural_depth() const;
};

/// Finite subtree of the Bruhat-Tits tree spanned by the boundary data of a
/// holed disc. Every geodesic vertex is materialized, so all edges have
/// length one; vertex v carries the ball B_v and the holed-disc member
/// B_v minus its attached sub-balls.
struct TreeVertex {
    Ball ball;
    long long level = 0;
    int parent = -1; ///< index into vertices, -1 for the root
    std::vector<int> children;
    HoledDisc member;
};

struct ReductionTree {
    FieldParams params;
    std::vector<TreeVertex> vertices; ///< sorted by (level, center)
};

/// Disjoint covering of a clopen set by holed discs, one per tree vertex
/// when produced from a reduction tree. Members of measure zero (no
/// K-rational points) are retained here and dropped at compile time.
struct GeometricCovering {
    FieldParams params;
    std::vector<HoledDisc> members;

    Rational total_measure() const;
    long long structural_depth() const;
};

/// The operator-facing covering data: labels, exact measures, and the
/// constant pairwise distances as ValExp magnitudes. This is all the
/// spectral theory consumes, so coverings of ramified fields can be fed
/// in directly without point arithmetic.
struct AbstractCovering {
    FieldParams params;
    std::vector<std::string> labels;
    std::vector<Rational> measures;
    std::vector<std::vector<ValExp>> dist; ///< dist[i][i] is +infinity

    std::size_t size() const { return labels.size(); }
    void validate() const;
};

/// A depth-m cell: a ball of radius p^{-m} inside covering member `member`.
struct Cell {
    Rational center;
    long long depth = 0;
    std::size_t member = 0;
};

/// Builds the reduction tree of a holed disc (Q_p mode): one vertex for
/// every ball on a geodesic from the outer ball towards a hole, holes
/// attached as removed sub-balls one level below their geodesic end.
ReductionTree build_reduction_tree(const HoledDisc& X, const FieldParams& fp);

/// One holed disc per vertex; a disjoint covering of X's points. Members
/// with no K-rational points (possible at small p) are kept.
GeometricCovering verticial_cover(const ReductionTree& t);

/// Compiled covering plus the surviving geometry, index-aligned.
struct CompiledCovering {
    AbstractCovering abstract;
    GeometricCovering geometry; ///< empty-measure members removed
};

/// Measures and pairwise distances of a geometric covering, with the
/// distance constancy |x - y| = d(U,V) verified exactly over all cell
/// pairs at the structural depth. Labels are U0, U1, ... in member order.
CompiledCovering compile(const GeometricCovering& cov);

/// All depth-m cells of one holed disc (m >= its structural depth).
std::vector<Rational> member_cells(const HoledDisc& m, long long depth,
                                   const FieldParams& fp);

/// Depth-m cells of every member, member-major order.
std::vector<Cell> discretize(const GeometricCovering& cov, long long depth);

} // namespace piheat
