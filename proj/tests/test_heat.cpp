#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "piheat/heat.hpp"

using namespace piheat;

namespace {

CompiledCovering two_coset_cover(long long p) {
    FieldParams fp{p, 1, 1};
    return compile(GeometricCovering{
        fp, {HoledDisc{Ball{0, 1}, {}}, HoledDisc{Ball{1, 1}, {}}}});
}

CompiledCovering tate_cover(long long p, long long n) {
    FieldParams fp{p, 1, 1};
    HoledDisc X{Ball{0, 0}, {Ball{0, n + 1}}};
    return compile(verticial_cover(build_reduction_tree(X, fp)));
}

UMatrix full_coupling(std::size_t n) {
    UMatrix A;
    A.a.assign(n, std::vector<Rational>(n, 1));
    for (std::size_t i = 0; i < n; ++i) A.a[i][i] = 0;
    return A;
}

UMatrix cycle_coupling(std::size_t n) {
    UMatrix A;
    A.a.assign(n, std::vector<Rational>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        A.a[i][(i + 1) % n] = 1;
        A.a[(i + 1) % n][i] = 1;
    }
    return A;
}

HeatProblem coset_problem(double epsilon, std::vector<double> times) {
    CompiledCovering cc = two_coset_cover(2);
    HeatProblem p;
    p.spec = KernelSpec{cc.abstract, full_coupling(2), 0};
    p.epsilon = epsilon;
    p.times = std::move(times);
    p.depth = 3;
    for (const Cell& c : discretize(cc.geometry, 3))
        p.cell_member.push_back(c.member);
    // unit total mass concentrated on member 0
    p.h0.assign(p.cell_member.size(), 0.0);
    for (std::size_t i = 0; i < p.cell_member.size(); ++i)
        if (p.cell_member[i] == 0) p.h0[i] = 2.0;
    return p;
}

double mass(const std::vector<double>& vals, long long p, long long depth) {
    double cellmass = std::pow(double(p), -double(depth));
    double s = 0;
    for (double v : vals) s += v * cellmass;
    return s;
}

double tv_dist(const std::vector<double>& a, const Eigen::VectorXd& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += std::abs(a[i] - b[Eigen::Index(i)]);
    return 0.5 * s;
}

} // namespace

TEST_CASE("time zero is the identity") {
    HeatProblem p = coset_problem(1.0, {0.0});
    HeatSolution s = solve(p);
    for (std::size_t i = 0; i < p.h0.size(); ++i)
        CHECK(s.values[0][i] == doctest::Approx(p.h0[i]).epsilon(1e-14));
}

TEST_CASE("two-coset closed form") {
    HeatProblem p = coset_problem(1.0, {0.5, 1.0, 2.0});
    HeatSolution s = solve(p);
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        double t = s.times[k];
        CHECK(s.averages[k][0] == doctest::Approx(1 + std::exp(-t)).epsilon(1e-12));
        CHECK(s.averages[k][1] == doctest::Approx(1 - std::exp(-t)).epsilon(1e-12));
    }
}

TEST_CASE("equilibration on a connected graph") {
    CompiledCovering cc = tate_cover(2, 2);
    HeatProblem p;
    p.spec = KernelSpec{cc.abstract, cycle_coupling(3), 1};
    p.epsilon = 1.0;
    p.depth = 4;
    for (const Cell& c : discretize(cc.geometry, 4))
        p.cell_member.push_back(c.member);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 2.0);
    for (std::size_t i = 0; i < p.cell_member.size(); ++i)
        p.h0.push_back(unif(rng));
    auto pairs = laplacian_spectrum(p.spec);
    double gap = 1e9;
    for (const EigenPair& ep : pairs)
        if (ep.lambda < -1e-9) gap = std::min(gap, -ep.lambda);
    for (const WaveletEigen& w : wavelet_eigenvalues(p.spec, 4))
        gap = std::min(gap, -w.eigenvalue.approx);
    p.times = {50.0 / gap};
    HeatSolution s = solve(p);
    double muZ = 7.0 / 8.0;
    double target = mass(p.h0, 2, 4) / muZ;
    for (double v : s.values[0])
        CHECK(std::abs(v - target) < 1e-8);
}

TEST_CASE("stochasticity of the transition matrix") {
    CompiledCovering cc = two_coset_cover(2);
    KernelSpec spec{cc.abstract, full_coupling(2), 0};
    Eigen::MatrixXd P0 = transition_matrix(spec, 1.0, 0.0);
    CHECK((P0 - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-14);

    Eigen::MatrixXd P1 = transition_matrix(spec, 1.0, 1.0);
    double a = (1 + std::exp(-1.0)) / 2, b = (1 - std::exp(-1.0)) / 2;
    CHECK(P1(0, 0) == doctest::Approx(a).epsilon(1e-13));
    CHECK(P1(0, 1) == doctest::Approx(b).epsilon(1e-13));
    CHECK(P1(1, 0) == doctest::Approx(b).epsilon(1e-13));
    CHECK(P1(1, 1) == doctest::Approx(a).epsilon(1e-13));

    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> tdist(0.0, 10.0);
    std::uniform_int_distribution<int> coin(0, 3);
    for (int it = 0; it < 10; ++it) {
        CompiledCovering t3 = tate_cover(3, 2);
        UMatrix A;
        A.a.assign(3, std::vector<Rational>(3, 0));
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                A.a[i][j] = A.a[j][i] = coin(rng);
        KernelSpec sp{t3.abstract, A, Rational(it % 3)};
        for (int k = 0; k < 10; ++k) {
            StochasticityReport r = stochasticity_check(sp, 0.7, tdist(rng));
            CHECK(r.pass);
        }
    }
}

TEST_CASE("semigroup law, mass, positivity, continuity") {
    CompiledCovering cc = tate_cover(2, 2);
    KernelSpec spec{cc.abstract, cycle_coupling(3), 1};
    for (double t : {0.3, 1.0}) {
        for (double s : {0.5, 2.0}) {
            Eigen::MatrixXd lhs = transition_matrix(spec, 1.0, t + s);
            Eigen::MatrixXd rhs = transition_matrix(spec, 1.0, t) *
                                  transition_matrix(spec, 1.0, s);
            CHECK((lhs - rhs).norm() < 1e-10);
        }
    }

    HeatProblem p;
    p.spec = spec;
    p.epsilon = 0.8;
    p.depth = 4;
    for (const Cell& c : discretize(cc.geometry, 4))
        p.cell_member.push_back(c.member);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < p.cell_member.size(); ++i)
        p.h0.push_back(unif(rng));
    p.times = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
    HeatSolution s = solve(p);
    double m0 = mass(p.h0, 2, 4);
    double prev_dev = 1e300;
    for (std::size_t k = s.times.size(); k-- > 0;) {
        CHECK(std::abs(mass(s.values[k], 2, 4) - m0) < 1e-12);
        double dev = 0;
        for (std::size_t i = 0; i < p.h0.size(); ++i) {
            CHECK(s.values[k][i] > -1e-12); // positivity
            dev = std::max(dev, std::abs(s.values[k][i] - p.h0[i]));
        }
        CHECK(dev < prev_dev); // strong continuity, monotone toward t = 0
        prev_dev = dev;
    }
}

TEST_CASE("jump process without coupling never moves") {
    CompiledCovering cc = two_coset_cover(2);
    UMatrix zero;
    zero.a.assign(2, std::vector<Rational>(2, 0));
    KernelSpec spec{cc.abstract, zero, 0};
    std::vector<double> freq = simulate(spec, 1.0, 5.0, 1000, 42, 1);
    CHECK(freq[0] == 0.0);
    CHECK(freq[1] == 1.0);
}

TEST_CASE("Monte-Carlo matches the analytic semigroup") {
    CompiledCovering cc = two_coset_cover(2);
    KernelSpec spec{cc.abstract, full_coupling(2), 0};
    Eigen::MatrixXd P = transition_matrix(spec, 1.0, 1.0);
    std::vector<double> freq = simulate(spec, 1.0, 1.0, 100000, 7, 0);
    CHECK(tv_dist(freq, P.row(0).transpose()) < 0.01);

    CompiledCovering t3 = tate_cover(2, 2);
    KernelSpec spec3{t3.abstract, cycle_coupling(3), 1};
    Eigen::MatrixXd P3 = transition_matrix(spec3, 1.0, 2.0);
    std::vector<double> f3 = simulate(spec3, 1.0, 2.0, 100000, 7, 0);
    CHECK(tv_dist(f3, P3.row(0).transpose()) < 0.01);

    // determinism per (seed, path)
    std::vector<double> again = simulate(spec3, 1.0, 2.0, 100000, 7, 0);
    CHECK(f3 == again);
    std::vector<double> other = simulate(spec3, 1.0, 2.0, 100000, 8, 0);
    CHECK(f3 != other);
}

TEST_CASE("convolution kernel") {
    CompiledCovering cc = two_coset_cover(2);
    UMatrix A = full_coupling(2);

    ConvolutionKernel dirac = convolution_kernel(cc, A, 0, 1.0, 0.0, 3);
    double pm = 8.0;
    for (std::size_t i = 0; i < dirac.values.size(); ++i) {
        double expect = dirac.cell_centers[i] == 0 ? pm : 0.0;
        CHECK(dirac.values[i] == doctest::Approx(expect).epsilon(1e-12));
    }

    ConvolutionKernel K = convolution_kernel(cc, A, 0, 1.0, 1.0, 3);
    double total = 0;
    for (double v : K.values) total += v / pm;
    CHECK(std::abs(total - 1.0) < 1e-12); // unit mass

    // convolving the kernel with h0 reproduces the solver
    HeatProblem p = coset_problem(1.0, {1.0});
    HeatSolution s = solve(p);
    std::vector<Cell> cells = discretize(cc.geometry, 3);
    const FieldParams& fp = cc.geometry.params;
    std::map<Rational, std::size_t> index;
    for (std::size_t i = 0; i < cells.size(); ++i)
        index[canonical_mod(cells[i].center, 3, fp)] = i;
    for (std::size_t x = 0; x < cells.size(); ++x) {
        double conv = 0;
        for (std::size_t y = 0; y < cells.size(); ++y) {
            Rational diff =
                canonical_mod(cells[x].center - cells[y].center, 3, fp);
            conv += K.values[index.at(diff)] * p.h0[y] / pm;
        }
        CHECK(conv == doctest::Approx(s.values[0][x]).epsilon(1e-10));
    }

    // a covering with unequal radii has no convolution form
    CompiledCovering t3 = tate_cover(2, 2);
    CHECK_THROWS_AS(
        convolution_kernel(t3, cycle_coupling(3), 1, 1.0, 1.0, 4),
        unsupported_mode_error);

    // three cosets coupled asymmetrically: density not translation
    // invariant
    FieldParams f3{3, 1, 1};
    CompiledCovering cos3 = compile(GeometricCovering{
        f3, {HoledDisc{Ball{0, 1}, {}}, HoledDisc{Ball{1, 1}, {}},
             HoledDisc{Ball{2, 1}, {}}}});
    UMatrix path;
    path.a.assign(3, std::vector<Rational>(3, 0));
    path.a[0][1] = path.a[1][0] = 1;
    CHECK_THROWS_AS(convolution_kernel(cos3, path, 0, 1.0, 1.0, 2),
                    unsupported_mode_error);
}
