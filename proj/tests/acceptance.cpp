// Acceptance harness: one pass/fail line per criterion. Takes the CLI
// binary path as argv[1] for the command-line criteria.
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "piheat/heat.hpp"
#include "piheat/mumford.hpp"

using namespace piheat;
using clock_t_ = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& what) {
    std::printf("criterion %d: %s — %s\n", n, ok ? "PASS" : "FAIL",
                what.c_str());
    if (!ok) ++failures;
}

double seconds_since(clock_t_::time_point t0) {
    return std::chrono::duration<double>(clock_t_::now() - t0).count();
}

std::string run_cli(const std::string& cli, const std::string& args) {
    std::string cmd = cli + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return "";
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0)
        out.append(buf.data(), n);
    pclose(pipe);
    return out;
}

CompiledCovering exa_cover() {
    FieldParams fp{2, 1, 1};
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

UMatrix random_coupling(std::size_t n, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> num(0, 3);
    UMatrix A;
    A.a.assign(n, std::vector<Rational>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            A.a[i][j] = A.a[j][i] = Rational(num(rng), 1 + num(rng) % 3);
    return A;
}

/// Random verticial covering of Z_p minus up to two holes, at most 6
/// members with points.
CompiledCovering random_cover(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick_p(0, 1);
    std::uniform_int_distribution<int> nholes(0, 2);
    for (;;) {
        long long p = pick_p(rng) ? 2 : 3;
        FieldParams fp{p, 1, 1};
        HoledDisc X{Ball{0, 0}, {}};
        int h = nholes(rng);
        std::uniform_int_distribution<long long> exp(1, 3);
        std::uniform_int_distribution<long long> cen(0, 26);
        for (int i = 0; i < h; ++i) X.holes.push_back(Ball{cen(rng), exp(rng)});
        try {
            X.validate(fp, true);
            CompiledCovering cc =
                compile(verticial_cover(build_reduction_tree(X, fp)));
            if (cc.abstract.size() >= 2 && cc.abstract.size() <= 6) return cc;
        } catch (const error&) {
        }
    }
}

Rational dist_pow_exact(const Rational& x, const Rational& y, long long alpha,
                        const FieldParams& fp) {
    Rational d = x - y;
    if (d == 0) throw invalid_input_error("coincident cells");
    return rat_pow(fp.p, -alpha * rational_vp(fp.p, d));
}

void criterion1(const std::string& cli) {
    auto t0 = clock_t_::now();
    bool ok = true;
    struct Row { long long p; std::array<const char*, 3> deg; };
    std::vector<Row> table = {
        {2, {"3/7", "9/14", "5/7"}},
        {3, {"4/13", "28/39", "10/13"}},
        {5, {"6/31", "126/155", "26/31"}},
    };
    for (const Row& row : table) {
        std::string out = run_cli(cli, "tate --p " + std::to_string(row.p) +
                                           " --n 2 --alpha 1 --s 64");
        for (int i = 0; i < 3; ++i) {
            std::string want =
                "U_" + std::to_string(i) + "," + row.deg[i] + ",";
            if (out.find(want) == std::string::npos) ok = false;
        }
        // cycle Laplacian eigenvalues -3, -(p+2)/p, 0
        CompiledCovering cc = tate_cover(row.p, 2);
        KernelSpec spec{cc.abstract, full_coupling(3), 1};
        std::vector<double> ev = adjacency_laplacian_spectrum(spec);
        double mid = -double(row.p + 2) / double(row.p);
        if (ev.size() != 3 || std::abs(ev[0] + 3.0) > 1e-10 ||
            std::abs(ev[1] - mid) > 1e-10 || std::abs(ev[2]) > 1e-10)
            ok = false;
    }
    double dt = seconds_since(t0);
    if (dt >= 1.0) ok = false;
    report(1, ok, "degree table and cycle eigenvalues exact (" +
                      std::to_string(dt) + " s)");
}

void criterion2() {
    auto t0 = clock_t_::now();
    bool ok = true;
    FieldParams fp{2, 1, 1};
    SchottkyData d = make_tate(fp, 2, 20);
    for (std::size_t i = 0; i < 3; ++i) {
        InvariantDegree got = invariant_degree(d, 1, 3, i);
        Scalar want = tate_degree(fp, 2, 1, 3, (long long)i);
        if (std::abs(got.value.approx - want.approx) >
            got.tail_bound + 1e-12)
            ok = false;
        if (!(got.tail_bound < 1e-6)) ok = false;
    }
    double dt = seconds_since(t0);
    if (dt >= 5.0) ok = false;
    report(2, ok, "truncated group sums within certified tails (" +
                      std::to_string(dt) + " s)");
}

void criterion3() {
    bool ok = true;
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> num(-4, 4);
    for (CompiledCovering cc : {exa_cover(), tate_cover(2, 2)}) {
        const FieldParams& fp = cc.geometry.params;
        std::size_t nv = cc.abstract.size();
        long long depth = 6;
        std::vector<Cell> cells = discretize(cc.geometry, depth);
        Rational cellmass = rat_pow(fp.p, -depth);
        UMatrix A = full_coupling(nv);
        for (long long alpha : {0, 1, 2}) {
            KernelSpec spec{cc.abstract, A, Rational(alpha)};
            std::vector<Scalar> g;
            for (std::size_t i = 0; i < cells.size(); ++i)
                g.push_back(Scalar(Rational(num(rng), 3)));
            std::vector<std::size_t> cm;
            for (const Cell& c : cells) cm.push_back(c.member);
            std::vector<Scalar> fast =
                apply_operator(spec, cm, depth, g);
            for (std::size_t x = 0; x < cells.size(); ++x) {
                Rational acc = 0, degx = 0;
                for (std::size_t y = 0; y < cells.size(); ++y) {
                    if (cells[y].member == cells[x].member) continue;
                    Rational k =
                        A.a[cells[x].member][cells[y].member] *
                        dist_pow_exact(cells[x].center, cells[y].center,
                                       alpha, fp) *
                        cellmass;
                    acc += k * (*g[y].exact - *g[x].exact);
                    degx += k;
                }
                if (!fast[x].exact || *fast[x].exact != acc) ok = false;
                Scalar dg = degree(spec, cells[x].member);
                if (!dg.exact || *dg.exact != degx) ok = false;
            }
        }
    }
    report(3, ok, "exact agreement with depth-6 brute-force kernels");
}

void criterion4() {
    bool ok = true;
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<int> pick_alpha(0, 2);
    for (int trial = 0; trial < 20; ++trial) {
        CompiledCovering cc = random_cover(rng);
        std::size_t n = cc.abstract.size();
        UMatrix A = random_coupling(n, rng);
        KernelSpec spec{cc.abstract, A, Rational(pick_alpha(rng))};

        GeneratorMatrix M = generator(spec);
        for (std::size_t u = 0; u < n; ++u) {
            Rational row = 0;
            for (std::size_t v = 0; v < n; ++v) {
                if (!M.m[u][v].exact) ok = false;
                else row += *M.m[u][v].exact;
            }
            if (row != 0) ok = false;
        }

        Eigen::MatrixXd D = M.dense();
        Eigen::VectorXd sq(n);
        for (std::size_t u = 0; u < n; ++u)
            sq[Eigen::Index(u)] =
                std::sqrt(cc.abstract.measures[u].convert_to<double>());
        Eigen::MatrixXd S =
            sq.asDiagonal() * D * sq.cwiseInverse().asDiagonal();
        if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-14) ok = false;

        for (const EigenPair& ep : laplacian_spectrum(spec))
            if (ep.residual > 1e-10) ok = false;

        long long depth = 3;
        auto basis = assemble_basis(cc, A, spec.alpha, depth);
        double cellmass =
            rat_pow(cc.abstract.params.p, -depth).convert_to<double>();
        for (std::size_t i = 0; i < basis.size(); ++i)
            for (std::size_t j = i; j < basis.size(); ++j) {
                std::complex<double> dot = 0;
                for (std::size_t c = 0; c < basis[i].size(); ++c)
                    dot += basis[i][c] * std::conj(basis[j][c]) * cellmass;
                double want = i == j ? 1.0 : 0.0;
                if (std::abs(dot - want) > 1e-10) ok = false;
            }
        if (basis.empty()) ok = false;
    }
    report(4, ok, "eigenbasis suite on 20 random coverings");
}

void criterion5() {
    bool ok = true;
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> pick_alpha(0, 2);
    for (int trial = 0; trial < 10; ++trial) {
        CompiledCovering cc = random_cover(rng);
        std::size_t n = cc.abstract.size();
        KernelSpec spec{cc.abstract, random_coupling(n, rng),
                        Rational(pick_alpha(rng))};
        double eps = 0.5 + unif(rng);
        for (double t : {0.1, 1.0, 10.0}) {
            StochasticityReport r = stochasticity_check(spec, eps, t);
            if (!r.pass) ok = false;
            Eigen::MatrixXd lhs = transition_matrix(spec, eps, t + 1.0);
            Eigen::MatrixXd rhs = transition_matrix(spec, eps, t) *
                                  transition_matrix(spec, eps, 1.0);
            if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-10) ok = false;
        }

        HeatProblem p;
        p.spec = spec;
        p.epsilon = eps;
        p.depth = 3;
        for (const Cell& c : discretize(cc.geometry, 3))
            p.cell_member.push_back(c.member);
        for (std::size_t i = 0; i < p.cell_member.size(); ++i)
            p.h0.push_back(unif(rng));
        for (int k = 6; k >= 1; --k)
            p.times.push_back(std::pow(10.0, -k));
        p.times.push_back(1.0);
        p.times.push_back(10.0);
        HeatSolution s = solve(p);
        double cellmass =
            rat_pow(cc.abstract.params.p, -3).convert_to<double>();
        double m0 = 0;
        for (double v : p.h0) m0 += v * cellmass;
        double prev = 1e300;
        for (std::size_t k = 0; k < s.times.size(); ++k) {
            double m = 0, dev = 0;
            for (std::size_t i = 0; i < p.h0.size(); ++i) {
                m += s.values[k][i] * cellmass;
                dev = std::max(dev, std::abs(s.values[k][i] - p.h0[i]));
            }
            if (std::abs(m - m0) > 1e-12) ok = false;
            if (k < 6) { // the 10^{-k} ladder, decreasing toward t = 0
                if (k > 0 && dev < prev - 1e-15) ok = false;
                prev = dev;
            }
        }
    }
    report(5, ok, "heat semigroup suite on 10 random specs");
}

void criterion6() {
    auto t0 = clock_t_::now();
    bool ok = true;
    {
        CompiledCovering cc = exa_cover();
        KernelSpec spec{cc.abstract, full_coupling(2), 0};
        Eigen::MatrixXd P = transition_matrix(spec, 1.0, 1.0);
        std::vector<double> f = simulate(spec, 1.0, 1.0, 100000, 7, 0);
        double tv = 0;
        for (std::size_t u = 0; u < f.size(); ++u)
            tv += std::abs(f[u] - P(0, Eigen::Index(u)));
        if (tv / 2 >= 0.01) ok = false;
    }
    {
        CompiledCovering cc = tate_cover(2, 2);
        KernelSpec spec{cc.abstract, full_coupling(3), 1};
        Eigen::MatrixXd P = transition_matrix(spec, 1.0, 2.0);
        std::vector<double> f = simulate(spec, 1.0, 2.0, 100000, 7, 0);
        double tv = 0;
        for (std::size_t u = 0; u < f.size(); ++u)
            tv += std::abs(f[u] - P(0, Eigen::Index(u)));
        if (tv / 2 >= 0.01) ok = false;
    }
    double dt = seconds_since(t0);
    if (dt >= 30.0) ok = false;
    report(6, ok, "Monte-Carlo within 0.01 of the semigroup (" +
                      std::to_string(dt) + " s)");
}

void criterion7() {
    bool ok = true;
    FieldParams fp{2, 1, 1};
    std::vector<GapRow> rows = gap_scan(fp, 2, 12, 1, 10);
    if (rows.size() != 11) ok = false;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].gap < rows[i - 1].gap)) ok = false;
    if (!(rows.back().gap < 0.05)) ok = false;
    report(7, ok, "spectral gaps strictly decreasing toward zero");
}

void criterion8() {
    bool ok = true;
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 20; ++trial) {
        CompiledCovering cc = random_cover(rng);
        UMatrix A = random_coupling(cc.abstract.size(), rng);
        IsometryCheck c = dictionary_isometry_check(A, cc.abstract, 3);
        if (c.matrix_norm_sq != c.kernel_norm_sq) ok = false;
    }
    report(8, ok, "matrix and kernel norms equal exactly, 20 trials");
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <cli-binary>\n";
        return 2;
    }
    std::string cli = argv[1];
    criterion1(cli);
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
