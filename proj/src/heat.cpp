#include "piheat/heat.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

namespace piheat {

namespace {

Integer cell_count(const Rational& mu, long long depth, const FieldParams& fp) {
    Rational n = mu * rat_pow(fp.p, depth * fp.f);
    if (denominator(n) != 1 || n < 1)
        throw refine_depth_error("depth too small for a member's measure");
    return numerator(n);
}

} // namespace

void HeatProblem::validate() const {
    spec.validate();
    if (!(epsilon > 0))
        throw invalid_input_error("epsilon must be positive");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0)
            throw invalid_input_error("times must be non-negative");
        if (i > 0 && times[i] < times[i - 1])
            throw invalid_input_error("times must be ascending");
    }
    if (h0.size() != cell_member.size())
        throw invalid_input_error("initial data size mismatch");
    std::vector<Integer> counts(spec.cov.size(), 0);
    for (std::size_t m : cell_member) {
        if (m >= spec.cov.size())
            throw invalid_input_error("cell mapped to a nonexistent member");
        counts[m] += 1;
    }
    for (std::size_t u = 0; u < spec.cov.size(); ++u)
        if (counts[u] != cell_count(spec.cov.measures[u], depth,
                                    spec.cov.params))
            throw refine_depth_error("cell counts disagree with measures");
}

Eigen::MatrixXd transition_matrix(const KernelSpec& spec, double epsilon,
                                  double t) {
    Eigen::MatrixXd M = generator(spec).dense();
    return (t * epsilon * M).exp();
}

HeatSolution solve(const HeatProblem& p) {
    p.validate();
    std::size_t n = p.spec.cov.size();
    std::size_t nc = p.h0.size();

    std::vector<double> counts(n, 0);
    Eigen::VectorXd c0 = Eigen::VectorXd::Zero(n);
    for (std::size_t c = 0; c < nc; ++c) {
        counts[p.cell_member[c]] += 1;
        c0[Eigen::Index(p.cell_member[c])] += p.h0[c];
    }
    for (std::size_t u = 0; u < n; ++u) c0[Eigen::Index(u)] /= counts[u];

    std::vector<double> degs(n);
    for (std::size_t u = 0; u < n; ++u) degs[u] = degree(p.spec, u).approx;

    HeatSolution sol;
    sol.times = p.times;
    for (double t : p.times) {
        Eigen::VectorXd c = transition_matrix(p.spec, p.epsilon, t) * c0;
        std::vector<double> vals(nc);
        for (std::size_t i = 0; i < nc; ++i) {
            std::size_t u = p.cell_member[i];
            double residual = p.h0[i] - c0[Eigen::Index(u)];
            vals[i] = c[Eigen::Index(u)] +
                      std::exp(-t * p.epsilon * degs[u]) * residual;
        }
        sol.averages.push_back(std::move(c));
        sol.values.push_back(std::move(vals));
    }
    return sol;
}

StochasticityReport stochasticity_check(const KernelSpec& spec, double epsilon,
                                        double t) {
    if (t < 0) throw invalid_input_error("time must be non-negative");
    Eigen::MatrixXd P = transition_matrix(spec, epsilon, t);
    StochasticityReport r;
    r.min_entry = P.minCoeff();
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
        r.row_sum_error =
            std::max(r.row_sum_error, std::abs(P.row(i).sum() - 1.0));
        r.sup_norm = std::max(r.sup_norm, P.row(i).cwiseAbs().sum());
    }
    r.pass = r.row_sum_error <= 1e-12 && r.min_entry >= -1e-12 &&
             r.sup_norm <= 1.0 + 1e-12;
    return r;
}

std::vector<double> simulate(const KernelSpec& spec, double epsilon, double t,
                             std::size_t n_paths, std::uint64_t seed,
                             std::size_t start_member) {
    spec.validate();
    std::size_t n = spec.cov.size();
    if (start_member >= n)
        throw invalid_input_error("start member out of range");
    if (n_paths < 1) throw invalid_input_error("need at least one path");

    // per-member holding rates and jump laws
    std::vector<double> rate(n);
    std::vector<std::vector<double>> cdf(n);
    for (std::size_t u = 0; u < n; ++u) {
        double deg = degree(spec, u).approx;
        rate[u] = epsilon * deg;
        double acc = 0;
        for (std::size_t v = 0; v < n; ++v) {
            if (v != u && spec.A.a[u][v] != 0)
                acc += spec.A.a[u][v].convert_to<double>() *
                       dist_pow(spec.cov.dist[u][v], spec.alpha,
                                spec.cov.params)
                           .approx *
                       spec.cov.measures[v].convert_to<double>();
            cdf[u].push_back(acc);
        }
        for (double& x : cdf[u])
            if (acc > 0) x /= acc;
    }

    std::vector<std::size_t> hits(n, 0);
    for (std::size_t path = 0; path < n_paths; ++path) {
        // deterministic per (seed, path) regardless of scheduling
        std::seed_seq ss{std::uint32_t(seed), std::uint32_t(seed >> 32),
                         std::uint32_t(path), std::uint32_t(path >> 32)};
        std::mt19937_64 rng(ss);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::size_t u = start_member;
        double clock = 0;
        while (rate[u] > 0) {
            // exponential holding time via inverse transform
            double hold = -std::log1p(-unif(rng)) / rate[u];
            clock += hold;
            if (clock > t) break;
            double r = unif(rng);
            std::size_t v =
                std::size_t(std::lower_bound(cdf[u].begin(), cdf[u].end(), r) -
                            cdf[u].begin());
            if (v >= n) v = n - 1;
            u = v;
        }
        ++hits[u];
    }
    std::vector<double> freq(n);
    for (std::size_t u = 0; u < n; ++u)
        freq[u] = double(hits[u]) / double(n_paths);
    return freq;
}

ConvolutionKernel convolution_kernel(const CompiledCovering& cc,
                                     const UMatrix& A, const Rational& alpha,
                                     double epsilon, double t,
                                     long long depth) {
    const FieldParams& fp = cc.geometry.params;
    if (!fp.qp_mode())
        throw unsupported_mode_error("convolution form requires Q_p mode");
    std::size_t n = cc.geometry.members.size();
    if (n == 0) throw invalid_input_error("empty covering");

    // coset configuration: all members plain balls of one radius, whose
    // union is a ball around 0 (a group)
    long long r = cc.geometry.members[0].outer.radius_exp;
    for (const HoledDisc& m : cc.geometry.members)
        if (!m.holes.empty() || m.outer.radius_exp != r)
            throw unsupported_mode_error(
                "convolution form needs a coset covering of equal radii");
    long long k0 = r;
    Integer width = 1;
    while (width < Integer(n)) {
        width *= fp.p;
        --k0;
    }
    if (width != Integer(n))
        throw unsupported_mode_error(
            "member count is not a power of p; union is not a ball");
    Ball domain{0, k0};
    for (const HoledDisc& m : cc.geometry.members)
        if (!domain.contains_point(m.outer.center, fp))
            throw unsupported_mode_error(
                "union of members is not a ball around 0");

    if (depth < r) throw refine_depth_error("depth coarser than the cosets");
    KernelSpec spec{cc.abstract, A, alpha};
    spec.validate();
    Eigen::MatrixXd P = transition_matrix(spec, epsilon, t);
    std::vector<double> degs(n), mu(n);
    for (std::size_t u = 0; u < n; ++u) {
        degs[u] = degree(spec, u).approx;
        mu[u] = cc.abstract.measures[u].convert_to<double>();
    }

    // enumerate all cells of the domain with their member index
    std::vector<Cell> cells = discretize(cc.geometry, depth);
    std::map<Rational, std::size_t> index;
    for (std::size_t i = 0; i < cells.size(); ++i)
        index[canonical_mod(cells[i].center - 0, depth, fp)] = i;
    double pm = rat_pow(fp.p, depth).convert_to<double>();

    auto density = [&](std::size_t xi, std::size_t yi) {
        std::size_t ux = cells[xi].member;
        std::size_t uy = cells[yi].member;
        double v = P(Eigen::Index(uy), Eigen::Index(ux)) / mu[ux];
        if (ux == uy)
            v += std::exp(-t * epsilon * degs[ux]) *
                 ((xi == yi ? pm : 0.0) - 1.0 / mu[ux]);
        return v;
    };

    std::size_t zero_cell = index.at(0);
    ConvolutionKernel K;
    K.depth = depth;
    K.domain = domain;
    K.values.assign(cells.size(), 0.0);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        K.cell_centers.push_back(cells[i].center);
        K.values[i] = density(zero_cell, i);
    }
    // translation invariance: rho(x, y) must equal K(y - x) for all pairs
    for (std::size_t x = 0; x < cells.size(); ++x)
        for (std::size_t y = 0; y < cells.size(); ++y) {
            Rational diff = canonical_mod(
                cells[y].center - cells[x].center, depth, fp);
            auto it = index.find(diff);
            if (it == index.end())
                throw unsupported_mode_error(
                    "cell differences leave the domain");
            if (std::abs(density(x, y) - K.values[it->second]) > 1e-12)
                throw unsupported_mode_error(
                    "transition density is not translation invariant");
        }
    return K;
}

} // namespace piheat
