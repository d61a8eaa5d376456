#pragma once

#include <cstdint>
#include <vector>

#include "piheat/operators.hpp"

namespace piheat {

/// Initial-value problem h' = epsilon D h, h(0) = h0, posed on depth-m
/// cell data.
struct HeatProblem {
    KernelSpec spec;
    double epsilon = 1.0;
    std::vector<double> times; ///< non-negative, ascending
    long long depth = 0;
    std::vector<std::size_t> cell_member;
    std::vector<double> h0;

    void validate() const;
};

/// Solution trajectory: member averages and full cell values per time.
/// The cell values use the exact split h(t) = lift(exp(t eps M) c0)
///   + exp(-t eps deg(U)) (h0 - c0(U)) on each member U:
/// the mean-zero residual inside U is a combination of oscillations that
/// all share the eigenvalue -deg(U).
struct HeatSolution {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> averages;
    std::vector<std::vector<double>> values;
};

/// exp(t epsilon M) acting on member values; row-stochastic.
Eigen::MatrixXd transition_matrix(const KernelSpec& spec, double epsilon,
                                  double t);

HeatSolution solve(const HeatProblem& problem);

/// Positive-contraction checks on exp(t eps M).
struct StochasticityReport {
    double row_sum_error = 0; ///< max |row sum - 1|
    double min_entry = 0;
    double sup_norm = 0; ///< infinity operator norm
    bool pass = false;
};

StochasticityReport stochasticity_check(const KernelSpec& spec, double epsilon,
                                        double t);

/// Monte-Carlo jump process: holding rate epsilon deg(U), jump law
/// P(U -> V) proportional to A_{UV} d(U,V)^alpha mu(V). Returns the
/// member-occupancy frequencies at time t over n_paths paths started in
/// start_member. Path i depends only on (seed, i).
std::vector<double> simulate(const KernelSpec& spec, double epsilon, double t,
                             std::size_t n_paths, std::uint64_t seed,
                             std::size_t start_member);

/// Transition density rho_t(0, y) on depth-m cells when the covering is a
/// coset configuration (all members balls of one radius, union a ball
/// containing 0): then the solution operator is convolution with this
/// kernel.
struct ConvolutionKernel {
    long long depth = 0;
    Ball domain;                       ///< the union of the members
    std::vector<Rational> cell_centers;
    std::vector<double> values;
};

ConvolutionKernel convolution_kernel(const CompiledCovering& cc,
                                     const UMatrix& A, const Rational& alpha,
                                     double epsilon, double t,
                                     long long depth);

} // namespace piheat
