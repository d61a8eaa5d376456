#pragma once

#include <stdexcept>
#include <string>

namespace piheat {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input data (overlapping holes, non-verticial
/// covering, bad matrix shape, ...).
class invalid_input_error : public error {
public:
    using error::error;
};

/// Operation requested outside Q_p mode (e = f = 1), or on a structure
/// that does not support it (e.g. convolution on a non-coset covering).
class unsupported_mode_error : public error {
public:
    using error::error;
};

/// Discretization depth too small for the structure at hand.
class refine_depth_error : public invalid_input_error {
public:
    using invalid_input_error::invalid_input_error;
};

/// Ball of radius zero where a positive radius is required.
class degenerate_ball_error : public invalid_input_error {
public:
    using invalid_input_error::invalid_input_error;
};

/// Moebius transformation has a pole inside the requested domain.
class pole_in_domain_error : public invalid_input_error {
public:
    using invalid_input_error::invalid_input_error;
};

/// A numeric property that should hold failed beyond tolerance
/// (eigen-solver non-convergence, stochasticity violation, ...).
class numeric_error : public error {
public:
    using error::error;
};

} // namespace piheat
