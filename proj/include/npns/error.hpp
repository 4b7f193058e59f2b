#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace npns {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fields defined on different grids or lists of mismatched length.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// |z*phi| exceeded the exponential guard.
class OverflowError : public Error {
public:
    OverflowError(const std::string& what, double max_exponent)
        : Error(what), max_exponent_(max_exponent) {}
    double max_exponent() const noexcept { return max_exponent_; }

private:
    double max_exponent_;
};

/// A linear or nonlinear solve failed to reach its tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual, std::vector<double> history = {})
        : Error(what), residual_(residual), history_(std::move(history)) {}
    double residual() const noexcept { return residual_; }
    const std::vector<double>& history() const noexcept { return history_; }

private:
    double residual_;
    std::vector<double> history_;
};

/// The requested time step violates a CFL bound; carries the admissible step.
class StepRejected : public Error {
public:
    StepRejected(const std::string& what, double admissible_dt)
        : Error(what), admissible_dt_(admissible_dt) {}
    double admissible_dt() const noexcept { return admissible_dt_; }

private:
    double admissible_dt_;
};

/// A concentration went below -1e-12 during a step; retry with a smaller dt.
class PositivityFailure : public Error {
public:
    PositivityFailure(const std::string& what, double min_value)
        : Error(what), min_value_(min_value) {}
    double min_value() const noexcept { return min_value_; }

private:
    double min_value_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

} // namespace npns
