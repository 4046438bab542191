#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ousc {

// Invalid argument outside an operation's mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A quadrature, root find or special-function evaluation that failed.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double residual = 0.0)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// Iterative solver that ran out of iterations.
class IterationError : public std::runtime_error {
public:
    IterationError(const std::string& what, double residual, std::vector<double> history = {})
        : std::runtime_error(what), residual_(residual), history_(std::move(history)) {}
    double residual() const { return residual_; }
    const std::vector<double>& history() const { return history_; }

private:
    double residual_;
    std::vector<double> history_;
};

// Truncated box does not contain the action/inaction structure.
class DomainTooSmall : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateGeometry : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ousc
