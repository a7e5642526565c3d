#pragma once

#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace gtfk {

/// Bad user input: invalid parameters, unknown keys, out-of-domain coordinates.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DomainError : public InputError {
public:
    using InputError::InputError;
};

/// Base for failures of a numerical procedure on otherwise valid input.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite integrand or smear (e.g. a function growing faster than the Gaussian decays).
class EvaluationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double xbar, int iterations)
        : NumericalError(what), xbar_(xbar), iterations_(iterations) {}

    double xbar() const noexcept { return xbar_; }
    int iterations() const noexcept { return iterations_; }

private:
    double xbar_;
    int iterations_;
};

/// The imaginary-frequency branch reached phi = |omega| T / 2 >= pi - eps, where the
/// fluctuation variance diverges and the harmonic trial density no longer exists.
class BranchBreakdown : public NumericalError {
public:
    BranchBreakdown(double phi, double xbar = std::numeric_limits<double>::quiet_NaN())
        : NumericalError(format(phi, xbar)), phi_(phi), xbar_(xbar) {}

    double phi() const noexcept { return phi_; }
    double xbar() const noexcept { return xbar_; }

    BranchBreakdown at(double xbar) const { return BranchBreakdown(phi_, xbar); }

private:
    static std::string format(double phi, double xbar) {
        std::ostringstream os;
        os.precision(10);
        os << "branch breakdown: phi = " << phi << " >= pi - eps";
        if (xbar == xbar) os << " at xbar = " << xbar;
        return os.str();
    }

    double phi_;
    double xbar_;
};

}  // namespace gtfk
