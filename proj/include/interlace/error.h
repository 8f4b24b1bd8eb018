#pragma once

#include <stdexcept>
#include <string>

namespace interlace {

// Input outside the mathematical domain of an operation (t <= 0, unordered
// points, dimension mismatch, NaN arguments).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Request beyond a configured capability (e.g. iterated-integral order).
class CapabilityError : public std::length_error {
public:
    explicit CapabilityError(const std::string& what) : std::length_error(what) {}
};

// Numerical failure: non-convergence, or a determinant more negative than
// roundoff can explain.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace interlace
