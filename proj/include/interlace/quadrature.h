#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace interlace::quadrature {

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    std::size_t max_intervals = 2000;
};

struct Result {
    double value = 0.0;
    double error = 0.0;     // estimated absolute error
    std::size_t evaluations = 0;
    bool converged = true;
};

// Globally adaptive 7/15-point Gauss-Kronrod integration of f over [a, b]
// (finite bounds). Bisects the interval with the largest error estimate until
// error <= max(abs_tol, rel_tol * |value|) or max_intervals is reached.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& opts = {});

// Iterated integral: coordinate k ranges over bounds[k](z_1..z_{k-1}).
using BoundFn = std::function<std::pair<double, double>(std::span<const double> prefix)>;

Result integrate_nested(const std::function<double(std::span<const double>)>& f,
                        const std::vector<BoundFn>& bounds, const Options& opts = {});

Result integrate_box(const std::function<double(std::span<const double>)>& f,
                     std::span<const std::pair<double, double>> box, const Options& opts = {});

// Integral over {lo <= z_1 <= z_2 <= ... <= z_dim <= hi}.
Result integrate_ordered(const std::function<double(std::span<const double>)>& f,
                         std::size_t dim, double lo, double hi, const Options& opts = {});

} // namespace interlace::quadrature
