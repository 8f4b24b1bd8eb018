#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace interlace {

// Variance parameter of the Gaussian kernel. Construction validates t > 0.
class TimeParam {
public:
    TimeParam(double t); // NOLINT(google-explicit-constructor): ergonomic at call sites
    double value() const { return t_; }
    double sqrt() const;
    operator double() const { return t_; } // NOLINT

private:
    double t_;
};

// A point of the Weyl chamber: a weakly increasing real vector of length >= 1
// (length 0 is allowed only where a level is empty, e.g. y at n = 0).
class OrderedPoint {
public:
    OrderedPoint() = default;
    OrderedPoint(std::initializer_list<double> values);
    explicit OrderedPoint(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }
    const std::vector<double>& vector() const { return values_; }
    bool strictly_increasing() const;

private:
    std::vector<double> values_;
};

// (x, y) with x of length n+1, y of length n, x_1 <= y_1 <= x_2 <= ... <= y_n <= x_{n+1}.
struct InterlacedPoint {
    InterlacedPoint(OrderedPoint x, OrderedPoint y);

    std::size_t level() const { return y.size(); }
    // Flattened as (x_1, ..., x_{n+1}, y_1, ..., y_n).
    std::vector<double> flat() const;
    static InterlacedPoint from_flat(std::span<const double> w, std::size_t n);

    OrderedPoint x;
    OrderedPoint y;
};

// y lies in the interlacing box W^n(x): x_i <= y_i <= x_{i+1}.
bool interlaces(std::span<const double> x, std::span<const double> y);

// Triangular array of rows x^1, ..., x^n with row k of length k. Shapes are
// validated at construction; interlacing between rows is queried separately
// because densities must evaluate to zero off the cone rather than throw.
class GTPattern {
public:
    explicit GTPattern(std::vector<std::vector<double>> rows);

    std::size_t depth() const { return rows_.size(); }
    std::span<const double> row(std::size_t k) const { return rows_.at(k - 1); }
    std::span<const double> top() const { return rows_.back(); }
    bool in_cone() const;
    std::vector<double> flat() const;
    static GTPattern from_flat(std::span<const double> flat, std::size_t n);

private:
    std::vector<std::vector<double>> rows_;
};

} // namespace interlace
