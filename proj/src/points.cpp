#include "interlace/points.h"

#include "interlace/error.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace interlace {

TimeParam::TimeParam(double t) : t_(t) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw DomainError("time parameter must be finite and > 0, got " + std::to_string(t));
    }
}

double TimeParam::sqrt() const { return std::sqrt(t_); }

OrderedPoint::OrderedPoint(std::initializer_list<double> values)
    : OrderedPoint(std::vector<double>(values)) {}

OrderedPoint::OrderedPoint(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
        if (std::isnan(v)) throw DomainError("ordered point has a NaN coordinate");
    }
    if (!std::is_sorted(values_.begin(), values_.end())) {
        throw DomainError("coordinates are not weakly increasing");
    }
}

bool OrderedPoint::strictly_increasing() const {
    return std::adjacent_find(values_.begin(), values_.end(),
                              [](double a, double b) { return !(a < b); }) == values_.end();
}

bool interlaces(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() + 1) return false;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(x[i] <= y[i] && y[i] <= x[i + 1])) return false;
    }
    return true;
}

InterlacedPoint::InterlacedPoint(OrderedPoint x_, OrderedPoint y_)
    : x(std::move(x_)), y(std::move(y_)) {
    if (x.size() != y.size() + 1) {
        throw DomainError("interlaced point needs |x| = |y| + 1, got |x| = " +
                          std::to_string(x.size()) + ", |y| = " + std::to_string(y.size()));
    }
    if (!interlaces(x.values(), y.values())) {
        throw DomainError("x and y do not interlace");
    }
}

std::vector<double> InterlacedPoint::flat() const {
    std::vector<double> w(x.vector());
    w.insert(w.end(), y.vector().begin(), y.vector().end());
    return w;
}

InterlacedPoint InterlacedPoint::from_flat(std::span<const double> w, std::size_t n) {
    if (w.size() != 2 * n + 1) throw DomainError("flat interlaced point has wrong length");
    return InterlacedPoint(OrderedPoint(std::vector<double>(w.begin(), w.begin() + n + 1)),
                           OrderedPoint(std::vector<double>(w.begin() + n + 1, w.end())));
}

GTPattern::GTPattern(std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw DomainError("pattern needs at least one row");
    for (std::size_t k = 0; k < rows_.size(); ++k) {
        if (rows_[k].size() != k + 1) {
            throw DomainError("pattern row " + std::to_string(k + 1) + " has length " +
                              std::to_string(rows_[k].size()));
        }
        for (double v : rows_[k]) {
            if (std::isnan(v)) throw DomainError("pattern has a NaN coordinate");
        }
    }
}

bool GTPattern::in_cone() const {
    for (std::size_t k = 1; k < rows_.size(); ++k) {
        if (!interlaces(rows_[k], rows_[k - 1])) return false;
    }
    return true;
}

std::vector<double> GTPattern::flat() const {
    std::vector<double> out;
    for (const auto& r : rows_) out.insert(out.end(), r.begin(), r.end());
    return out;
}

GTPattern GTPattern::from_flat(std::span<const double> flat, std::size_t n) {
    if (flat.size() != n * (n + 1) / 2) throw DomainError("flat pattern has wrong length");
    std::vector<std::vector<double>> rows;
    std::size_t pos = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        rows.emplace_back(flat.begin() + pos, flat.begin() + pos + k);
        pos += k;
    }
    return GTPattern(std::move(rows));
}

} // namespace interlace
