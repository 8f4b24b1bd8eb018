#include "interlace/quadrature.h"

#include "interlace/error.h"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <queue>

namespace interlace::quadrature {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
using Gauss = boost::math::quadrature::gauss<double, 7>;

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel rule(const std::function<double(double)>& f, double a, double b) {
    const auto& xk = Kronrod::abscissa();
    const auto& wk = Kronrod::weights();
    const auto& wg = Gauss::weights();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    const double f0 = f(mid);
    double kron = wk[0] * f0;
    double gauss = wg[0] * f0;
    for (std::size_t i = 1; i < xk.size(); ++i) {
        const double dx = half * xk[i];
        const double pair = f(mid - dx) + f(mid + dx);
        kron += wk[i] * pair;
        if (i % 2 == 0) gauss += wg[i / 2] * pair;
    }
    kron *= half;
    gauss *= half;
    return {a, b, kron, std::abs(kron - gauss)};
}

} // namespace

Result integrate(const std::function<double(double)>& f, double a, double b, const Options& opts) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("quadrature bounds must be finite");
    }
    if (a == b) return {};
    if (a > b) {
        Result r = integrate(f, b, a, opts);
        r.value = -r.value;
        return r;
    }

    std::priority_queue<Panel> panels;
    Panel first = rule(f, a, b);
    double value = first.value;
    double error = first.error;
    panels.push(first);
    std::size_t evaluations = 15;

    while (error > std::max(opts.abs_tol, opts.rel_tol * std::abs(value))) {
        if (panels.size() >= opts.max_intervals) {
            return {value, error, evaluations, false};
        }
        Panel worst = panels.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(worst.a < mid && mid < worst.b)) {
            return {value, error, evaluations, false};
        }
        panels.pop();
        Panel left = rule(f, worst.a, mid);
        Panel right = rule(f, mid, worst.b);
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
    }
    // Re-sum to shed drift from the incremental updates.
    double total = 0.0, total_err = 0.0;
    while (!panels.empty()) {
        total += panels.top().value;
        total_err += panels.top().error;
        panels.pop();
    }
    return {total, total_err, evaluations, true};
}

Result integrate_nested(const std::function<double(std::span<const double>)>& f,
                        const std::vector<BoundFn>& bounds, const Options& opts) {
    const std::size_t dim = bounds.size();
    if (dim == 0) throw DomainError("nested quadrature needs at least one dimension");

    std::vector<double> z(dim, 0.0);
    double inner_error = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;

    std::function<double(std::size_t)> level = [&](std::size_t k) -> double {
        auto [lo, hi] = bounds[k](std::span<const double>(z.data(), k));
        if (!(hi > lo)) return 0.0;
        auto g = [&, k](double v) {
            z[k] = v;
            if (k + 1 == dim) {
                ++evaluations;
                return f(std::span<const double>(z.data(), dim));
            }
            return level(k + 1);
        };
        Result r = integrate(g, lo, hi, opts);
        converged = converged && r.converged;
        if (k > 0) inner_error = std::max(inner_error, r.error);
        return r.value;
    };

    auto [lo, hi] = bounds[0](std::span<const double>(z.data(), 0));
    if (!(hi > lo)) return {};
    Result r = integrate(
        [&](double v) {
            z[0] = v;
            if (dim == 1) {
                ++evaluations;
                return f(std::span<const double>(z.data(), 1));
            }
            return level(1);
        },
        lo, hi, opts);
    r.error += inner_error * (hi - lo);
    r.evaluations = evaluations;
    r.converged = r.converged && converged;
    return r;
}

Result integrate_box(const std::function<double(std::span<const double>)>& f,
                     std::span<const std::pair<double, double>> box, const Options& opts) {
    std::vector<BoundFn> bounds;
    for (const auto& side : box) {
        bounds.emplace_back([side](std::span<const double>) { return side; });
    }
    return integrate_nested(f, bounds, opts);
}

Result integrate_ordered(const std::function<double(std::span<const double>)>& f,
                         std::size_t dim, double lo, double hi, const Options& opts) {
    std::vector<BoundFn> bounds;
    for (std::size_t k = 0; k < dim; ++k) {
        bounds.emplace_back([lo, hi, k](std::span<const double> prefix) {
            return std::pair<double, double>(k == 0 ? lo : prefix[k - 1], hi);
        });
    }
    return integrate_nested(f, bounds, opts);
}

} // namespace interlace::quadrature
