#include "interlace/densities.h"
#include "interlace/error.h"
#include "interlace/simulate.h"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace interlace::simulate {

OrderedPoint sample_gue_spectrum(int n, TimeParam t, rng::PathRng& rng) {
    if (n < 1) throw DomainError("sample_gue_spectrum: n must be >= 1");
    const double scale = t.sqrt();
    if (n == 1) return OrderedPoint{scale * rng.normal()};

    Eigen::VectorXd diag(n), sub(n - 1);
    for (int i = 0; i < n; ++i) diag(i) = rng.normal();
    // Off-diagonals chi_{2k}/sqrt(2) for k = n-1, ..., 1, i.e. sqrt(Gamma(k, 1)).
    for (int i = 0; i < n - 1; ++i) sub(i) = std::sqrt(rng.gamma(static_cast<double>(n - 1 - i)));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("sample_gue_spectrum: tridiagonal eigensolver did not converge");
    }
    std::vector<double> values(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    for (auto& v : values) v *= scale;
    std::sort(values.begin(), values.end());
    return OrderedPoint(std::move(values));
}

std::vector<double> sample_lambda_row(std::span<const double> x, rng::PathRng& rng,
                                      std::size_t* proposals) {
    if (x.empty()) throw DomainError("sample_lambda_row: empty row");
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i - 1] < x[i])) throw DomainError("sample_lambda_row: row is not strictly increasing");
    }
    const std::size_t n = x.size() - 1;
    std::vector<double> y(n);
    // sup of h_n over the box: each gap y_j - y_i is at most x_{j+1} - x_i.
    double bound = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) bound *= x[j + 1] - x[i];

    std::size_t count = 0;
    while (true) {
        ++count;
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + (x[i + 1] - x[i]) * (1.0 - rng.uniform());
        if (n <= 1) break;
        if (rng.uniform() * bound <= densities::vandermonde_h(y)) break;
        if (count > 100000000) throw NumericalError("sample_lambda_row: rejection sampler stalled");
    }
    if (proposals) *proposals = count;
    return y;
}

GTPattern sample_gt_pattern(const OrderedPoint& top, rng::PathRng& rng) {
    if (top.empty()) throw DomainError("sample_gt_pattern: empty top row");
    if (!top.strictly_increasing()) throw DomainError("sample_gt_pattern: top row must be strictly increasing");
    const std::size_t n = top.size();
    std::vector<std::vector<double>> rows(n);
    rows[n - 1] = top.vector();
    for (std::size_t k = n - 1; k >= 1; --k) rows[k - 1] = sample_lambda_row(rows[k], rng);
    return GTPattern(std::move(rows));
}

double sup_functional(std::span<const double> increments, std::size_t n) {
    if (n == 0) throw DomainError("sup_functional: n must be >= 1");
    if (increments.size() % n != 0) throw DomainError("sup_functional: increments not a multiple of n");
    const std::size_t steps = increments.size() / n;
    // level[k] = M_k(s) = max_{u <= s}(M_{k-1}(u) - B_k(u)) + B_k(s); best[k] is the running max.
    std::vector<double> position(n, 0.0), best(n, 0.0), level(n, 0.0);
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t k = 0; k < n; ++k) position[k] += increments[s * n + k];
        level[0] = position[0];
        for (std::size_t k = 1; k < n; ++k) {
            best[k] = std::max(best[k], level[k - 1] - position[k]);
            level[k] = best[k] + position[k];
        }
    }
    return level[n - 1];
}

double sup_functional_bridge(std::span<const double> increments, std::size_t n, double dt,
                             rng::PathRng& rng) {
    if (n == 0) throw DomainError("sup_functional_bridge: n must be >= 1");
    if (increments.size() % n != 0) throw DomainError("sup_functional_bridge: increments not a multiple of n");
    if (!(dt > 0.0)) throw DomainError("sup_functional_bridge: dt must be > 0");
    const std::size_t steps = increments.size() / n;
    const double var = 2.0 * dt;
    std::vector<double> position(n, 0.0), best(n, 0.0), level(n, 0.0), gap_start(n, 0.0);
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t k = 1; k < n; ++k) gap_start[k] = level[k - 1] - position[k];
        for (std::size_t k = 0; k < n; ++k) position[k] += increments[s * n + k];
        level[0] = position[0];
        for (std::size_t k = 1; k < n; ++k) {
            const double a = gap_start[k], b = level[k - 1] - position[k];
            double m = std::max(a, b);
            // P(bridge max > best) = exp(-2 (best - a)(best - b) / var); skip when negligible.
            const double da = best[k] - a, db = best[k] - b;
            if (!(da > 0.0 && db > 0.0 && 2.0 * da * db > 40.0 * var)) {
                const double d = b - a;
                m = 0.5 * (a + b + std::sqrt(d * d - 2.0 * var * std::log(rng.uniform())));
            }
            best[k] = std::max(best[k], m);
            level[k] = best[k] + position[k];
        }
    }
    return level[n - 1];
}

} // namespace interlace::simulate
