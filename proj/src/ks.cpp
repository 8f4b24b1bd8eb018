#include "interlace/error.h"
#include "interlace/kernels.h"
#include "interlace/verify.h"

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace interlace::verify {

double kolmogorov_survival(double lambda) {
    if (!(lambda > 0.0)) return 1.0;
    if (lambda < 1.18) {
        // Dual series, fast for small lambda.
        const double pi = std::numbers::pi;
        double sum = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double m = 2.0 * k - 1.0;
            sum += std::exp(-m * m * pi * pi / (8.0 * lambda * lambda));
        }
        return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * sum, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-300) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KSResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.size() < 100) throw DomainError("ks_test: need at least 100 samples");
    for (double v : samples)
        if (std::isnan(v)) throw DomainError("ks_test: NaN sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return {d, kolmogorov_survival(std::sqrt(n) * d), samples.size()};
}

ChiSquareResult chi_square(const std::vector<double>& observed, const std::vector<double>& expected) {
    if (observed.size() != expected.size() || observed.size() < 2)
        throw DomainError("chi_square: need matching observed/expected with at least 2 cells");
    ChiSquareResult r;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (!(expected[i] > 0.0)) throw DomainError("chi_square: expected counts must be > 0");
        const double d = observed[i] - expected[i];
        r.statistic += d * d / expected[i];
    }
    r.dof = static_cast<double>(observed.size() - 1);
    r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(r.dof), r.statistic));
    return r;
}

namespace {

// Probabilists' Hermite polynomials He_0..He_m at a.
std::vector<double> hermite(int m, double a) {
    std::vector<double> he(static_cast<std::size_t>(m) + 1, 1.0);
    if (m >= 1) he[1] = a;
    for (int j = 2; j <= m; ++j) he[j] = a * he[j - 1] - (j - 1) * he[j - 2];
    return he;
}

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

} // namespace

double gue_order_statistic_cdf(int n, int k, double x, TimeParam t) {
    if (n < 1 || k < 1 || k > n) throw DomainError("gue_order_statistic_cdf: need 1 <= k <= n");
    if (std::isnan(x)) throw DomainError("gue_order_statistic_cdf: NaN argument");
    if (x == -INFINITY) return 0.0;
    if (x == INFINITY) return 1.0;
    const double a = x / t.sqrt();
    const auto he = hermite(2 * n, a);
    const double pdf = kernels::gauss_pdf(a, 1.0);
    // J_m = int_{-inf}^a He_m(s) phi(s) ds.
    std::vector<double> J(2 * n + 1);
    J[0] = kernels::gauss_cdf(a, 1.0);
    for (int m = 1; m <= 2 * n; ++m) J[m] = -he[m - 1] * pdf;

    std::vector<double> fact(n + 1, 1.0);
    for (int i = 1; i <= n; ++i) fact[i] = fact[i - 1] * i;
    Eigen::MatrixXd M(n, n);
    for (int j = 0; j < n; ++j) {
        for (int l = 0; l <= j; ++l) {
            // He_j He_l = sum_r C(j,r) C(l,r) r! He_{j+l-2r}.
            double s = 0.0;
            for (int r = 0; r <= l; ++r) s += binom(j, r) * binom(l, r) * fact[r] * J[j + l - 2 * r];
            M(j, l) = M(l, j) = s / std::sqrt(fact[j] * fact[l]);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M, Eigen::EigenvaluesOnly);
    // Poisson-binomial law of the count below x.
    std::vector<double> count(n + 1, 0.0);
    count[0] = 1.0;
    for (int i = 0; i < n; ++i) {
        const double p = std::clamp(solver.eigenvalues()(i), 0.0, 1.0);
        for (int c = i + 1; c >= 1; --c) count[c] = count[c] * (1.0 - p) + count[c - 1] * p;
        count[0] *= 1.0 - p;
    }
    double tail = 0.0;
    for (int c = k; c <= n; ++c) tail += count[c];
    return std::clamp(tail, 0.0, 1.0);
}

} // namespace interlace::verify
