#include "interlace/kernels.h"

#include "interlace/error.h"
#include "interlace/quadrature.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace interlace::kernels {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_not_nan(double y) {
    if (std::isnan(y)) throw DomainError("kernel argument is NaN");
}

// F_n(y) / F_{n-1}(y) for k = 1..n on the left tail (y < 0), from
//   R_k = t / (k R_{k+1} - y),
// started deep enough that the seed error has decayed below double precision.
double left_tail(int n, double y, double t) {
    const double ay = -y;
    auto product = [&](int depth) {
        const double k0 = depth + 1.0;
        double r = (-ay + std::sqrt(ay * ay + 4.0 * k0 * t)) / (2.0 * k0);
        double prod = 1.0;
        for (int k = depth; k >= 1; --k) {
            r = t / (k * r + ay);
            if (k <= n) prod *= r;
        }
        return prod;
    };
    int depth = n + 64;
    double prev = product(depth);
    for (int iter = 0; iter < 12; ++iter) {
        depth *= 2;
        const double next = product(depth);
        if (std::abs(next - prev) <= 1e-15 * std::abs(next)) return gauss_pdf(y, t) * next;
        prev = next;
    }
    return gauss_pdf(y, t) * prev;
}

} // namespace

IteratedIndex::IteratedIndex(int n, int max_order) : n_(n) {
    if (n > max_order || n < -max_order) {
        throw CapabilityError("iterated integral order " + std::to_string(n) +
                              " exceeds the configured maximum " + std::to_string(max_order));
    }
}

double gauss_pdf(double y, TimeParam t) {
    require_not_nan(y);
    if (std::isinf(y)) return 0.0;
    return std::exp(-y * y / (2.0 * t)) / std::sqrt(2.0 * std::numbers::pi * t);
}

double gauss_cdf(double y, TimeParam t) {
    require_not_nan(y);
    if (y == kInf) return 1.0;
    if (y == -kInf) return 0.0;
    return 0.5 * std::erfc(-y / std::sqrt(2.0 * t));
}

double gauss_pdf_prime(double y, TimeParam t) {
    require_not_nan(y);
    if (std::isinf(y)) return 0.0;
    return -(y / t) * gauss_pdf(y, t);
}

double iterated_phi(IteratedIndex index, double y, TimeParam t) {
    require_not_nan(y);
    const int n = index.value();

    if (n == 0) return gauss_pdf(y, t);
    if (n == 1) return gauss_cdf(y, t);

    if (n < 0) {
        if (std::isinf(y)) return 0.0;
        const int m = -n;
        const double u = y / t.sqrt();
        double he_prev = 1.0, he = u; // He_0, He_1
        for (int k = 1; k < m; ++k) {
            const double next = u * he - k * he_prev;
            he_prev = he;
            he = next;
        }
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        return sign * std::pow(t.value(), -0.5 * m) * he * gauss_pdf(y, t);
    }

    if (y == kInf) return kInf;
    if (y == -kInf) return 0.0;

    // Left of zero the integrals decay along the recurrence, so a forward sweep
    // amplifies the seed error by roughly exp(2|y| sqrt(n/t)). Close to zero that
    // factor is small and the continued fraction converges slowly, so the sweep
    // is kept there.
    if (y < -0.25 * t.sqrt()) return left_tail(n, y, t);

    double f_prev = gauss_pdf(y, t); // F_0
    double f = gauss_cdf(y, t);      // F_1
    for (int k = 2; k <= n; ++k) {
        const double next = (y * f + t * f_prev) / (k - 1);
        f_prev = f;
        f = next;
    }
    return f;
}

double iterated_phi_by_quadrature(int n, double y, TimeParam t) {
    if (n < 1) throw DomainError("quadrature route covers orders n >= 1 only");
    IteratedIndex checked(n);
    require_not_nan(y);
    double log_fact = std::lgamma(static_cast<double>(n));
    // Substitute s = y - x >= 0; the integrand s^{n-1}/(n-1)! phi_t(y - s) is
    // negligible beyond a dozen standard deviations past its mode.
    const double sd = t.sqrt();
    const double upper = std::max(0.0, y) + std::sqrt(static_cast<double>(n)) * sd + 40.0 * sd;
    auto f = [&](double s) {
        if (s <= 0.0) return 0.0;
        return std::exp((n - 1) * std::log(s) - log_fact) * gauss_pdf(y - s, t);
    };
    quadrature::Options opts;
    opts.abs_tol = 0.0;
    opts.rel_tol = 1e-13;
    opts.max_intervals = 20000;
    double lo = 0.0;
    double total = 0.0;
    // Split at the Gaussian centre so the peak never falls inside one panel.
    const double breaks[] = {0.0, std::max(0.0, y - 8 * sd), std::max(0.0, y), std::max(0.0, y + 8 * sd), upper};
    for (std::size_t i = 1; i < std::size(breaks); ++i) {
        if (breaks[i] > lo) {
            total += quadrature::integrate(f, lo, breaks[i], opts).value;
            lo = breaks[i];
        }
    }
    return total;
}

} // namespace interlace::kernels
