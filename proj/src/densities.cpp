#include "interlace/densities.h"

#include "interlace/error.h"
#include "interlace/kernels.h"
#include "interlace/linalg.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace interlace::densities {

namespace {

using linalg::Matrix;

constexpr double kLog2Pi = 1.8378770664093454836; // log(2 pi)

double log_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double factorial(std::size_t n) {
    double f = 1.0;
    for (std::size_t k = 2; k <= n; ++k) f *= static_cast<double>(k);
    return f;
}

// log Z_n with Z_n = (2 pi)^{n/2} prod_{j<n} j!.
double log_normalizer(std::size_t n) {
    double z = 0.5 * static_cast<double>(n) * kLog2Pi;
    for (std::size_t j = 1; j < n; ++j) z += log_factorial(j);
    return z;
}

// Sum of log gaps; -inf when two coordinates coincide.
double log_vandermonde(std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (std::size_t j = i + 1; j < y.size(); ++j) {
            const double d = y[j] - y[i];
            if (d <= 0.0) return -std::numeric_limits<double>::infinity();
            s += std::log(d);
        }
    }
    return s;
}

double sum_squares(std::span<const double> y) {
    double s = 0.0;
    for (double v : y) s += v * v;
    return s;
}

// h_n(num) / h_n(den) as a product of matched gap ratios, which stays finite
// as both points approach the same chamber wall.
double vandermonde_ratio(std::span<const double> num, std::span<const double> den) {
    double r = 1.0;
    for (std::size_t i = 0; i < num.size(); ++i) {
        for (std::size_t j = i + 1; j < num.size(); ++j) {
            r *= (num[j] - num[i]) / (den[j] - den[i]);
        }
    }
    return r;
}

double clip_nonnegative(double value, double scale, const char* what) {
    if (value >= 0.0) return value;
    if (value >= -kNegativeSlack * std::max(scale, 1e-300)) return 0.0;
    throw NumericalError(std::string(what) + " determinant is negative beyond roundoff: " +
                         std::to_string(value) + " (scale " + std::to_string(scale) + ")");
}

double clip_probability(double value, double scale, const char* what) {
    const double slack = kNegativeSlack * std::max(scale, 1.0);
    if (value < -slack || value > 1.0 + slack) {
        throw NumericalError(std::string(what) + " outside [0, 1] beyond roundoff: " +
                             std::to_string(value));
    }
    return std::clamp(value, 0.0, 1.0);
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw DomainError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                          " vs " + std::to_string(b) + ")");
    }
}

void require_strict(const OrderedPoint& p, const char* what) {
    if (!p.strictly_increasing()) {
        throw DomainError(std::string(what) + ": repeated coordinate, Vandermonde factor vanishes");
    }
}

Matrix km_matrix(std::span<const double> y, std::span<const double> y2, double t) {
    const auto n = static_cast<Eigen::Index>(y.size());
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = kernels::gauss_pdf(y2[j] - y[i], t);
    return m;
}

Matrix q_matrix(std::span<const double> x, std::span<const double> y,
                std::span<const double> x2, std::span<const double> y2, double t) {
    const auto n = static_cast<Eigen::Index>(y.size());
    if (x.size() != y.size() + 1 || x2.size() != x.size() || y2.size() != y.size()) {
        throw DomainError("q density: need |x| = |x2| = n + 1 and |y| = |y2| = n");
    }
    if (2 * n + 1 > linalg::kMaxDim) throw CapabilityError("q density: n too large");
    Matrix m(2 * n + 1, 2 * n + 1);
    for (Eigen::Index i = 0; i <= n; ++i) {
        for (Eigen::Index j = 0; j <= n; ++j) m(i, j) = kernels::gauss_pdf(x2[j] - x[i], t);
        for (Eigen::Index j = 0; j < n; ++j)
            m(i, n + 1 + j) = kernels::gauss_cdf(y2[j] - x[i], t) - (j >= i ? 1.0 : 0.0);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= n; ++j)
            m(n + 1 + i, j) = kernels::gauss_pdf_prime(x2[j] - y[i], t);
        for (Eigen::Index j = 0; j < n; ++j)
            m(n + 1 + i, n + 1 + j) = kernels::gauss_pdf(y2[j] - y[i], t);
    }
    return m;
}

Matrix r_matrix(std::span<const double> x, std::span<const double> x2, double t) {
    const auto n = static_cast<Eigen::Index>(x.size());
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            m(i, j) = kernels::iterated_phi(static_cast<int>(i - j), x2[j] - x[i], t);
    return m;
}

Matrix coalescing_matrix(std::span<const double> z, std::span<const double> z2, double t) {
    const auto n = static_cast<Eigen::Index>(z.size());
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            m(i, j) = kernels::gauss_cdf(z2[j] - z[i], t) - (i < j ? 1.0 : 0.0);
    return m;
}

void check_dim(std::size_t n) {
    if (n == 0) throw DomainError("points must have at least one coordinate");
    if (n > static_cast<std::size_t>(linalg::kMaxDim)) throw CapabilityError("dimension too large");
}

} // namespace

namespace detail {

double km_det(std::span<const double> y, std::span<const double> y2, double t) {
    return linalg::determinant(km_matrix(y, y2, t));
}

double q_det(std::span<const double> x, std::span<const double> y,
             std::span<const double> x2, std::span<const double> y2, double t) {
    return linalg::determinant(q_matrix(x, y, x2, y2, t));
}

double r_det(std::span<const double> x, std::span<const double> x2, double t) {
    return linalg::determinant(r_matrix(x, x2, t));
}

double coalescing_det(std::span<const double> z, std::span<const double> z2, double t) {
    return linalg::determinant(coalescing_matrix(z, z2, t));
}

long double coalescing_det_extended(std::span<const long double> z,
                                    std::span<const long double> z2, long double t) {
    const auto n = static_cast<Eigen::Index>(z.size());
    Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> m(n, n);
    const long double s = std::sqrt(2.0L * t);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            m(i, j) = 0.5L * std::erfc(-(z2[j] - z[i]) / s) - (i < j ? 1.0L : 0.0L);
    return m.partialPivLu().determinant();
}

} // namespace detail

double vandermonde_h(std::span<const double> y) {
    double h = 1.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t j = i + 1; j < y.size(); ++j) h *= y[j] - y[i];
    return h;
}

double vandermonde_h(const OrderedPoint& y) { return vandermonde_h(y.values()); }

DensityValue km_density(const OrderedPoint& y, const OrderedPoint& y2, TimeParam t) {
    require_same_size(y.size(), y2.size(), "km_density");
    check_dim(y.size());
    const Matrix m = km_matrix(y.values(), y2.values(), t);
    return {clip_nonnegative(linalg::determinant(m), linalg::hadamard_bound(m), "Karlin-McGregor"), {}};
}

DensityValue km_density_plus(const OrderedPoint& y, const OrderedPoint& y2, TimeParam t) {
    require_strict(y, "km_density_plus");
    DensityValue base = km_density(y, y2, t);
    base.value *= vandermonde_ratio(y2.values(), y.values());
    return base;
}

DensityValue q_density(const InterlacedPoint& w, const InterlacedPoint& w2, TimeParam t) {
    require_same_size(w.level(), w2.level(), "q_density");
    const Matrix m = q_matrix(w.x.values(), w.y.values(), w2.x.values(), w2.y.values(), t);
    return {clip_nonnegative(linalg::determinant(m), linalg::hadamard_bound(m), "interlaced"), {}};
}

DensityValue q_density_dual(const InterlacedPoint& w, const InterlacedPoint& w2, TimeParam t) {
    return q_density(w2, w, t);
}

DensityValue q_density_plus(const InterlacedPoint& w, const InterlacedPoint& w2, TimeParam t) {
    require_strict(w.y, "q_density_plus");
    DensityValue base = q_density(w, w2, t);
    base.value *= vandermonde_ratio(w2.y.values(), w.y.values());
    return base;
}

DensityValue entrance_mu(const OrderedPoint& y, TimeParam t) {
    check_dim(y.size());
    const double n = static_cast<double>(y.size());
    const double lh = log_vandermonde(y.values());
    const double log_value = -log_normalizer(y.size()) - 0.5 * n * n * std::log(t.value()) -
                             sum_squares(y.values()) / (2.0 * t) + 2.0 * lh;
    if (std::isinf(lh)) return {0.0, {}};
    return {std::exp(log_value), log_value};
}

DensityValue lambda_kernel(const OrderedPoint& x, const OrderedPoint& y) {
    if (x.size() != y.size() + 1) throw DomainError("lambda_kernel: need |x| = |y| + 1");
    require_strict(x, "lambda_kernel");
    if (!interlaces(x.values(), y.values())) return {0.0, {}};
    const double log_value = log_factorial(y.size()) + log_vandermonde(y.values()) -
                             log_vandermonde(x.values());
    const double value = factorial(y.size()) * vandermonde_h(y.values()) / vandermonde_h(x.values());
    if (std::isinf(log_value)) return {0.0, {}};
    return {value, log_value};
}

DensityValue entrance_nu(const InterlacedPoint& w, TimeParam t) {
    const std::size_t n = w.level();
    const double m = static_cast<double>(n + 1);
    const double lhx = log_vandermonde(w.x.values());
    const double lhy = log_vandermonde(w.y.values());
    if (std::isinf(lhx) || std::isinf(lhy)) return {0.0, {}};
    const double log_value = log_factorial(n) - log_normalizer(n + 1) -
                             0.5 * m * m * std::log(t.value()) -
                             sum_squares(w.x.values()) / (2.0 * t) + lhx + lhy;
    return {std::exp(log_value), log_value};
}

DensityValue gt_entrance_density(const GTPattern& p, TimeParam t) {
    if (!p.in_cone()) return {0.0, {}};
    const auto top = p.top();
    const double n = static_cast<double>(p.depth());
    const double lh = log_vandermonde(top);
    if (std::isinf(lh)) return {0.0, {}};
    const double log_value = -0.5 * n * kLog2Pi - 0.5 * n * n * std::log(t.value()) -
                             sum_squares(top) / (2.0 * t) + lh;
    return {std::exp(log_value), log_value};
}

DensityValue r_density(const OrderedPoint& x, const OrderedPoint& x2, TimeParam t) {
    require_same_size(x.size(), x2.size(), "r_density");
    check_dim(x.size());
    const Matrix m = r_matrix(x.values(), x2.values(), t);
    return {clip_nonnegative(linalg::determinant(m), linalg::hadamard_bound(m), "r"), {}};
}

double top_eigenvalue_cdf(int n, double x, TimeParam t) {
    if (n < 1) throw DomainError("top_eigenvalue_cdf: n must be >= 1");
    check_dim(static_cast<std::size_t>(n));
    if (std::isnan(x)) throw DomainError("top_eigenvalue_cdf: x is NaN");
    if (x == std::numeric_limits<double>::infinity()) return 1.0;
    if (x == -std::numeric_limits<double>::infinity()) return 0.0;
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = kernels::iterated_phi(i - j + 1, x, t);
    return clip_probability(linalg::determinant(m), linalg::hadamard_bound(m), "top eigenvalue CDF");
}

double coalescing_cdf(const OrderedPoint& z, const OrderedPoint& z2, TimeParam t) {
    require_same_size(z.size(), z2.size(), "coalescing_cdf");
    check_dim(z.size());
    const Matrix m = coalescing_matrix(z.values(), z2.values(), t);
    return clip_probability(linalg::determinant(m), linalg::hadamard_bound(m), "coalescing CDF");
}

IntertwiningResult intertwining(const OrderedPoint& x, const InterlacedPoint& w2, TimeParam t,
                                const IntertwiningOptions& opts) {
    const std::size_t n = w2.level();
    if (x.size() != n + 1) throw DomainError("intertwining: |x| must equal |x2|");
    if (n == 0 || n > 2) throw CapabilityError("intertwining: quadrature implemented for n = 1, 2");
    require_strict(x, "intertwining");
    require_strict(w2.x, "intertwining");

    const auto xs = x.values();
    const auto x2 = w2.x.values();
    const auto y2 = w2.y.values();
    // lambda(x,y) q^+((x,y), w2) = n! h(y2) / h(x) q((x,y), w2): no 1/h(y) singularity.
    const double prefactor = factorial(n) * vandermonde_h(y2) / vandermonde_h(xs);
    auto integrand = [&](std::span<const double> y) { return prefactor * detail::q_det(xs, y, x2, y2, t); };

    std::vector<std::pair<double, double>> box;
    for (std::size_t i = 0; i < n; ++i) box.emplace_back(xs[i], xs[i + 1]);
    const quadrature::Result lhs = quadrature::integrate_box(integrand, box, opts.quadrature);
    if (!lhs.converged) {
        throw NumericalError("intertwining: quadrature did not converge (estimate " +
                             std::to_string(lhs.value) + ", error " + std::to_string(lhs.error) +
                             ", " + std::to_string(lhs.evaluations) + " evaluations)");
    }
    const double rhs = km_density_plus(x, w2.x, t).value * lambda_kernel(w2.x, w2.y).value;
    IntertwiningResult out;
    out.lhs = lhs.value;
    out.rhs = rhs;
    out.quadrature_error = lhs.error;
    out.residual = std::abs(lhs.value - rhs) / std::max(std::abs(rhs), opts.floor);
    return out;
}

double intertwining_residual(const OrderedPoint& x, const InterlacedPoint& w2, TimeParam t) {
    IntertwiningOptions opts;
    if (w2.level() == 2) opts.quadrature = {0.0, 1e-10, 4000};
    return intertwining(x, w2, t, opts).residual;
}

double coalescing_duality_residual(const InterlacedPoint& w, const InterlacedPoint& w2,
                                   TimeParam t, double h) {
    if (w.level() != 1 || w2.level() != 1) {
        throw DomainError("coalescing_duality_residual: implemented for n = 1 only");
    }
    if (!(h > 0.0)) throw DomainError("coalescing_duality_residual: h must be > 0");
    const double gaps[] = {w.y[0] - w.x[0], w.x[1] - w.y[0], w2.y[0] - w2.x[0], w2.x[1] - w2.y[0]};
    for (double g : gaps) {
        if (g < 4.0 * h) {
            throw DomainError("coalescing_duality_residual: spacing below 4h overlaps the stencil");
        }
    }

    const long double hl = h;
    long double sum = 0.0L;
    for (int a : {1, -1}) {
        for (int b : {1, -1}) {
            for (int c : {1, -1}) {
                const long double z[3] = {w.x[0], w.y[0] + a * hl, w.x[1]};
                const long double z2[3] = {w2.x[0] + b * hl, w2.y[0], w2.x[1] + c * hl};
                sum += a * b * c * detail::coalescing_det_extended(z, z2, t.value());
            }
        }
    }
    const long double mixed = -sum / (8.0L * hl * hl * hl);
    const double q = detail::q_det(w.x.values(), w.y.values(), w2.x.values(), w2.y.values(), t);
    return static_cast<double>(std::abs(mixed - static_cast<long double>(q)));
}

} // namespace interlace::densities
