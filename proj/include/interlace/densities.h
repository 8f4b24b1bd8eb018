#pragma once

#include "interlace/points.h"
#include "interlace/quadrature.h"

#include <optional>
#include <span>

namespace interlace::densities {

struct DensityValue {
    double value = 0.0;
    // Natural log of the value where it is available in closed form; kept
    // so callers can report densities that underflow.
    std::optional<double> log_scale;
};

// Determinants more negative than this multiple of their Hadamard bound are
// reported as numerical inconsistencies; anything smaller is clipped to 0.
inline constexpr double kNegativeSlack = 1e-12;

// prod_{i<j} (y_j - y_i).
double vandermonde_h(const OrderedPoint& y);
double vandermonde_h(std::span<const double> y);

// det{ phi_t(y2_j - y_i) }.
DensityValue km_density(const OrderedPoint& y, const OrderedPoint& y2, TimeParam t);
// h_n(y2)/h_n(y) * km_density; y must be strictly increasing.
DensityValue km_density_plus(const OrderedPoint& y, const OrderedPoint& y2, TimeParam t);

// Determinant of the (2n+1) x (2n+1) block matrix [A B; C D] with
//   A_ij = phi_t(x2_j - x_i)             B_ij = Phi_t(y2_j - x_i) - 1(j >= i)
//   C_ij = phi'_t(x2_j - y_i)            D_ij = phi_t(y2_j - y_i)
DensityValue q_density(const InterlacedPoint& w, const InterlacedPoint& w2, TimeParam t);
// q_density with the arguments swapped.
DensityValue q_density_dual(const InterlacedPoint& w, const InterlacedPoint& w2, TimeParam t);
DensityValue q_density_plus(const InterlacedPoint& w, const InterlacedPoint& w2, TimeParam t);

// GUE-type entrance law at time t:
//   (1/Z_n) t^{-n^2/2} exp(-|y|^2/2t) h_n(y)^2,  Z_n = (2 pi)^{n/2} prod_{j<n} j!.
DensityValue entrance_mu(const OrderedPoint& y, TimeParam t);
// n! h_n(y) / h_{n+1}(x) on W^n(x), zero outside it.
DensityValue lambda_kernel(const OrderedPoint& x, const OrderedPoint& y);
// Entrance law of the interlaced pair, mu^{n+1}_t(x) lambda^n(x, y) in closed form.
DensityValue entrance_nu(const InterlacedPoint& w, TimeParam t);
// (2 pi)^{-n/2} t^{-n^2/2} exp(-|x^n|^2/2t) h_n(x^n) on the Gelfand-Tsetlin cone.
DensityValue gt_entrance_density(const GTPattern& p, TimeParam t);

// det{ Phi_t^{(i-j)}(x2_j - x_i) }.
DensityValue r_density(const OrderedPoint& x, const OrderedPoint& x2, TimeParam t);

// Largest-eigenvalue distribution function det{ Phi_t^{(i-j+1)}(x) }.
double top_eigenvalue_cdf(int n, double x, TimeParam t);

// P(Z_t(z_i) <= z2_i for all i) for coalescing Brownian motions started at z.
double coalescing_cdf(const OrderedPoint& z, const OrderedPoint& z2, TimeParam t);

struct IntertwiningOptions {
    quadrature::Options quadrature{0.0, 1e-12, 4000};
    double floor = 1e-300; // denominator floor for the relative residual
};

struct IntertwiningResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    double quadrature_error = 0.0;
};

// Both sides of
//   int_{W^n(x)} lambda(x,y) q^+_t((x,y), w2) dy = p^{n+1,+}_t(x, x2) lambda(x2, y2),
// the left by quadrature over the box W^n(x). n <= 2.
IntertwiningResult intertwining(const OrderedPoint& x, const InterlacedPoint& w2, TimeParam t,
                                const IntertwiningOptions& opts = {});
// |LHS - RHS| / max(|RHS|, floor).
double intertwining_residual(const OrderedPoint& x, const InterlacedPoint& w2, TimeParam t);

// |D_h - q| where D_h is the central-difference approximation of
//   -d/dy d/dx2_1 d/dx2_2 coalescing_cdf((x_1, y, x_2), (x2_1, y2, x2_2))
// (n = 1 only). Evaluated in extended precision; every perturbed coordinate
// must sit at least 4h from its neighbours.
double coalescing_duality_residual(const InterlacedPoint& w, const InterlacedPoint& w2,
                                   TimeParam t, double h);

namespace detail {

// Raw determinants on arbitrary real arguments (no ordering checks, no
// clipping). Used by finite-difference stencils that step off the chamber.
double km_det(std::span<const double> y, std::span<const double> y2, double t);
double q_det(std::span<const double> x, std::span<const double> y,
             std::span<const double> x2, std::span<const double> y2, double t);
double r_det(std::span<const double> x, std::span<const double> x2, double t);
double coalescing_det(std::span<const double> z, std::span<const double> z2, double t);
long double coalescing_det_extended(std::span<const long double> z,
                                    std::span<const long double> z2, long double t);

} // namespace detail

} // namespace interlace::densities
