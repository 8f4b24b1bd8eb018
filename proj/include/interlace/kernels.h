#pragma once

#include "interlace/points.h"

namespace interlace::kernels {

inline constexpr int kDefaultMaxOrder = 64;

// Order of an iterated Gaussian integral; negative orders are derivatives of
// the Gaussian density. Throws CapabilityError when |n| exceeds max_order.
class IteratedIndex {
public:
    IteratedIndex(int n, int max_order = kDefaultMaxOrder); // NOLINT(google-explicit-constructor)
    int value() const { return n_; }

private:
    int n_;
};

// Centered Gaussian density with variance t. +-inf map to 0; NaN throws.
double gauss_pdf(double y, TimeParam t);

// Distribution function of gauss_pdf, via erfc.
double gauss_cdf(double y, TimeParam t);

// d/dy gauss_pdf = -(y/t) gauss_pdf.
double gauss_pdf_prime(double y, TimeParam t);

/// n-th iterated integral of the Gaussian density,
///   n >= 1:  int_{-inf}^{y} (y-x)^{n-1}/(n-1)! phi_t(x) dx,
///   n == 0:  phi_t(y),
///   n <  0:  the |n|-th derivative of phi_t.
/// Positive orders use the three-term recurrence
///   (n-1) F_n = y F_{n-1} + t F_{n-2},
/// run forward for y >= -sqrt(t)/4 and as a continued fraction
/// for the ratios F_n / F_{n-1} further left, where the forward
/// recurrence amplifies rounding. Negative orders are Hermite multiples of phi_t.
double iterated_phi(IteratedIndex n, double y, TimeParam t);

// Direct adaptive quadrature of the defining integral (n >= 1), for
// validating iterated_phi. Slow.
double iterated_phi_by_quadrature(int n, double y, TimeParam t);

} // namespace interlace::kernels
