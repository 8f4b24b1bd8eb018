#pragma once

#include "interlace/points.h"
#include "interlace/simulate.h"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace interlace::verify {

// Every pass/fail threshold used by the checks.
struct Tolerances {
    double p_value = 0.01;
    double intertwining_n1 = 1e-8;
    double intertwining_n2 = 1e-6;
    double semigroup_rel = 1e-6; // Chapman-Kolmogorov and entrance law
    double sup_norm = 0.01;
    double binomial_se = 3.0;
    double order_ratio_lo = 3.5; // residual(h) / residual(h/2)
    double order_ratio_hi = 4.5;
    double vanishing = 1e-12;
    double neumann = 1e-6;
    double duality_abs = 1e-4; // mixed-derivative residual at h = 1e-3
    double filter_box = 0.05;  // conditioning box half-width in units of sqrt(t)
    double inconclusive_factor = 10.0;
};

nlohmann::json to_json(const Tolerances& tol);
// Applies "key=value" overrides; unknown keys throw DomainError.
void apply_override(Tolerances& tol, const std::string& assignment);

struct KSResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n_samples = 0;
};

// P(sqrt(n) D_n > lambda) in the large-n limit.
double kolmogorov_survival(double lambda);

// Two-sided one-sample KS test. Needs at least 100 samples; NaN throws.
KSResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

struct ChiSquareResult {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
};

// Pearson statistic against expected counts with dof = cells - 1.
ChiSquareResult chi_square(const std::vector<double>& observed, const std::vector<double>& expected);

// Distribution function of the k-th smallest of n points under mu^n_t
// (k = n is the largest). The number of points below x is a sum of
// independent Bernoulli variables whose parameters are the eigenvalues of the
// truncated Gram matrix of the Hermite functions on (-inf, x].
double gue_order_statistic_cdf(int n, int k, double x, TimeParam t);

enum class Status { pass, fail, inconclusive };

struct VerificationReport {
    std::string id;
    nlohmann::json inputs = nlohmann::json::object();
    double discrepancy = 0.0;
    double tolerance = 0.0;
    // "le": pass iff discrepancy <= tolerance. "ge": pass iff discrepancy >= tolerance (p-values).
    std::string comparison = "le";
    bool pass = false;
    Status status = Status::fail;
    std::optional<std::uint64_t> seed;
    double wall_seconds = 0.0;
    nlohmann::json details = nlohmann::json::object();
};

nlohmann::json to_json(const VerificationReport& r);

// Configuration echo for reports and output files. The worker count is left
// out because it never changes results.
nlohmann::json to_json(const simulate::SimConfig& cfg);

// Configurations for the quadrature identities.
struct IntertwiningCase {
    OrderedPoint x;
    InterlacedPoint w2;
    double t;
};
// Random interior configurations drawn from a fixed seed.
std::vector<IntertwiningCase> random_intertwining_cases(std::size_t n, std::size_t count,
                                                        std::uint64_t seed);

VerificationReport check_intertwining(std::size_t n, const std::vector<IntertwiningCase>& cases,
                                      const Tolerances& tol = {});

// Exact transpose identity on `pairs` random pairs per n in 0..max_n, and the
// n = 1 mixed-derivative residual at h = 2e-3 and 1e-3.
VerificationReport check_duality(std::size_t max_n, std::size_t pairs, std::uint64_t seed,
                                 const Tolerances& tol = {});

// Heat-equation residual decay for q (n = 1) and r (n = 2) between h and h/2,
// vanishing of q on {y_1 = y_2}, Neumann conditions of q and r at step h_neumann.
VerificationReport check_pde_and_boundaries(double t, double h, double h_neumann,
                                            const Tolerances& tol = {});

// Chapman-Kolmogorov at (s, t) for p^{2,+} ("km_plus") or r at n = 2 ("r").
VerificationReport check_chapman_kolmogorov(const std::string& kernel, double s, double t,
                                            const Tolerances& tol = {});

// int nu_s(w) q^{1,+}_t(w, w2) dw = nu_{s+t}(w2) at the given points (n = 1).
VerificationReport check_entrance_law(std::size_t n, double s, double t,
                                      const std::vector<InterlacedPoint>& points,
                                      const Tolerances& tol = {});

// Smooth bump of the given radius around `center` in every coordinate.
struct BumpSpec {
    std::vector<double> center;
    double radius = 0.5;
};

// |int q_t(w, .) f - f(w)| (n = 1) or |int r_t(x, .) f - f(x)| (n = 2) along
// the decreasing t sequence; passes if strictly decreasing.
VerificationReport check_small_t(std::size_t n, const BumpSpec& f, const std::vector<double>& ts);

// KS of the largest eigenvalue of tridiagonal spectra against top_eigenvalue_cdf.
VerificationReport check_gue_spectrum(int n, double t, std::size_t samples, std::uint64_t seed,
                                      const Tolerances& tol = {});

// Pair with Dyson Y from the entrance law; KS of each X coordinate and of the
// X-max against the marginals of mu^{n+1}_t.
VerificationReport check_proposition_interlace(std::size_t n, double t,
                                               const simulate::SimConfig& cfg,
                                               const Tolerances& tol = {});

// Sup-norm between the ECDF of the discrete sup functional and top_eigenvalue_cdf.
VerificationReport check_identity_sup(std::size_t n, double t, const simulate::SimConfig& cfg,
                                      const Tolerances& tol = {});

// Paths with X_t in a box around the mode of mu^{n+1}_t; chi-square of Y_t
// against lambda(X_t, .) with per-path cell probabilities. n <= 2.
VerificationReport check_filtering(std::size_t n, double t, const simulate::SimConfig& cfg,
                                   const Tolerances& tol = {});

// Empirical P(Z_t <= z2) against coalescing_cdf at every grid point.
VerificationReport check_coalescing(const OrderedPoint& z, const std::vector<OrderedPoint>& grid,
                                    double t, const simulate::SimConfig& cfg,
                                    const Tolerances& tol = {});

struct SuiteConfig {
    std::optional<std::size_t> paths;
    std::optional<double> dt;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    Tolerances tolerances;
};

const std::vector<std::string>& suite_names();
// Throws DomainError for an unknown suite.
std::vector<VerificationReport> run_suite(const std::string& suite, const SuiteConfig& cfg);

} // namespace interlace::verify
