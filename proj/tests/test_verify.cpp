#include "doctest.h"

#include "interlace/densities.h"
#include "interlace/error.h"
#include "interlace/verify.h"
#include "oracles/oracles.h"

#include <cmath>
#include <random>

using namespace interlace;
using namespace interlace::verify;

namespace {

simulate::SimConfig small_config(std::size_t paths, double dt, std::uint64_t seed) {
    simulate::SimConfig c;
    c.n_paths = paths;
    c.dt = dt;
    c.seed = seed;
    c.threads = 1;
    return c;
}

std::vector<double> normals(std::size_t n, std::uint64_t seed, double shift = 0.0) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> d(shift, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = d(gen);
    return v;
}

const auto std_normal_cdf = [](double v) { return oracle::Phi(v, 1.0); };

} // namespace

TEST_CASE("Kolmogorov distribution") {
    // Reference values of the limiting distribution 1 - K(lambda).
    CHECK(kolmogorov_survival(1.3580986393225505) == doctest::Approx(0.05).epsilon(1e-8));
    CHECK(kolmogorov_survival(1.6276236115189504) == doctest::Approx(0.01).epsilon(1e-8));
    CHECK(kolmogorov_survival(0.8275735551899077) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(kolmogorov_survival(0.0) == 1.0);
    CHECK(kolmogorov_survival(0.3) == doctest::Approx(0.99999100).epsilon(1e-6));
    // Both series agree at the switch-over point.
    CHECK(kolmogorov_survival(1.1799999) == doctest::Approx(kolmogorov_survival(1.1800001)).epsilon(1e-6));
}

TEST_CASE("KS test calibration") {
    int passed = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        passed += ks_test(normals(2000, seed), std_normal_cdf).p_value > 0.01;
    CHECK(passed >= 98);

    const auto shifted = ks_test(normals(2000, 1, 5.0), std_normal_cdf);
    CHECK(shifted.p_value < 1e-6);

    const auto big = ks_test(normals(100000, 2), std_normal_cdf);
    CHECK(big.statistic < 0.006);
    CHECK(big.n_samples == 100000);

    // Order does not matter.
    auto v = normals(500, 3);
    const auto a = ks_test(v, std_normal_cdf);
    std::reverse(v.begin(), v.end());
    CHECK(ks_test(v, std_normal_cdf).statistic == a.statistic);

    CHECK_THROWS_AS(ks_test(std::vector<double>(99, 0.0), std_normal_cdf), DomainError);
    v[7] = std::nan("");
    CHECK_THROWS_AS(ks_test(v, std_normal_cdf), DomainError);

    // Midpoint grid against the uniform law: the ECDF is off by half a step everywhere.
    std::vector<double> u;
    for (int i = 0; i < 100; ++i) u.push_back((i + 0.5) / 100.0);
    CHECK(ks_test(u, [](double x) { return std::clamp(x, 0.0, 1.0); }).statistic == doctest::Approx(0.005));
}

TEST_CASE("chi-square test") {
    // With 3 cells the survival function is exp(-x / 2).
    const auto r = chi_square({30, 50, 20}, {40, 40, 20});
    CHECK(r.statistic == doctest::Approx(100.0 / 40 + 100.0 / 40));
    CHECK(r.dof == 2.0);
    CHECK(r.p_value == doctest::Approx(std::exp(-r.statistic / 2)).epsilon(1e-12));
    CHECK(chi_square({10, 10}, {10, 10}).p_value == doctest::Approx(1.0));
    CHECK_THROWS_AS(chi_square({1, 2}, {1, 2, 3}), DomainError);
}

TEST_CASE("order statistics of the GUE spectrum") {
    for (double x : {-2.0, -0.3, 0.0, 1.1, 3.0}) {
        CHECK(gue_order_statistic_cdf(1, 1, x, 0.7) == doctest::Approx(oracle::Phi(x, 0.7)).epsilon(1e-13));
        for (int n = 2; n <= 4; ++n)
            CHECK(gue_order_statistic_cdf(n, n, x, 1) ==
                  doctest::Approx(densities::top_eigenvalue_cdf(n, x, 1)).epsilon(1e-10));
    }
    // Smallest of two points: 1 - mu^2 mass of {x_1 > a}.
    const double a = -0.4;
    const double above = oracle::integrate2(
        [](double u, double v) { return densities::entrance_mu({u, v}, 1).value; }, a, 12.0,
        [](double u) { return std::pair{u, 12.0}; });
    CHECK(gue_order_statistic_cdf(2, 1, a, 1) == doctest::Approx(1.0 - above).epsilon(1e-8));
    // Reflection symmetry: P(x_k <= a) = P(x_{n+1-k} >= -a).
    for (int k = 1; k <= 3; ++k)
        CHECK(gue_order_statistic_cdf(3, k, 0.35, 1) ==
              doctest::Approx(1.0 - gue_order_statistic_cdf(3, 4 - k, -0.35, 1)).epsilon(1e-12));
}

TEST_CASE("tolerances and reports serialize") {
    Tolerances tol;
    apply_override(tol, "sup_norm=0.02");
    CHECK(tol.sup_norm == 0.02);
    CHECK(to_json(tol)["sup_norm"] == 0.02);
    CHECK_THROWS_AS(apply_override(tol, "nonsense=1"), DomainError);
    CHECK_THROWS_AS(apply_override(tol, "sup_norm"), DomainError);
    CHECK_THROWS_AS(apply_override(tol, "sup_norm=abc"), DomainError);

    VerificationReport r;
    r.id = "x";
    r.seed = 5;
    r.discrepancy = 0.5;
    const auto j = to_json(r);
    for (const char* key : {"id", "inputs", "discrepancy", "tolerance", "pass", "seed", "wall_seconds", "status"})
        CHECK(j.contains(key));
    CHECK(j["seed"] == 5);

    auto c = small_config(10, 1e-3, 4);
    c.threads = 7;
    const auto cj = to_json(c);
    CHECK_FALSE(cj.contains("threads"));
    CHECK(cj["start"]["mode"] == "entrance");
}

TEST_CASE("intertwining check") {
    CHECK_THROWS_AS(check_intertwining(3, random_intertwining_cases(3, 1, 1)), CapabilityError);
    const auto r = check_intertwining(1, random_intertwining_cases(1, 5, 18));
    CHECK(r.pass);
    CHECK(r.discrepancy < 1e-8);
    CHECK(r.id == "intertwining_n1");
}

TEST_CASE("duality check") {
    const auto r = check_duality(3, 25, 17);
    CHECK(r.pass);
    CHECK(r.details["pairs_compared"] == 100);
    const auto degenerate = check_duality(0, 1, 17);
    CHECK(degenerate.pass);
}

TEST_CASE("PDE and boundary check") {
    const auto r = check_pde_and_boundaries(1.0, 2e-2, 1e-4);
    CHECK(r.pass);
    for (const auto& c : r.details["criteria"]) {
        INFO(c.dump());
        CHECK(c["pass"] == true);
    }
}

TEST_CASE("semigroup checks") {
    const auto km = check_chapman_kolmogorov("km_plus", 0.3, 0.7);
    CHECK(km.pass);
    CHECK(km.discrepancy < 1e-6);
    CHECK_THROWS_AS(check_chapman_kolmogorov("other", 0.3, 0.7), DomainError);
    const auto ent = check_entrance_law(1, 0.3, 0.7, {InterlacedPoint({-0.8, 0.9}, {0.1})});
    CHECK(ent.pass);
    CHECK(ent.discrepancy < 1e-6);
}

TEST_CASE("small-time check") {
    const auto r = check_small_t(2, BumpSpec{{-1.0, 1.0}, 0.5}, {1e-1, 1e-2, 1e-3});
    CHECK(r.pass);
    // A single time has no sequence to compare.
    CHECK_THROWS_AS(check_small_t(2, BumpSpec{{-1.0, 1.0}, 0.5}, {1e-1}), DomainError);
    // Support touching the boundary is rejected.
    CHECK_THROWS_AS(check_small_t(2, BumpSpec{{-0.2, 0.2}, 0.5}, {1e-1, 1e-2}), DomainError);
}

TEST_CASE("simulation-backed checks with fixed seeds") {
    // Regression values recorded on the first verified run.
    const auto gue = check_gue_spectrum(3, 1.0, 5000, 13);
    CHECK(gue.pass);
    CHECK(gue.discrepancy == doctest::Approx(0.1778985647237773).epsilon(1e-9));

    const auto sup = check_identity_sup(2, 1.0, small_config(4000, 1e-3, 12));
    CHECK(sup.discrepancy == doctest::Approx(0.013403202359546507).epsilon(1e-9));
    CHECK(sup.discrepancy < 0.03);

    const auto inter = check_proposition_interlace(1, 1.0, small_config(3000, 1e-3, 11));
    CHECK(inter.discrepancy == doctest::Approx(0.29330182847706421).epsilon(1e-9));
    CHECK(inter.pass);

    const auto coal = check_coalescing({0.0, 0.5}, {OrderedPoint{0.0, 1.0}, OrderedPoint{-0.5, 2.0}}, 1.0,
                                       small_config(4000, 1e-3, 14));
    CHECK(coal.discrepancy == doctest::Approx(1.7095466555726475).epsilon(1e-9));
    CHECK(coal.pass);

    // Too few paths land in the conditioning box: the check declines to decide.
    const auto filt = check_filtering(1, 1.0, small_config(500, 1e-2, 16));
    CHECK(filt.status == Status::inconclusive);
    CHECK_FALSE(filt.pass);

    // Same seed, same answer.
    CHECK(check_gue_spectrum(3, 1.0, 5000, 13).discrepancy == gue.discrepancy);
    CHECK(check_identity_sup(2, 1.0, small_config(4000, 1e-3, 12)).discrepancy == sup.discrepancy);
}

TEST_CASE("suite registry") {
    const auto& names = suite_names();
    for (const char* s : {"all", "pde", "intertwine", "entrance", "interlace", "identity", "coalescing",
                          "filtering", "duality", "small_t"})
        CHECK(std::find(names.begin(), names.end(), s) != names.end());
    CHECK_THROWS_AS(run_suite("bogus", {}), DomainError);
    const auto reports = run_suite("duality", {});
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].pass);
}
