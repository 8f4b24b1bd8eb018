#include "interlace/verify.h"

#include "interlace/densities.h"
#include "interlace/error.h"
#include "interlace/kernels.h"
#include "interlace/quadrature.h"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>

namespace interlace::verify {

namespace dens = interlace::densities;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

const char* status_name(Status s) {
    switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::inconclusive: return "inconclusive";
    }
    return "fail";
}

void settle(VerificationReport& r) {
    r.pass = r.comparison == "ge" ? r.discrepancy >= r.tolerance : r.discrepancy <= r.tolerance;
    if (r.pass) r.status = Status::pass;
    else if (r.status != Status::inconclusive) r.status = Status::fail;
}

// Named sub-criteria of a composite check; the report's discrepancy is the
// number that failed.
class SubChecks {
public:
    bool add(const std::string& name, double value, double tol, const std::string& cmp = "le") {
        const bool ok = cmp == "ge" ? value >= tol : value <= tol;
        items_.push_back({{"name", name}, {"value", value}, {"tolerance", tol}, {"comparison", cmp}, {"pass", ok}});
        if (!ok) ++failed_;
        return ok;
    }
    void fill(VerificationReport& r) const {
        r.discrepancy = failed_;
        r.tolerance = 0.0;
        r.comparison = "le";
        r.details["criteria"] = items_;
    }

private:
    json items_ = json::array();
    int failed_ = 0;
};

json ks_json(const KSResult& k) {
    return {{"statistic", k.statistic}, {"p_value", k.p_value}, {"n_samples", k.n_samples}};
}

json point_json(const InterlacedPoint& w) { return {{"x", w.x.vector()}, {"y", w.y.vector()}}; }

quadrature::Options tight(double rel, std::size_t max_intervals = 20000) {
    return quadrature::Options{1e-300, rel, max_intervals};
}

simulate::SimConfig with_horizon(simulate::SimConfig cfg, double t) {
    if (cfg.horizon_t != t) {
        cfg.horizon_t = t;
        if (cfg.start)
            if (auto* e = std::get_if<simulate::EntranceStart>(&*cfg.start); e && e->t0 >= t) e->t0 = 1e-3 * t;
    }
    return cfg;
}

} // namespace

json to_json(const Tolerances& tol) {
    return {{"p_value", tol.p_value},
            {"intertwining_n1", tol.intertwining_n1},
            {"intertwining_n2", tol.intertwining_n2},
            {"semigroup_rel", tol.semigroup_rel},
            {"sup_norm", tol.sup_norm},
            {"binomial_se", tol.binomial_se},
            {"order_ratio_lo", tol.order_ratio_lo},
            {"order_ratio_hi", tol.order_ratio_hi},
            {"vanishing", tol.vanishing},
            {"neumann", tol.neumann},
            {"duality_abs", tol.duality_abs},
            {"filter_box", tol.filter_box},
            {"inconclusive_factor", tol.inconclusive_factor}};
}

void apply_override(Tolerances& tol, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw DomainError("tolerance override must look like key=value: " + assignment);
    const std::string key = assignment.substr(0, eq);
    double value = 0.0;
    try {
        std::size_t used = 0;
        value = std::stod(assignment.substr(eq + 1), &used);
        if (used != assignment.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw DomainError("tolerance override has a non-numeric value: " + assignment);
    }
    const std::map<std::string, double*> fields = {
        {"p_value", &tol.p_value},         {"intertwining_n1", &tol.intertwining_n1},
        {"intertwining_n2", &tol.intertwining_n2}, {"semigroup_rel", &tol.semigroup_rel},
        {"sup_norm", &tol.sup_norm},       {"binomial_se", &tol.binomial_se},
        {"order_ratio_lo", &tol.order_ratio_lo}, {"order_ratio_hi", &tol.order_ratio_hi},
        {"vanishing", &tol.vanishing},     {"neumann", &tol.neumann},
        {"duality_abs", &tol.duality_abs}, {"filter_box", &tol.filter_box},
        {"inconclusive_factor", &tol.inconclusive_factor}};
    const auto it = fields.find(key);
    if (it == fields.end()) throw DomainError("unknown tolerance key: " + key);
    *it->second = value;
}

json to_json(const VerificationReport& r) {
    json j = {{"id", r.id},
              {"inputs", r.inputs},
              {"discrepancy", r.discrepancy},
              {"tolerance", r.tolerance},
              {"comparison", r.comparison},
              {"pass", r.pass},
              {"status", status_name(r.status)},
              {"wall_seconds", r.wall_seconds},
              {"details", r.details}};
    j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
    return j;
}

json to_json(const simulate::SimConfig& cfg) {
    json start;
    const auto mode = cfg.start_mode();
    if (const auto* e = std::get_if<simulate::EntranceStart>(&mode)) start = {{"mode", "entrance"}, {"t0", e->t0}};
    else start = {{"mode", "spread"}, {"epsilon", std::get<simulate::SpreadStart>(mode).epsilon}};
    return {{"horizon_t", cfg.horizon_t},
            {"dt", cfg.dt},
            {"n_paths", cfg.n_paths},
            {"seed", cfg.seed},
            {"bridge_correction", cfg.bridge_correction},
            {"start", start},
            {"store_every", cfg.store_every},
            {"noise", cfg.noise == simulate::Noise::zero ? "zero" : "gaussian"}};
}

std::vector<IntertwiningCase> random_intertwining_cases(std::size_t n, std::size_t count,
                                                        std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    auto u = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); };
    auto row = [&] {
        std::vector<double> x{u(-1.5, -0.5)};
        for (std::size_t i = 0; i < n; ++i) x.push_back(x.back() + u(0.4, 1.2));
        return x;
    };
    std::vector<IntertwiningCase> out;
    for (std::size_t c = 0; c < count; ++c) {
        const double t = u(0.3, 1.5);
        std::vector<double> x = row(), x2 = row(), y2(n);
        for (std::size_t i = 0; i < n; ++i) y2[i] = x2[i] + u(0.15, 0.85) * (x2[i + 1] - x2[i]);
        out.push_back({OrderedPoint(x), InterlacedPoint(OrderedPoint(x2), OrderedPoint(y2)), t});
    }
    return out;
}

VerificationReport check_intertwining(std::size_t n, const std::vector<IntertwiningCase>& cases,
                                      const Tolerances& tol) {
    const auto start = Clock::now();
    VerificationReport r;
    r.id = "intertwining_n" + std::to_string(n);
    r.inputs = {{"n", n}, {"cases", cases.size()}};
    r.tolerance = n == 1 ? tol.intertwining_n1 : tol.intertwining_n2;
    dens::IntertwiningOptions opts;
    if (n == 2) opts.quadrature = tight(1e-10);
    double worst = 0.0, worst_qerr = 0.0;
    json rows = json::array();
    for (const auto& c : cases) {
        const auto res = dens::intertwining(c.x, c.w2, c.t, opts);
        const double qerr = res.quadrature_error / std::max(std::abs(res.rhs), opts.floor);
        rows.push_back({{"t", c.t}, {"x", c.x.vector()}, {"w2", point_json(c.w2)}, {"lhs", res.lhs},
                        {"rhs", res.rhs}, {"residual", res.residual}, {"quadrature_rel_error", qerr}});
        if (res.residual >= worst) {
            worst = res.residual;
            worst_qerr = qerr;
        }
    }
    r.discrepancy = worst;
    r.details = {{"cases", rows}, {"quadrature_rel_error_at_worst", worst_qerr}};
    if (worst > r.tolerance && worst <= tol.inconclusive_factor * worst_qerr) r.status = Status::inconclusive;
    r.wall_seconds = seconds_since(start);
    settle(r);
    return r;
}

namespace {

InterlacedPoint random_interlaced(std::size_t n, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> gap(0.05, 1.0), first(-2.0, 0.0);
    std::vector<double> z{first(gen)};
    for (std::size_t i = 0; i < 2 * n; ++i) z.push_back(z.back() + gap(gen));
    std::vector<double> x, y;
    for (std::size_t i = 0; i < z.size(); ++i) (i % 2 ? y : x).push_back(z[i]);
    return InterlacedPoint(OrderedPoint(x), OrderedPoint(y));
}

} // namespace

VerificationReport check_duality(std::size_t max_n, std::size_t pairs, std::uint64_t seed,
                                 const Tolerances& tol) {
    const auto start = Clock::now();
    VerificationReport r;
    r.id = "duality";
    r.seed = seed;
    r.inputs = {{"max_n", max_n}, {"pairs_per_n", pairs}};
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> tdist(0.2, 2.0);
    std::size_t mismatches = 0, compared = 0;
    for (std::size_t n = 0; n <= max_n; ++n) {
        for (std::size_t k = 0; k < pairs; ++k) {
            const InterlacedPoint w = random_interlaced(n, gen), w2 = random_interlaced(n, gen);
            const double t = tdist(gen);
            const double a = dens::q_density_dual(w, w2, t).value;
            const double b = dens::q_density(w2, w, t).value;
            ++compared;
            if (!(a == b)) ++mismatches;
        }
    }
    SubChecks sub;
    sub.add("transpose_mismatches", static_cast<double>(mismatches), 0.0);

    const InterlacedPoint w({-1.0, 1.0}, {0.2});
    const InterlacedPoint w2({-0.7, 1.2}, {0.3});
    const double coarse = dens::coalescing_duality_residual(w, w2, 1.0, 2e-3);
    const double fine = dens::coalescing_duality_residual(w, w2, 1.0, 1e-3);
    const double ratio = coarse / fine;
    sub.add("mixed_derivative_residual_h1e-3", fine, tol.duality_abs);
    sub.add("order_ratio_min", ratio, tol.order_ratio_lo, "ge");
    sub.add("order_ratio_max", ratio, tol.order_ratio_hi);
    sub.fill(r);
    r.details["pairs_compared"] = compared;
    r.details["mixed_derivative"] = {{"w", point_json(w)}, {"w2", point_json(w2)}, {"t", 1.0},
                                     {"residual_h2e-3", coarse}, {"residual_h1e-3", fine}, {"ratio", ratio}};
    r.wall_seconds = seconds_since(start);
    settle(r);
    return r;
}

namespace {

// 1/2 sum_i d^2/dv_i^2 - d/dt by central differences, all steps h.
template <class F> // F(std::vector<double> v, double t)
double heat_residual(const F& f, const std::vector<double>& v, double t, double h) {
    double lap = 0.0;
    const double centre = f(v, t);
    for (std::size_t i = 0; i < v.size(); ++i) {
        auto up = v, down = v;
        up[i] += h;
        down[i] -= h;
        lap += (f(up, t) - 2.0 * centre + f(down, t)) / (h * h);
    }
    const double dtime = (f(v, t + h) - f(v, t - h)) / (2.0 * h);
    return std::abs(0.5 * lap - dtime);
}

template <class F>
double central_derivative(const F& f, std::vector<double> v, std::size_t i, double h) {
    auto up = v, down = v;
    up[i] += h;
    down[i] -= h;
    return (f(up) - f(down)) / (2.0 * h);
}

} // namespace

VerificationReport check_pde_and_boundaries(double t, double h, double h_neumann, const Tolerances& tol) {
    const auto start = Clock::now();
    VerificationReport r;
    r.id = "pde_boundaries";
    r.inputs = {{"t", t}, {"h", h}, {"h_neumann", h_neumann}};
    if (!(t > h) || !(h > 0.0) || !(h_neumann > 0.0)) throw DomainError("check_pde_and_boundaries: need 0 < h < t");
    SubChecks sub;

    // q for n = 1 in its first argument, flattened (x1, x2, y1).
    const std::vector<double> x2{-0.5, 1.1}, y2{0.3};
    auto q1 = [&](const std::vector<double>& v, double s) {
        const double x[2] = {v[0], v[1]}, y[1] = {v[2]};
        return dens::detail::q_det(x, y, x2, y2, s);
    };
    const std::vector<double> w{-0.8, 0.9, 0.1};
    const double q_h = heat_residual(q1, w, t, h), q_h2 = heat_residual(q1, w, t, h / 2);
    sub.add("q_heat_ratio_min", q_h / q_h2, tol.order_ratio_lo, "ge");
    sub.add("q_heat_ratio_max", q_h / q_h2, tol.order_ratio_hi);

    // r for n = 2 in its first argument.
    const std::vector<double> rx2{-0.2, 0.9};
    auto r2 = [&](const std::vector<double>& v, double s) { return dens::detail::r_det(v, rx2, s); };
    const std::vector<double> rx{-0.4, 0.6};
    const double r_h = heat_residual(r2, rx, t, h), r_h2 = heat_residual(r2, rx, t, h / 2);
    sub.add("r_heat_ratio_min", r_h / r_h2, tol.order_ratio_lo, "ge");
    sub.add("r_heat_ratio_max", r_h / r_h2, tol.order_ratio_hi);

    // q vanishes when y_1 = y_2 (n = 2).
    {
        const double x[3] = {-1.0, 0.2, 1.1}, y[2] = {0.2, 0.2};
        const double xx2[3] = {-0.9, 0.1, 1.3}, yy2[2] = {-0.2, 0.8};
        sub.add("q_vanishing", std::abs(dens::detail::q_det(x, y, xx2, yy2, t)), tol.vanishing);
    }

    // Neumann conditions: d/dx_1 q at x_1 = y_1, d/dx_2 q at x_2 = y_1, d/dx_2 r at x_1 = x_2.
    auto q_at = [&](const std::vector<double>& v) { return q1(v, t); };
    sub.add("q_neumann_x1", std::abs(central_derivative(q_at, {0.1, 1.0, 0.1}, 0, h_neumann)), tol.neumann);
    sub.add("q_neumann_x2", std::abs(central_derivative(q_at, {-1.0, 0.3, 0.3}, 1, h_neumann)), tol.neumann);
    const std::vector<double> rx2b{-0.3, 0.8};
    auto r_at_b = [&](const std::vector<double>& v) { return dens::detail::r_det(v, rx2b, t); };
    sub.add("r_neumann_x2", std::abs(central_derivative(r_at_b, {0.0, 0.0}, 1, h_neumann)), tol.neumann);

    sub.fill(r);
    r.details["heat_residuals"] = {{"q", {q_h, q_h2}}, {"r", {r_h, r_h2}}};
    r.wall_seconds = seconds_since(start);
    settle(r);
    return r;
}

VerificationReport check_chapman_kolmogorov(const std::string& kernel, double s, double t,
                                            const Tolerances& tol) {
    const auto start = Clock::now();
    VerificationReport r;
    r.id = "chapman_kolmogorov_" + kernel;
    r.inputs = {{"kernel", kernel}, {"s", s}, {"t", t}};
    r.tolerance = tol.semigroup_rel;
    const std::vector<double> y{-0.5, 0.7}, y2{-0.2, 1.0};
    const double radius = 12.0 * std::sqrt(std::max(s, t));
    const double lo = -1.0 - radius, hi = 1.0 + radius;

    std::function<double(std::span<const double>)> f;
    double rhs = 0.0;
    if (kernel == "km_plus") {
        // h(z) cancels between the two factors.
        const double ratio = dens::vandermonde_h(y2) / dens::vandermonde_h(y);
        f = [&, ratio](std::span<const double> z) {
            return ratio * dens::detail::km_det(y, z, s) * dens::detail::km_det(z, y2, t);
        };
        rhs = dens::km_density_plus(OrderedPoint(y), OrderedPoint(y2), s + t).value;
    } else if (kernel == "r") {
        f = [&](std::span<const double> z) { return dens::detail::r_det(y, z, s) * dens::detail::r_det(z, y2, t); };
        rhs = dens::r_density(OrderedPoint(y), OrderedPoint(y2), s + t).value;
    } else {
        throw DomainError("check_chapman_kolmogorov: kernel must be km_plus or r");
    }
    const auto lhs = quadrature::integrate_ordered(f, 2, lo, hi, tight(1e-10));
    r.discrepancy = std::abs(lhs.value - rhs) / std::abs(rhs);
    const double qerr = lhs.error / std::abs(rhs);
    r.details = {{"y", y}, {"y2", y2}, {"lhs", lhs.value}, {"rhs", rhs}, {"quadrature_rel_error", qerr},
                 {"evaluations", lhs.evaluations}, {"converged", lhs.converged}};
    if (r.discrepancy > r.tolerance && r.discrepancy <= tol.inconclusive_factor * qerr) r.status = Status::inconclusive;
    r.wall_seconds = seconds_since(start);
    settle(r);
    return r;
}

VerificationReport check_entrance_law(std::size_t n, double s, double t,
                                      const std::vector<InterlacedPoint>& points, const Tolerances& tol) {
    const auto start = Clock::now();
    if (n != 1) throw CapabilityError("check_entrance_law: implemented for n = 1");
    VerificationReport r;
    r.id = "entrance_law_n1";
    r.inputs = {{"n", n}, {"s", s}, {"t", t}, {"points", points.size()}};
    r.tolerance = tol.semigroup_rel;
    const double radius = 12.0 * std::sqrt(s + t);
    double worst = 0.0, worst_qerr = 0.0;
    json rows = json::array();
    for (const auto& w2 : points) {
        const double lo = w2.x[0] - radius, hi = w2.x[1] + radius;
        // Flattened over the ordered triple (x1, y, x2).
        auto f = [&](std::span<const double> v) {
            const InterlacedPoint w(OrderedPoint{v[0], v[2]}, OrderedPoint{v[1]});
            const double x[2] = {v[0], v[2]}, y[1] = {v[1]};
            return dens::entrance_nu(w, s).value * dens::detail::q_det(x, y, w2.x.values(), w2.y.values(), t);
        };
        const auto lhs = quadrature::integrate_ordered(f, 3, lo, hi, tight(1e-9, 4000));
        const double rhs = dens::entrance_nu(w2, s + t).value;
        const double rel = std::abs(lhs.value - rhs) / std::abs(rhs);
        const double qerr = lhs.error / std::abs(rhs);
        rows.push_back({{"w2", point_json(w2)}, {"lhs", lhs.value}, {"rhs", rhs}, {"rel_error", rel},
                        {"quadrature_rel_error", qerr}, {"evaluations", lhs.evaluations}});
        if (rel >= worst) {
            worst = rel;
            worst_qerr = qerr;
        }
    }
    r.discrepancy = worst;
    r.details = {{"points", rows}};
    if (worst > r.tolerance && worst <= tol.inconclusive_factor * worst_qerr) r.status = Status::inconclusive;
    r.wall_seconds = seconds_since(start);
    settle(r);
    return r;
}

namespace {

double bump(std::span<const double> v, const BumpSpec& f) {
    double out = 1.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double u = (v[i] - f.center[i]) / f.radius;
        if (std::abs(u) >= 1.0) return 0.0;
        out *= std::exp(-1.0 / (1.0 - u * u));
    }
    return out;
}

} // namespace

VerificationReport check_small_t(std::size_t n, const BumpSpec& f, const std::vector<double>& ts) {
    const auto start = Clock::now();
    VerificationReport r;
    r.id = "small_t_n" + std::to_string(n);
    r.inputs = {{"n", n}, {"center", f.center}, {"radius", f.radius}, {"t", ts}};
    if (ts.size() < 2) throw DomainError("check_small_t: need at least two times");
    std::vector<std::pair<double, double>> box;
    for (double c : f.center) box.emplace_back(c - f.radius, c + f.radius);

    std::function<double(std::span<const double>, double)> kernel;
    if (n == 1) {
        // centre flattened as (x1, x2, y1); the bump box must sit inside the chamber.
        if (f.center.size() != 3) throw DomainError("check_small_t: n = 1 needs a 3-point centre");
        const auto& c = f.center;
        if (!(c[2] - c[0] > 2 * f.radius && c[1] - c[2] > 2 * f.radius))
            throw DomainError("check_small_t: bump support touches the boundary");
        kernel = [c](std::span<const double> v, double t) {
            const double x[2] = {c[0], c[1]}, y[1] = {c[2]};
            const double x2[2] = {v[0], v[1]}, y2[1] = {v[2]};
            return dens::detail::q_det(x, y, x2, y2, t);
        };
    } else if (n == 2) {
        if (f.center.size() != 2) throw DomainError("check_small_t: n = 2 needs a 2-point centre");
        const auto& c = f.center;
        if (!(c[1] - c[0] > 2 * f.radius)) throw DomainError("check_small_t: bump support touches the boundary");
        kernel = [c](std::span<const double> v, double t) { return dens::detail::r_det(c, v, t); };
    } else {
        throw CapabilityError("check_small_t: n must be 1 (q) or 2 (r)");
    }

    const double target = bump(f.center, f);
    std::vector<double> disc;
    json rows = json::array();
    for (double t : ts) {
        auto g = [&](std::span<const double> v) { return kernel(v, t) * bump(v, f); };
        const auto res = quadrature::integrate_box(g, box, quadrature::Options{1e-14, 1e-10, 20000});
        disc.push_back(std::abs(res.value - target));
        rows.push_back({{"t", t}, {"integral", res.value}, {"discrepancy", disc.back()}, {"quadrature_error", res.error}});
    }
    std::size_t violations = 0;
    for (std::size_t i = 1; i < disc.size(); ++i)
        if (!(disc[i] < disc[i - 1])) ++violations;
    r.discrepancy = static_cast<double>(violations);
    r.tolerance = 0.0;
    r.details = {{"f_at_centre", target}, {"sequence", rows}};
    r.wall_seconds = seconds_since(start);
    settle(r);
    return r;
}

VerificationReport check_gue_spectrum(int n, double t, std::size_t samples, std::uint64_t seed,
                                      const Tolerances& tol) {
    const auto start = Clock::now();
    VerificationReport r;
    r.id = "gue_top_eigenvalue";
    r.seed = seed;
    r.inputs = {{"n", n}, {"t", t}, {"samples", samples}};
    std::vector<double> top(samples);
    double trace_sum = 0.0, trace_sq = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        auto rng = rng::PathRng::for_path(seed, i);
        const OrderedPoint spec = simulate::sample_gue_spectrum(n, t, rng);
        top[i] = spec[spec.size() - 1];
        double tr = 0.0;
        for (double v : spec.values()) tr += v;
        trace_sum += tr;
        trace_sq += tr * tr;
    }
    const auto ks = ks_test(top, [&](double x) { return dens::top_eigenvalue_cdf(n, x, t); });
    const double m = trace_sum / static_cast<double>(samples);
    const double se = std::sqrt(std::max(trace_sq / static_cast<double>(samples) - m * m, 0.0) /
                                static_cast<double>(samples));
    r.discrepancy = ks.p_value;
    r.tolerance = tol.p_value;
    r.comparison = "ge";
    r.details = {{"ks", ks_json(ks)}, {"trace_mean", m}, {"trace_mean_se", se}};
    r.wall_seconds = seconds_since(start);
    settle(r);
    return r;
}

VerificationReport check_proposition_interlace(std::size_t n, double t, const simulate::SimConfig& cfg,
                                               const Tolerances& tol) {
    const auto start = Clock::now();
    const auto c = with_horizon(cfg, t);
    VerificationReport r;
    r.id = "proposition_interlace_n" + std::to_string(n);
    r.seed = c.seed;
    r.inputs = {{"n", n}, {"t", t}, {"config", to_json(c)}};
    const auto batch = simulate::simulate_interlaced_pair_plus(n, c);
    const int m = static_cast<int>(n + 1);
    double min_p = 1.0;
    json coords = json::object();
    for (int k = 1; k <= m; ++k) {
        const std::string name = "x" + std::to_string(k);
        const auto col = batch.column(batch.column_index(name));
        KSResult ks;
        if (k == m) ks = ks_test(col, [&](double x) { return dens::top_eigenvalue_cdf(m, x, t); });
        else ks = ks_test(col, [&](double x) { return gue_order_statistic_cdf(m, k, x, t); });
        coords[name] = ks_json(ks);
        min_p = std::min(min_p, ks.p_value);
        if (k == m) r.details["x_max"] = ks_json(ks);
    }
    r.details["coordinates"] = coords;
    r.discrepancy = min_p;
    r.tolerance = tol.p_value;
    r.comparison = "ge";
    r.wall_seconds = seconds_since(start);
    settle(r);
    return r;
}

VerificationReport check_identity_sup(std::size_t n, double t, const simulate::SimConfig& cfg,
                                      const Tolerances& tol) {
    const auto start = Clock::now();
    const auto c = with_horizon(cfg, t);
    VerificationReport r;
    r.id = "identity_sup_n" + std::to_string(n);
    r.seed = c.seed;
    r.inputs = {{"n", n}, {"t", t}, {"config", to_json(c)}};
    const auto batch = simulate::simulate_sup_functional(n, c);
    const auto ks = ks_test(batch.column(0), [&](double x) { return dens::top_eigenvalue_cdf(static_cast<int>(n), x, t); });
    r.discrepancy = ks.statistic;
    r.tolerance = tol.sup_norm;
    r.details = {{"ks", ks_json(ks)}, {"grid_steps", static_cast<std::size_t>(std::llround(t / c.dt))}};
    r.wall_seconds = seconds_since(start);
    settle(r);
    return r;
}

namespace {

// Zeros of He_m: eigenvalues of the Jacobi matrix with off-diagonal sqrt(k).
std::vector<double> hermite_zeros(std::size_t m) {
    if (m == 1) return {0.0};
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    Eigen::VectorXd sub(static_cast<Eigen::Index>(m - 1));
    for (std::size_t k = 1; k < m; ++k) sub(static_cast<Eigen::Index>(k - 1)) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s;
    s.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    std::vector<double> z(s.eigenvalues().data(), s.eigenvalues().data() + m);
    std::sort(z.begin(), z.end());
    return z;
}

} // namespace

VerificationReport check_filtering(std::size_t n, double t, const simulate::SimConfig& cfg, const Tolerances& tol) {
    const auto start = Clock::now();
    if (n < 1 || n > 2) throw CapabilityError("check_filtering: implemented for n = 1, 2");
    const auto c = with_horizon(cfg, t);
    VerificationReport r;
    r.id = "filtering_n" + std::to_string(n);
    r.seed = c.seed;
    r.inputs = {{"n", n}, {"t", t}, {"config", to_json(c)}};
    const auto batch = simulate::simulate_interlaced_pair_plus(n, c);

    std::vector<double> centre = hermite_zeros(n + 1);
    for (auto& v : centre) v *= std::sqrt(t);
    const double half = tol.filter_box * std::sqrt(t);
    const std::size_t m = n == 1 ? 5 : 3; // splits per coordinate
    const std::size_t cells = n == 1 ? m : m * m;
    std::vector<double> observed(cells, 0.0), expected(cells, 0.0);
    std::size_t selected = 0;

    for (std::size_t p = 0; p < batch.n_paths; ++p) {
        const auto row = batch.row(p);
        bool inside = true;
        for (std::size_t i = 0; i <= n; ++i) inside = inside && std::abs(row[i] - centre[i]) <= half;
        if (!inside) continue;
        ++selected;
        const double* x = row.data();
        const double* y = row.data() + n + 1;
        auto cell_of = [&](std::size_t i) {
            const double u = (y[i] - x[i]) / (x[i + 1] - x[i]);
            return std::min(m - 1, static_cast<std::size_t>(std::max(0.0, u) * static_cast<double>(m)));
        };
        if (n == 1) {
            observed[cell_of(0)] += 1.0;
            for (auto& e : expected) e += 1.0 / static_cast<double>(m);
        } else {
            observed[cell_of(0) * m + cell_of(1)] += 1.0;
            // lambda = 2 (y2 - y1) / h_3(x) on [x1, x2] x [x2, x3].
            const double h3 = (x[1] - x[0]) * (x[2] - x[0]) * (x[2] - x[1]);
            const double w1 = (x[1] - x[0]) / static_cast<double>(m), w2 = (x[2] - x[1]) / static_cast<double>(m);
            for (std::size_t a = 0; a < m; ++a) {
                for (std::size_t b = 0; b < m; ++b) {
                    const double mid1 = x[0] + (static_cast<double>(a) + 0.5) * w1;
                    const double mid2 = x[1] + (static_cast<double>(b) + 0.5) * w2;
                    expected[a * m + b] += 2.0 * w1 * w2 * (mid2 - mid1) / h3;
                }
            }
        }
    }
    r.tolerance = tol.p_value;
    r.comparison = "ge";
    r.details = {{"box_centre", centre}, {"box_half_width", half}, {"selected_paths", selected},
                 {"observed", observed}, {"expected", expected}};
    const bool enough = std::all_of(expected.begin(), expected.end(), [](double e) { return e >= 5.0; });
    if (!enough) {
        r.discrepancy = 0.0;
        r.status = Status::inconclusive;
        r.details["reason"] = "fewer than 5 expected paths in some cell";
    } else {
        const auto chi = chi_square(observed, expected);
        r.discrepancy = chi.p_value;
        r.details["chi_square"] = {{"statistic", chi.statistic}, {"dof", chi.dof}, {"p_value", chi.p_value}};
    }
    r.wall_seconds = seconds_since(start);
    settle(r);
    return r;
}

VerificationReport check_coalescing(const OrderedPoint& z, const std::vector<OrderedPoint>& grid, double t,
                                    const simulate::SimConfig& cfg, const Tolerances& tol) {
    const auto start = Clock::now();
    const auto c = with_horizon(cfg, t);
    VerificationReport r;
    r.id = "coalescing_n" + std::to_string(z.size());
    r.seed = c.seed;
    r.inputs = {{"z", z.vector()}, {"t", t}, {"grid_points", grid.size()}, {"config", to_json(c)}};
    const auto batch = simulate::simulate_coalescing(z, c);
    const double N = static_cast<double>(batch.n_paths);
    double worst = 0.0;
    json rows = json::array();
    for (const auto& z2 : grid) {
        if (z2.size() != z.size()) throw DomainError("check_coalescing: grid point has the wrong dimension");
        std::size_t hits = 0;
        for (std::size_t p = 0; p < batch.n_paths; ++p) {
            bool below = true;
            for (std::size_t i = 0; i < z.size(); ++i) below = below && batch.at(p, i) <= z2[i];
            hits += below;
        }
        const double emp = static_cast<double>(hits) / N;
        const double exact = dens::coalescing_cdf(z, z2, t);
        const double se = std::max(std::sqrt(exact * (1.0 - exact) / N), 1.0 / N);
        const double score = std::abs(emp - exact) / se;
        worst = std::max(worst, score);
        rows.push_back({{"z2", z2.vector()}, {"empirical", emp}, {"exact", exact}, {"se", se}, {"score", score}});
    }
    r.discrepancy = worst;
    r.tolerance = tol.binomial_se;
    r.details = {{"grid", rows}};
    r.wall_seconds = seconds_since(start);
    settle(r);
    return r;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"all",      "pde",        "intertwine", "entrance",
                                                   "interlace", "identity",  "coalescing", "filtering",
                                                   "duality",  "small_t"};
    return names;
}

namespace {

simulate::SimConfig suite_sim(const SuiteConfig& s, std::uint64_t default_seed, double default_dt = 1e-4) {
    simulate::SimConfig c;
    c.n_paths = s.paths.value_or(100000);
    c.dt = s.dt.value_or(default_dt);
    c.seed = s.seed.value_or(default_seed);
    c.threads = s.threads;
    return c;
}

std::vector<OrderedPoint> coalescing_grid_n2() {
    std::vector<OrderedPoint> g;
    for (double a : {-1.0, -0.5, 0.0, 0.25, 0.5})
        for (double b : {0.5, 0.75, 1.0, 1.5, 2.0}) g.push_back(OrderedPoint{a, b});
    return g;
}

} // namespace

std::vector<VerificationReport> run_suite(const std::string& suite, const SuiteConfig& s) {
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), suite) == names.end())
        throw DomainError("unknown verification suite: " + suite);
    const bool all = suite == "all";
    const Tolerances& tol = s.tolerances;
    std::vector<VerificationReport> out;

    if (all || suite == "pde") out.push_back(check_pde_and_boundaries(0.7, 1e-2, 1e-4, tol));
    if (all || suite == "duality") out.push_back(check_duality(3, 100, s.seed.value_or(17), tol));
    if (all || suite == "intertwine") {
        out.push_back(check_intertwining(1, random_intertwining_cases(1, 20, s.seed.value_or(18)), tol));
        out.push_back(check_intertwining(2, random_intertwining_cases(2, 3, s.seed.value_or(19)), tol));
    }
    if (all || suite == "entrance") {
        out.push_back(check_chapman_kolmogorov("km_plus", 0.3, 0.7, tol));
        out.push_back(check_chapman_kolmogorov("r", 0.3, 0.7, tol));
        out.push_back(check_entrance_law(1, 0.3, 0.7,
                                         {InterlacedPoint({-0.8, 0.9}, {0.1}), InterlacedPoint({-0.3, 1.4}, {0.6})},
                                         tol));
    }
    if (all || suite == "small_t") {
        const std::vector<double> ts{1e-1, 1e-2, 1e-3};
        out.push_back(check_small_t(1, BumpSpec{{-1.5, 1.5, 0.0}, 0.5}, ts));
        out.push_back(check_small_t(2, BumpSpec{{-1.0, 1.0}, 0.5}, ts));
    }
    if (all || suite == "interlace") {
        out.push_back(check_gue_spectrum(3, 1.0, s.paths.value_or(100000), s.seed.value_or(13), tol));
        out.push_back(check_proposition_interlace(1, 1.0, suite_sim(s, 11), tol));
    }
    if (all || suite == "identity") out.push_back(check_identity_sup(3, 1.0, suite_sim(s, 12), tol));
    if (all || suite == "coalescing") {
        out.push_back(check_coalescing({0.0, 0.5}, coalescing_grid_n2(), 1.0, suite_sim(s, 14), tol));
        out.push_back(check_coalescing({0.0, 0.5, 1.0},
                                       {OrderedPoint{0.0, 0.5, 1.0}, OrderedPoint{-0.5, 0.7, 1.5},
                                        OrderedPoint{0.3, 0.6, 2.0}},
                                       1.0, suite_sim(s, 15), tol));
    }
    if (all || suite == "filtering") out.push_back(check_filtering(1, 1.0, suite_sim(s, 16, 1e-3), tol));
    return out;
}

} // namespace interlace::verify
