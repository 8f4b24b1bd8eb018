#include "interlace/error.h"
#include "interlace/simulate.h"
#include "simulate_internal.h"

#include <algorithm>
#include <cmath>

namespace interlace::simulate {

namespace internal {

double bridge_min_for_crossing(double g0, double g1, double variance, rng::PathRng& rng) {
    g0 = std::max(g0, 0.0);
    if (g1 > 0.0 && 2.0 * g0 * g1 > 40.0 * variance) return std::min(g0, g1);
    const double u = rng.uniform();
    const double d = g1 - g0;
    return 0.5 * (g0 + g1 - std::sqrt(d * d - 2.0 * variance * std::log(u)));
}

namespace {

constexpr int kMaxHalvings = 20;
constexpr int kMaxRedraws = 10000;

bool strictly_ordered(const std::vector<double>& y) {
    for (std::size_t i = 1; i < y.size(); ++i)
        if (!(y[i - 1] < y[i])) return false;
    return true;
}

void euler(const std::vector<double>& y, double dt, const std::vector<double>& db,
           std::vector<double>& out) {
    const std::size_t n = y.size();
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double drift = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) drift += 1.0 / (y[i] - y[j]);
        out[i] = y[i] + drift * dt + db[i];
    }
}

// Advances y over dt with the Brownian increment db; false if the ordering
// could not be kept even at the finest sub-step.
bool advance_with(std::vector<double>& y, double dt, const std::vector<double>& db, int depth,
                  rng::PathRng& rng) {
    std::vector<double> trial;
    euler(y, dt, db, trial);
    if (strictly_ordered(trial)) {
        y.swap(trial);
        return true;
    }
    if (depth >= kMaxHalvings) return false;
    // Brownian-bridge midpoint: first half ~ db/2 + N(0, dt/4).
    std::vector<double> first(db.size()), second(db.size());
    const double s = std::sqrt(dt / 4.0);
    for (std::size_t i = 0; i < db.size(); ++i) {
        first[i] = 0.5 * db[i] + s * rng.normal();
        second[i] = db[i] - first[i];
    }
    std::vector<double> saved = y;
    if (advance_with(y, dt / 2.0, first, depth + 1, rng) &&
        advance_with(y, dt / 2.0, second, depth + 1, rng)) {
        return true;
    }
    y.swap(saved);
    return false;
}

} // namespace

void dyson_advance(std::vector<double>& y, double dt, rng::PathRng& rng) {
    const double s = std::sqrt(dt);
    std::vector<double> db(y.size());
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        for (auto& v : db) v = s * rng.normal();
        if (y.size() == 1) {
            y[0] += db[0];
            return;
        }
        if (advance_with(y, dt, db, 0, rng)) return;
    }
    throw NumericalError("dyson_step: ordering could not be maintained after redraws");
}

} // namespace internal

StepResult skorokhod_step(double value, double increment, std::optional<double> lower,
                          std::optional<double> upper) {
    if (lower && upper && *lower > *upper) {
        throw DomainError("skorokhod_step: lower barrier above upper barrier");
    }
    StepResult r{value + increment, 0.0, 0.0};
    // Alternate the one-sided maps until neither barrier moves the point.
    for (int iter = 0; iter < 64; ++iter) {
        bool moved = false;
        if (lower && r.value < *lower) {
            r.dl_minus += *lower - r.value;
            r.value = *lower;
            moved = true;
        }
        if (upper && r.value > *upper) {
            r.dl_plus += r.value - *upper;
            r.value = *upper;
            moved = true;
        }
        if (!moved) break;
    }
    return r;
}

StepResult reflect_bridge(double value, double increment, std::optional<MovingBarrier> lower,
                          std::optional<MovingBarrier> upper, double gap_variance,
                          rng::PathRng& rng) {
    if (lower && upper && lower->end > upper->end) {
        throw DomainError("reflect_bridge: lower barrier above upper barrier");
    }
    const double free_end = value + increment;
    double push_up = 0.0, push_down = 0.0;
    if (lower) {
        const double m = internal::bridge_min_for_crossing(value - lower->start, free_end - lower->end,
                                                           gap_variance, rng);
        push_up = std::max(0.0, -m);
    }
    if (upper) {
        const double m = internal::bridge_min_for_crossing(upper->start - value, upper->end - free_end,
                                                           gap_variance, rng);
        push_down = std::max(0.0, -m);
    }
    // Net the two pushes so at most one local time grows in a step, then
    // project onto the end-of-step interval.
    const double net = push_up - push_down;
    StepResult r = skorokhod_step(free_end, net,
                                  lower ? std::optional<double>(lower->end) : std::nullopt,
                                  upper ? std::optional<double>(upper->end) : std::nullopt);
    double up = std::max(net, 0.0) + r.dl_minus;
    double down = std::max(-net, 0.0) + r.dl_plus;
    const double common = std::min(up, down);
    r.dl_minus = up - common;
    r.dl_plus = down - common;
    return r;
}

std::vector<double> dyson_step(std::span<const double> y, double dt, rng::PathRng& rng) {
    if (!(dt > 0.0)) throw DomainError("dyson_step: dt must be > 0");
    std::vector<double> v(y.begin(), y.end());
    if (v.empty()) throw DomainError("dyson_step: empty state");
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i - 1] < v[i])) throw DomainError("dyson_step: state is not strictly ordered");
    }
    internal::dyson_advance(v, dt, rng);
    return v;
}

} // namespace interlace::simulate
