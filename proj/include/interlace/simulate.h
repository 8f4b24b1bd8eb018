#pragma once

#include "interlace/points.h"
#include "interlace/rng.h"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace interlace::simulate {

// Deterministic, strictly interlaced start at time 0 with spacing epsilon.
struct SpreadStart {
    double epsilon = 1e-2;
};
// Exact sample from the entrance law at time t0, then evolve to the horizon.
struct EntranceStart {
    double t0 = 0.0;
};
using StartMode = std::variant<SpreadStart, EntranceStart>;

enum class Noise { gaussian, zero };

struct SimConfig {
    double horizon_t = 1.0;
    double dt = 1e-4;
    std::size_t n_paths = 1000;
    std::uint64_t seed = 1;
    bool bridge_correction = true;
    // Unset means EntranceStart{1e-3 * horizon_t}.
    std::optional<StartMode> start;
    // 0: INTERLACE_THREADS from the environment, else hardware concurrency.
    unsigned threads = 0;
    // Record the state every store_every steps (0: terminal samples only).
    std::size_t store_every = 0;
    Noise noise = Noise::gaussian;

    void validate() const;
    StartMode start_mode() const;
    unsigned resolved_threads() const;
};

struct PathBatch {
    std::vector<std::string> columns;
    std::size_t n_paths = 0;
    std::vector<double> terminal; // n_paths x columns.size(), row-major
    std::vector<double> grid_times;
    std::vector<double> paths; // n_paths x grid_times.size() x columns.size()
    std::uint64_t seed = 0;
    SimConfig config;

    std::size_t dim() const { return columns.size(); }
    std::span<const double> row(std::size_t path) const;
    double at(std::size_t path, std::size_t col) const { return terminal[path * dim() + col]; }
    std::vector<double> column(std::size_t col) const;
    std::size_t column_index(const std::string& name) const;
};

struct StepResult {
    double value = 0.0;
    double dl_minus = 0.0; // pushed up from the lower barrier
    double dl_plus = 0.0;  // pushed down from the upper barrier
};

// Free increment followed by the two-sided Skorokhod projection onto
// [lower, upper]. Throws DomainError when lower > upper.
StepResult skorokhod_step(double value, double increment, std::optional<double> lower,
                          std::optional<double> upper);

// Barrier for one reflected coordinate over a step: position at the start and
// the end of the step.
struct MovingBarrier {
    double start;
    double end;
};

// Reflection with Brownian-bridge extremes: the gap to each barrier is treated
// as a Brownian bridge with the given variance over the step, its extreme is
// sampled exactly given the endpoints, and the barrier pushes by the amount
// the bridge would have overshot. Exact when there is a single barrier driven
// by Brownian motion.
StepResult reflect_bridge(double value, double increment, std::optional<MovingBarrier> lower,
                          std::optional<MovingBarrier> upper, double gap_variance,
                          rng::PathRng& rng);

// Euler-Maruyama step of the Dyson SDE with drift sum_{j != i} 1/(y_i - y_j).
// A step that would break the ordering is split in two by Brownian-bridge
// refinement of its increment, down to dt * 2^-20; below that the increment
// is redrawn.
std::vector<double> dyson_step(std::span<const double> y, double dt, rng::PathRng& rng);

// Eigenvalues of the beta = 2 tridiagonal ensemble scaled by sqrt(t): an
// exact draw from the GUE entrance law at time t, sorted ascending.
OrderedPoint sample_gue_spectrum(int n, TimeParam t, rng::PathRng& rng);

// One draw of y from lambda(x, .) on W^n(x) by rejection from the uniform
// distribution on the box prod [x_i, x_{i+1}]. proposals (if given) receives
// the number of proposals used.
std::vector<double> sample_lambda_row(std::span<const double> x, rng::PathRng& rng,
                                      std::size_t* proposals = nullptr);

// Uniform point of the cone below `top`, drawn row by row from lambda.
GTPattern sample_gt_pattern(const OrderedPoint& top, rng::PathRng& rng);

// Largest value of sum_i {B_i(t_i) - B_i(t_{i-1})} over 0 = t_0 <= ... <= t_n = T on
// the grid; increments are step-major (increments[s * n + i] is B_i's s-th step).
double sup_functional(std::span<const double> increments, std::size_t n);

// The same recursion with the within-step running maximum of M_{k-1} - B_k
// drawn as the maximum of a Brownian bridge (variance 2 dt per step) between
// the grid values instead of the larger endpoint. Exact in law for n = 2; for
// higher levels the bridge ignores pushes of M_{k-1} inside the step.
double sup_functional_bridge(std::span<const double> increments, std::size_t n, double dt,
                             rng::PathRng& rng);

// Columns x1..x{n+1}, y1..yn, stopped. Y is free Brownian motion stopped at
// the first collision; X reflected off Y.
PathBatch simulate_interlaced_pair(const InterlacedPoint& start, const SimConfig& cfg);

// Y follows the Dyson SDE, X reflected off Y; no stopping. The first overload
// starts from the given point, the second from cfg's start mode.
PathBatch simulate_interlaced_pair_plus(const InterlacedPoint& start, const SimConfig& cfg);
PathBatch simulate_interlaced_pair_plus(std::size_t n, const SimConfig& cfg);

PathBatch simulate_dyson(std::size_t n, const SimConfig& cfg);
PathBatch simulate_dyson(const OrderedPoint& start, const SimConfig& cfg);

// Reflected process on the Gelfand-Tsetlin cone; columns x{k}_{i} row by row.
PathBatch simulate_gt_cone(std::size_t n, const SimConfig& cfg);

// One column "sup": the sup functional of n independent Brownian motions on
// [0, horizon] with round(horizon / dt) grid steps, bridge-corrected when
// cfg.bridge_correction is set.
PathBatch simulate_sup_functional(std::size_t n, const SimConfig& cfg);

// Coalescing Brownian motions started at z; columns z1..zn.
PathBatch simulate_coalescing(const OrderedPoint& z, const SimConfig& cfg);

} // namespace interlace::simulate
