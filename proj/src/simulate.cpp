#include "interlace/simulate.h"

#include "interlace/error.h"
#include "simulate_internal.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

namespace interlace::simulate {

void SimConfig::validate() const {
    if (!(horizon_t > 0.0) || !std::isfinite(horizon_t))
        throw DomainError("horizon_t must be finite and > 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be finite and > 0");
    if (!(dt < horizon_t)) throw DomainError("dt must be smaller than horizon_t");
    if (n_paths < 1) throw DomainError("n_paths must be >= 1");
    const StartMode mode = start_mode();
    if (const auto* e = std::get_if<EntranceStart>(&mode)) {
        if (!(e->t0 > 0.0 && e->t0 < horizon_t))
            throw DomainError("EntranceStart needs 0 < t0 < horizon_t");
    } else {
        const auto& s = std::get<SpreadStart>(mode);
        if (!(s.epsilon >= 0.0) || !std::isfinite(s.epsilon))
            throw DomainError("SpreadStart epsilon must be finite and >= 0");
    }
}

StartMode SimConfig::start_mode() const {
    return start ? *start : StartMode{EntranceStart{1e-3 * horizon_t}};
}

unsigned SimConfig::resolved_threads() const {
    if (threads > 0) return threads;
    if (const char* env = std::getenv("INTERLACE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::span<const double> PathBatch::row(std::size_t path) const {
    return std::span<const double>(terminal).subspan(path * dim(), dim());
}

std::vector<double> PathBatch::column(std::size_t col) const {
    std::vector<double> out(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) out[p] = at(p, col);
    return out;
}

std::size_t PathBatch::column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw DomainError("no column named " + name);
    return static_cast<std::size_t>(it - columns.begin());
}

namespace {

struct Grid {
    double t_start = 0.0;
    std::size_t steps = 0;
    double h = 0.0;
    std::vector<std::size_t> recorded; // step indices kept in stored paths
};

Grid make_grid(const SimConfig& cfg, double t_start) {
    Grid g;
    g.t_start = t_start;
    const double span = cfg.horizon_t - t_start;
    g.steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(span / cfg.dt)));
    g.h = span / static_cast<double>(g.steps);
    if (cfg.store_every > 0) {
        for (std::size_t s = 0; s <= g.steps; s += cfg.store_every) g.recorded.push_back(s);
        if (g.recorded.back() != g.steps) g.recorded.push_back(g.steps);
    }
    return g;
}

double start_time(const SimConfig& cfg) {
    const StartMode mode = cfg.start_mode();
    if (const auto* e = std::get_if<EntranceStart>(&mode)) return e->t0;
    return 0.0;
}

PathBatch make_batch(const SimConfig& cfg, std::vector<std::string> columns, const Grid& g) {
    PathBatch b;
    b.columns = std::move(columns);
    b.n_paths = cfg.n_paths;
    b.seed = cfg.seed;
    b.config = cfg;
    b.terminal.assign(cfg.n_paths * b.dim(), 0.0);
    for (std::size_t s : g.recorded) b.grid_times.push_back(g.t_start + g.h * static_cast<double>(s));
    b.paths.assign(cfg.n_paths * b.grid_times.size() * b.dim(), 0.0);
    return b;
}

rng::PathRng path_rng(const SimConfig& cfg, std::size_t path) {
    return cfg.noise == Noise::zero ? rng::PathRng::zero() : rng::PathRng::for_path(cfg.seed, path);
}

// Runs body(path) for every path. Each path writes only its own slots, so the
// result does not depend on the number of workers.
template <class Body>
void for_each_path(const SimConfig& cfg, Body&& body) {
    const std::size_t n = cfg.n_paths;
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(cfg.resolved_threads(), n));
    if (workers <= 1) {
        for (std::size_t p = 0; p < n; ++p) body(p);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t p = w; p < n; p += workers) body(p);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// Writes the state into the terminal row and, at recorded steps, the path store.
class Writer {
public:
    Writer(PathBatch& b, const Grid& g, std::size_t path) : b_(b), g_(g), path_(path) {}

    void maybe_record(std::size_t step, const std::vector<double>& state) {
        if (next_ < g_.recorded.size() && g_.recorded[next_] == step) {
            const std::size_t base = (path_ * b_.grid_times.size() + next_) * b_.dim();
            std::copy(state.begin(), state.end(), b_.paths.begin() + static_cast<std::ptrdiff_t>(base));
            ++next_;
        }
    }
    void finish(const std::vector<double>& state) {
        std::copy(state.begin(), state.end(),
                  b_.terminal.begin() + static_cast<std::ptrdiff_t>(path_ * b_.dim()));
    }

private:
    PathBatch& b_;
    const Grid& g_;
    std::size_t path_;
    std::size_t next_ = 0;
};

std::vector<std::string> named(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

void append(std::vector<std::string>& a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
}

// Reflects every X_i off its Y neighbours for one step; Y moves from y0 to y1.
void reflect_x(std::vector<double>& x, const std::vector<double>& y0, const std::vector<double>& y1,
               double h, bool bridge, rng::PathRng& rng, std::vector<double>& lm,
               std::vector<double>& lp) {
    const std::size_t n = y0.size();
    const double s = std::sqrt(h);
    for (std::size_t i = 0; i <= n; ++i) {
        std::optional<MovingBarrier> lower, upper;
        if (i > 0) lower = MovingBarrier{y0[i - 1], y1[i - 1]};
        if (i < n) upper = MovingBarrier{y0[i], y1[i]};
        const double inc = s * rng.normal();
        StepResult r;
        if (bridge) {
            r = reflect_bridge(x[i], inc, lower, upper, 2.0 * h, rng);
        } else {
            r = skorokhod_step(x[i], inc, lower ? std::optional<double>(lower->end) : std::nullopt,
                               upper ? std::optional<double>(upper->end) : std::nullopt);
        }
        x[i] = r.value;
        lm[i] += r.dl_minus;
        lp[i] += r.dl_plus;
    }
}

[[maybe_unused]] bool pair_interlaced(const std::vector<double>& x, const std::vector<double>& y) {
    return interlaces(x, y);
}

InterlacedPoint spread_pair(std::size_t n, double eps) {
    // 2n+1 points eps apart centred at 0, alternating x, y.
    std::vector<double> x(n + 1), y(n);
    const double c = static_cast<double>(n);
    for (std::size_t i = 0; i <= n; ++i) x[i] = eps * (2.0 * static_cast<double>(i) - c);
    for (std::size_t i = 0; i < n; ++i) y[i] = eps * (2.0 * static_cast<double>(i) + 1.0 - c);
    return InterlacedPoint(OrderedPoint(std::move(x)), OrderedPoint(std::move(y)));
}

std::vector<double> spread_row(std::size_t k, double eps) {
    std::vector<double> r(k);
    for (std::size_t i = 0; i < k; ++i)
        r[i] = eps * (2.0 * static_cast<double>(i + 1) - static_cast<double>(k) - 1.0);
    return r;
}

enum class YDynamics { stopped_free, dyson };

PathBatch run_pair(std::size_t n, const SimConfig& cfg, const std::optional<InterlacedPoint>& fixed,
                   YDynamics dyn) {
    cfg.validate();
    const double t_start = fixed ? 0.0 : start_time(cfg);
    const Grid g = make_grid(cfg, t_start);

    std::vector<std::string> cols = named("x", n + 1);
    append(cols, named("y", n));
    if (dyn == YDynamics::stopped_free) cols.push_back("stopped");
    append(cols, named("lminus", n + 1));
    append(cols, named("lplus", n + 1));
    PathBatch b = make_batch(cfg, cols, g);
    const StartMode mode = cfg.start_mode();

    for_each_path(cfg, [&](std::size_t p) {
        rng::PathRng rng = path_rng(cfg, p);
        std::vector<double> x, y;
        if (fixed) {
            x = fixed->x.vector();
            y = fixed->y.vector();
        } else if (const auto* e = std::get_if<EntranceStart>(&mode)) {
            x = sample_gue_spectrum(static_cast<int>(n + 1), e->t0, rng).vector();
            y = sample_lambda_row(x, rng);
        } else {
            const InterlacedPoint w = spread_pair(n, std::get<SpreadStart>(mode).epsilon);
            x = w.x.vector();
            y = w.y.vector();
        }
        std::vector<double> lm(n + 1, 0.0), lp(n + 1, 0.0), y1(n), state;
        bool stopped = false;
        const double s = std::sqrt(g.h);

        auto snapshot = [&] {
            state.assign(x.begin(), x.end());
            state.insert(state.end(), y.begin(), y.end());
            if (dyn == YDynamics::stopped_free) state.push_back(stopped ? 1.0 : 0.0);
            state.insert(state.end(), lm.begin(), lm.end());
            state.insert(state.end(), lp.begin(), lp.end());
        };
        Writer out(b, g, p);
        snapshot();
        out.maybe_record(0, state);

        for (std::size_t step = 1; step <= g.steps; ++step) {
            if (!stopped) {
                if (dyn == YDynamics::dyson) {
                    y1 = y;
                    if (n > 0) internal::dyson_advance(y1, g.h, rng);
                } else {
                    for (std::size_t i = 0; i < n; ++i) y1[i] = y[i] + s * rng.normal();
                    for (std::size_t i = 0; i + 1 < n && !stopped; ++i) {
                        const double g0 = y[i + 1] - y[i];
                        const double g1 = y1[i + 1] - y1[i];
                        if (g1 <= 0.0) {
                            stopped = true;
                        } else if (cfg.bridge_correction && rng.uniform() < std::exp(-g0 * g1 / g.h)) {
                            stopped = true;
                        }
                    }
                }
                if (!stopped) {
                    reflect_x(x, y, y1, g.h, cfg.bridge_correction, rng, lm, lp);
                    y.swap(y1);
                    assert(pair_interlaced(x, y));
                }
            }
            if (!g.recorded.empty()) {
                snapshot();
                out.maybe_record(step, state);
            }
        }
        snapshot();
        out.finish(state);
    });
    return b;
}

} // namespace

PathBatch simulate_interlaced_pair(const InterlacedPoint& start, const SimConfig& cfg) {
    return run_pair(start.level(), cfg, start, YDynamics::stopped_free);
}

PathBatch simulate_interlaced_pair_plus(const InterlacedPoint& start, const SimConfig& cfg) {
    if (!start.y.strictly_increasing())
        throw DomainError("simulate_interlaced_pair_plus: y must be strictly increasing");
    return run_pair(start.level(), cfg, start, YDynamics::dyson);
}

PathBatch simulate_interlaced_pair_plus(std::size_t n, const SimConfig& cfg) {
    const StartMode mode = cfg.start_mode();
    if (const auto* s = std::get_if<SpreadStart>(&mode); s && !(s->epsilon > 0.0) && n > 1)
        throw DomainError("SpreadStart needs epsilon > 0 for a non-colliding start");
    return run_pair(n, cfg, std::nullopt, YDynamics::dyson);
}

namespace {

PathBatch run_dyson(std::size_t n, const SimConfig& cfg, const std::optional<OrderedPoint>& fixed) {
    cfg.validate();
    if (n < 1) throw DomainError("simulate_dyson: n must be >= 1");
    const Grid g = make_grid(cfg, fixed ? 0.0 : start_time(cfg));
    PathBatch b = make_batch(cfg, named("y", n), g);
    const StartMode mode = cfg.start_mode();

    for_each_path(cfg, [&](std::size_t p) {
        rng::PathRng rng = path_rng(cfg, p);
        std::vector<double> y;
        if (fixed) {
            y = fixed->vector();
        } else if (const auto* e = std::get_if<EntranceStart>(&mode)) {
            y = sample_gue_spectrum(static_cast<int>(n), e->t0, rng).vector();
        } else {
            y = spread_row(n, std::get<SpreadStart>(mode).epsilon);
        }
        Writer out(b, g, p);
        out.maybe_record(0, y);
        for (std::size_t step = 1; step <= g.steps; ++step) {
            internal::dyson_advance(y, g.h, rng);
            out.maybe_record(step, y);
        }
        out.finish(y);
    });
    return b;
}

} // namespace

PathBatch simulate_dyson(std::size_t n, const SimConfig& cfg) {
    const StartMode mode = cfg.start_mode();
    if (const auto* s = std::get_if<SpreadStart>(&mode); s && !(s->epsilon > 0.0) && n > 1)
        throw DomainError("SpreadStart needs epsilon > 0 for a non-colliding start");
    return run_dyson(n, cfg, std::nullopt);
}

PathBatch simulate_dyson(const OrderedPoint& start, const SimConfig& cfg) {
    if (start.empty() || !start.strictly_increasing())
        throw DomainError("simulate_dyson: start must be non-empty and strictly increasing");
    return run_dyson(start.size(), cfg, start);
}

PathBatch simulate_gt_cone(std::size_t n, const SimConfig& cfg) {
    cfg.validate();
    if (n < 1) throw DomainError("simulate_gt_cone: n must be >= 1");
    const Grid g = make_grid(cfg, start_time(cfg));
    std::vector<std::string> cols;
    for (std::size_t k = 1; k <= n; ++k)
        for (std::size_t i = 1; i <= k; ++i) cols.push_back("x" + std::to_string(k) + "_" + std::to_string(i));
    PathBatch b = make_batch(cfg, cols, g);
    const StartMode mode = cfg.start_mode();

    for_each_path(cfg, [&](std::size_t p) {
        rng::PathRng rng = path_rng(cfg, p);
        std::vector<std::vector<double>> rows(n);
        if (const auto* e = std::get_if<EntranceStart>(&mode)) {
            const GTPattern pat = sample_gt_pattern(sample_gue_spectrum(static_cast<int>(n), e->t0, rng), rng);
            for (std::size_t k = 1; k <= n; ++k) rows[k - 1].assign(pat.row(k).begin(), pat.row(k).end());
        } else {
            for (std::size_t k = 1; k <= n; ++k) rows[k - 1] = spread_row(k, std::get<SpreadStart>(mode).epsilon);
        }
        std::vector<double> state, prev_row;
        auto snapshot = [&] {
            state.clear();
            for (const auto& r : rows) state.insert(state.end(), r.begin(), r.end());
        };
        Writer out(b, g, p);
        snapshot();
        out.maybe_record(0, state);

        const double s = std::sqrt(g.h);
        for (std::size_t step = 1; step <= g.steps; ++step) {
            // prev_row keeps row k-1 at the start of the step while rows[k-2] already holds its end.
            prev_row = rows[0];
            rows[0][0] += s * rng.normal();
            for (std::size_t k = 2; k <= n; ++k) {
                std::vector<double>& row = rows[k - 1];
                const std::vector<double>& below_end = rows[k - 2];
                const std::vector<double> below_start = prev_row;
                prev_row = row;
                for (std::size_t i = 0; i < k; ++i) {
                    std::optional<MovingBarrier> lower, upper;
                    if (i > 0) lower = MovingBarrier{below_start[i - 1], below_end[i - 1]};
                    if (i + 1 < k) upper = MovingBarrier{below_start[i], below_end[i]};
                    const double inc = s * rng.normal();
                    if (cfg.bridge_correction) {
                        row[i] = reflect_bridge(row[i], inc, lower, upper, 2.0 * g.h, rng).value;
                    } else {
                        row[i] = skorokhod_step(row[i], inc,
                                                lower ? std::optional<double>(lower->end) : std::nullopt,
                                                upper ? std::optional<double>(upper->end) : std::nullopt)
                                     .value;
                    }
                }
                assert(interlaces(row, below_end));
            }
            if (!g.recorded.empty()) {
                snapshot();
                out.maybe_record(step, state);
            }
        }
        snapshot();
        out.finish(state);
    });
    return b;
}

PathBatch simulate_sup_functional(std::size_t n, const SimConfig& cfg) {
    if (n < 1) throw DomainError("simulate_sup_functional: n must be >= 1");
    SimConfig c = cfg;
    c.start = SpreadStart{0.0};
    c.store_every = 0;
    c.validate();
    const Grid g = make_grid(c, 0.0);
    PathBatch b = make_batch(c, {"sup"}, g);
    b.config = cfg;

    for_each_path(c, [&](std::size_t p) {
        rng::PathRng rng = path_rng(c, p);
        std::vector<double> inc(g.steps * n);
        const double s = std::sqrt(g.h);
        for (auto& v : inc) v = s * rng.normal();
        b.terminal[p] = c.bridge_correction ? sup_functional_bridge(inc, n, g.h, rng) : sup_functional(inc, n);
    });
    return b;
}

PathBatch simulate_coalescing(const OrderedPoint& z, const SimConfig& cfg) {
    if (z.empty()) throw DomainError("simulate_coalescing: empty start");
    SimConfig c = cfg;
    c.start = SpreadStart{0.0};
    c.validate();
    const std::size_t n = z.size();
    const Grid g = make_grid(c, 0.0);
    PathBatch b = make_batch(c, named("z", n), g);
    b.config = cfg;

    for_each_path(c, [&](std::size_t p) {
        rng::PathRng rng = path_rng(c, p);
        std::vector<double> pos = z.vector(), next(n);
        // owner[i]: lowest index of the cluster containing i.
        std::vector<std::size_t> owner(n);
        for (std::size_t i = 0; i < n; ++i) owner[i] = (i > 0 && pos[i] == pos[i - 1]) ? owner[i - 1] : i;

        Writer out(b, g, p);
        out.maybe_record(0, pos);
        const double s = std::sqrt(g.h);
        for (std::size_t step = 1; step <= g.steps; ++step) {
            for (std::size_t i = 0; i < n; ++i)
                next[i] = owner[i] == i ? pos[i] + s * rng.normal() : next[owner[i]];
            // Scan adjacent clusters bottom-up; a merge hands the upper cluster to the lower owner.
            for (std::size_t i = 1; i < n; ++i) {
                if (owner[i] == owner[i - 1] || owner[i] != i) continue;
                const std::size_t lo = owner[i - 1];
                const double g0 = pos[i] - pos[lo];
                const double g1 = next[i] - next[lo];
                bool merge = g1 <= 0.0;
                if (!merge && c.bridge_correction) merge = rng.uniform() < std::exp(-g0 * g1 / g.h);
                if (merge) {
                    for (std::size_t j = i; j < n && owner[j] == i; ++j) {
                        owner[j] = lo;
                        next[j] = next[lo];
                    }
                }
            }
            pos.swap(next);
            assert(std::is_sorted(pos.begin(), pos.end()));
            out.maybe_record(step, pos);
        }
        out.finish(pos);
    });
    return b;
}

} // namespace interlace::simulate
