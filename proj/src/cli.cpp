#include "interlace/cli.h"

#include "interlace/densities.h"
#include "interlace/error.h"
#include "interlace/simulate.h"
#include "interlace/verify.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

namespace interlace::cli {

using nlohmann::json;
namespace dens = interlace::densities;
namespace sim = interlace::simulate;

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double parse_double(const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw DomainError("not a number: '" + text + "'");
    }
    if (used != text.size()) throw DomainError("not a number: '" + text + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(item);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    if (s.empty()) return out;
    for (const auto& item : split(s, ',')) out.push_back(parse_double(item));
    return out;
}

} // namespace

std::vector<std::vector<double>> parse_grid(const std::string& spec) {
    std::vector<std::vector<double>> dims;
    for (const auto& field : split(spec, ';')) {
        const auto parts = split(field, ':');
        if (parts.size() == 3) {
            const double a = parse_double(parts[0]), b = parse_double(parts[1]);
            const double kd = parse_double(parts[2]);
            if (!(kd >= 1.0) || kd != std::floor(kd)) throw DomainError("grid count must be a positive integer: " + field);
            const auto k = static_cast<std::size_t>(kd);
            std::vector<double> axis(k);
            for (std::size_t i = 0; i < k; ++i)
                axis[i] = k == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(k - 1);
            dims.push_back(std::move(axis));
        } else if (parts.size() == 1) {
            auto axis = parse_list(field);
            if (axis.empty()) throw DomainError("empty grid axis");
            dims.push_back(std::move(axis));
        } else {
            throw DomainError("grid axis must be 'a:b:k' or a value list: " + field);
        }
    }
    return dims;
}

namespace {

// A numeric table plus the metadata echoed into every output.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    json metadata;
};

json base_metadata(const std::string& command) {
    return {{"tool", kToolName}, {"version", kToolVersion}, {"command", command}};
}

void write_table(const Table& t, const std::string& format, std::ostream& os) {
    if (format == "json") {
        json rows = json::array();
        for (const auto& r : t.rows) rows.push_back(r);
        os << json{{"metadata", t.metadata}, {"columns", t.columns}, {"rows", rows}}.dump(2) << '\n';
        return;
    }
    for (const auto& [key, value] : t.metadata.items()) os << "# " << key << '=' << value.dump() << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    std::string line;
    for (const auto& r : t.rows) {
        line.clear();
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) line += ',';
            line += format_number(r[i]);
        }
        os << line << '\n';
    }
}

template <class Writer>
void emit(const std::string& path, std::ostream& out, Writer&& write) {
    if (path.empty() || path == "-") {
        write(out);
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    write(f);
    f.flush();
    if (!f) throw IoError("write to " + path + " failed");
}

// Cartesian product of the grid axes.
void for_each_point(const std::vector<std::vector<double>>& axes, const std::function<void(const std::vector<double>&)>& f) {
    std::vector<std::size_t> idx(axes.size(), 0);
    std::vector<double> point(axes.size());
    for (const auto& a : axes)
        if (a.empty()) return;
    while (true) {
        for (std::size_t d = 0; d < axes.size(); ++d) point[d] = axes[d][idx[d]];
        f(point);
        std::size_t d = axes.size();
        while (d > 0) {
            --d;
            if (++idx[d] < axes[d].size()) break;
            idx[d] = 0;
            if (d == 0) return;
        }
        if (axes.empty()) return;
    }
}

std::vector<std::string> names(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

bool is_sorted_vec(const std::vector<double>& v) { return std::is_sorted(v.begin(), v.end()); }

struct Options {
    std::size_t n = 1;
    double t = 1.0;
    double dt = 1e-4;
    std::size_t paths = 1000;
    std::uint64_t seed = 1;
    std::string start;
    std::string bridge = "on";
    std::string out;
    std::string format = "csv";
    std::vector<std::string> tol;
    unsigned threads = 0;
    std::string from;
    std::string grid;
    std::size_t store_every = 0;
    std::string kind;
};

Table density_table(const Options& o) {
    const std::size_t n = o.n;
    const TimeParam t(o.t);
    const auto from = parse_list(o.from);
    const auto axes = parse_grid(o.grid);
    Table table;
    table.metadata = base_metadata("density " + o.kind);
    table.metadata["config"] = {{"n", n}, {"t", o.t}, {"from", from}, {"grid", o.grid}};

    auto need_from = [&](std::size_t len) {
        if (from.size() != len)
            throw DomainError("--from needs " + std::to_string(len) + " values for " + o.kind + " at n = " + std::to_string(n));
    };
    auto need_dims = [&](std::size_t len) {
        if (axes.size() != len)
            throw DomainError("--grid needs " + std::to_string(len) + " axes for " + o.kind + " at n = " + std::to_string(n));
    };
    // Grid points outside the domain of the chosen function are skipped.
    std::function<std::optional<double>(const std::vector<double>&)> eval;
    std::vector<std::string> cols;

    if (o.kind == "km" || o.kind == "km_plus") {
        need_from(n);
        need_dims(n);
        const OrderedPoint y(from);
        if (o.kind == "km_plus" && !y.strictly_increasing()) throw DomainError("km_plus needs a strictly increasing --from");
        cols = names("y2_", n);
        eval = [&, y](const std::vector<double>& p) -> std::optional<double> {
            if (!is_sorted_vec(p)) return std::nullopt;
            const OrderedPoint y2(p);
            return o.kind == "km" ? dens::km_density(y, y2, t).value : dens::km_density_plus(y, y2, t).value;
        };
    } else if (o.kind == "q" || o.kind == "q_plus") {
        need_from(2 * n + 1);
        need_dims(2 * n + 1);
        const InterlacedPoint w = InterlacedPoint::from_flat(from, n);
        if (o.kind == "q_plus" && !w.y.strictly_increasing()) throw DomainError("q_plus needs strictly increasing y in --from");
        cols = concat(names("x2_", n + 1), names("y2_", n));
        eval = [&, w](const std::vector<double>& p) -> std::optional<double> {
            std::optional<InterlacedPoint> w2;
            try {
                w2.emplace(InterlacedPoint::from_flat(p, n));
            } catch (const DomainError&) {
                return std::nullopt;
            }
            return o.kind == "q" ? dens::q_density(w, *w2, t).value : dens::q_density_plus(w, *w2, t).value;
        };
    } else if (o.kind == "r") {
        need_from(n);
        need_dims(n);
        const OrderedPoint x(from);
        cols = names("x2_", n);
        eval = [&, x](const std::vector<double>& p) -> std::optional<double> {
            if (!is_sorted_vec(p)) return std::nullopt;
            return dens::r_density(x, OrderedPoint(p), t).value;
        };
    } else if (o.kind == "mu") {
        need_dims(n);
        cols = names("y", n);
        eval = [&](const std::vector<double>& p) -> std::optional<double> {
            if (!is_sorted_vec(p)) return std::nullopt;
            return dens::entrance_mu(OrderedPoint(p), t).value;
        };
    } else if (o.kind == "nu") {
        need_dims(2 * n + 1);
        cols = concat(names("x", n + 1), names("y", n));
        eval = [&](const std::vector<double>& p) -> std::optional<double> {
            try {
                return dens::entrance_nu(InterlacedPoint::from_flat(p, n), t).value;
            } catch (const DomainError&) {
                return std::nullopt;
            }
        };
    } else if (o.kind == "lambda") {
        need_from(n + 1);
        need_dims(n);
        const OrderedPoint x(from);
        if (!x.strictly_increasing()) throw DomainError("lambda needs a strictly increasing --from");
        cols = names("y", n);
        eval = [&, x](const std::vector<double>& p) -> std::optional<double> {
            if (!is_sorted_vec(p)) return std::nullopt;
            return dens::lambda_kernel(x, OrderedPoint(p)).value;
        };
    } else if (o.kind == "gt_mu") {
        need_dims(n * (n + 1) / 2);
        for (std::size_t k = 1; k <= n; ++k)
            for (std::size_t i = 1; i <= k; ++i) cols.push_back("x" + std::to_string(k) + "_" + std::to_string(i));
        eval = [&](const std::vector<double>& p) -> std::optional<double> {
            return dens::gt_entrance_density(GTPattern::from_flat(p, n), t).value;
        };
    } else if (o.kind == "top_cdf") {
        need_dims(1);
        cols = {"x"};
        eval = [&](const std::vector<double>& p) -> std::optional<double> {
            return dens::top_eigenvalue_cdf(static_cast<int>(n), p[0], t);
        };
    } else if (o.kind == "coalescing_cdf") {
        need_from(n);
        need_dims(n);
        const OrderedPoint z(from);
        cols = names("z2_", n);
        // The determinant formula holds for ordered z2 only.
        eval = [&, z](const std::vector<double>& p) -> std::optional<double> {
            if (!is_sorted_vec(p)) return std::nullopt;
            return dens::coalescing_cdf(z, OrderedPoint(p), t);
        };
    } else {
        throw DomainError("unknown density: " + o.kind);
    }

    table.columns = cols;
    table.columns.push_back("value");
    for_each_point(axes, [&](const std::vector<double>& p) {
        if (const auto v = eval(p)) {
            auto row = p;
            row.push_back(*v);
            table.rows.push_back(std::move(row));
        }
    });
    return table;
}

sim::SimConfig sim_config(const Options& o) {
    sim::SimConfig cfg;
    cfg.horizon_t = o.t;
    cfg.dt = o.dt;
    cfg.n_paths = o.paths;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.store_every = o.store_every;
    if (o.bridge == "on") cfg.bridge_correction = true;
    else if (o.bridge == "off") cfg.bridge_correction = false;
    else throw DomainError("--bridge-correction must be on or off");
    if (!o.start.empty()) {
        const auto colon = o.start.find(':');
        const std::string mode = o.start.substr(0, colon);
        if (colon == std::string::npos) throw DomainError("--start must be spread:eps or entrance:t0");
        const double v = parse_double(o.start.substr(colon + 1));
        if (mode == "spread") cfg.start = sim::SpreadStart{v};
        else if (mode == "entrance") cfg.start = sim::EntranceStart{v};
        else throw DomainError("--start must be spread:eps or entrance:t0");
    }
    cfg.validate();
    return cfg;
}

sim::PathBatch run_simulation(const Options& o, const sim::SimConfig& cfg) {
    const auto from = parse_list(o.from);
    const std::size_t n = o.n;
    if (o.kind == "pair") {
        if (from.empty()) throw DomainError("pair needs --from x1,...,x{n+1},y1,...,yn");
        if (from.size() % 2 == 0) throw DomainError("--from for pair needs 2n+1 values");
        return sim::simulate_interlaced_pair(InterlacedPoint::from_flat(from, from.size() / 2), cfg);
    }
    if (o.kind == "pair_plus") {
        if (from.empty()) return sim::simulate_interlaced_pair_plus(n, cfg);
        if (from.size() % 2 == 0) throw DomainError("--from for pair_plus needs 2n+1 values");
        return sim::simulate_interlaced_pair_plus(InterlacedPoint::from_flat(from, from.size() / 2), cfg);
    }
    if (o.kind == "dyson") {
        if (from.empty()) return sim::simulate_dyson(n, cfg);
        return sim::simulate_dyson(OrderedPoint(from), cfg);
    }
    if (o.kind == "gt_cone") return sim::simulate_gt_cone(n, cfg);
    if (o.kind == "sup_functional") return sim::simulate_sup_functional(n, cfg);
    if (o.kind == "coalescing") {
        if (from.empty()) throw DomainError("coalescing needs --from z1,...,zn");
        return sim::simulate_coalescing(OrderedPoint(from), cfg);
    }
    throw DomainError("unknown process: " + o.kind);
}

int cmd_density(const Options& o, std::ostream& out) {
    const Table table = density_table(o);
    emit(o.out, out, [&](std::ostream& os) { write_table(table, o.format, os); });
    return kExitPass;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    const sim::SimConfig cfg = sim_config(o);
    const sim::PathBatch batch = run_simulation(o, cfg);

    json meta = base_metadata("simulate " + o.kind);
    meta["seed"] = cfg.seed;
    meta["config"] = verify::to_json(cfg);
    meta["config"]["n"] = o.n;
    // Echo the start the simulator actually used.
    if (!o.from.empty()) {
        meta["config"]["from"] = parse_list(o.from);
        meta["config"]["start"] = {{"mode", "fixed"}};
    } else if (o.kind == "sup_functional") {
        meta["config"]["start"] = {{"mode", "origin"}};
    }

    Table table;
    table.metadata = meta;
    table.columns = batch.columns;
    for (std::size_t p = 0; p < batch.n_paths; ++p) {
        const auto r = batch.row(p);
        table.rows.emplace_back(r.begin(), r.end());
    }
    emit(o.out, out, [&](std::ostream& os) { write_table(table, o.format, os); });

    if (!o.out.empty() && o.out != "-") {
        json sidecar = meta;
        sidecar["columns"] = batch.columns;
        sidecar["samples_file"] = o.out;
        emit(o.out + ".meta.json", out, [&](std::ostream& os) { os << sidecar.dump(2) << '\n'; });
        if (!batch.grid_times.empty()) {
            Table paths;
            paths.metadata = meta;
            paths.columns = concat({"path", "time"}, batch.columns);
            const std::size_t g = batch.grid_times.size(), d = batch.dim();
            for (std::size_t p = 0; p < batch.n_paths; ++p) {
                for (std::size_t k = 0; k < g; ++k) {
                    std::vector<double> row{static_cast<double>(p), batch.grid_times[k]};
                    const double* base = batch.paths.data() + (p * g + k) * d;
                    row.insert(row.end(), base, base + d);
                    paths.rows.push_back(std::move(row));
                }
            }
            emit(o.out + ".paths.csv", out, [&](std::ostream& os) { write_table(paths, "csv", os); });
        }
    }
    return kExitPass;
}

int cmd_verify(const Options& o, const CLI::App& sub, std::ostream& out, std::ostream& err) {
    verify::SuiteConfig cfg;
    if (sub.count("--paths")) cfg.paths = o.paths;
    if (sub.count("--dt")) cfg.dt = o.dt;
    if (sub.count("--seed")) cfg.seed = o.seed;
    cfg.threads = o.threads;
    for (const auto& a : o.tol) verify::apply_override(cfg.tolerances, a);

    const auto reports = verify::run_suite(o.kind, cfg);
    bool ok = true;
    json arr = json::array();
    for (const auto& r : reports) {
        ok = ok && r.pass;
        arr.push_back(verify::to_json(r));
        err << (r.pass ? "PASS " : "FAIL ") << r.id << "  discrepancy=" << format_number(r.discrepancy)
            << (r.comparison == "ge" ? " >= " : " <= ") << format_number(r.tolerance) << '\n';
    }
    json doc = base_metadata("verify " + o.kind);
    doc["config"] = {{"paths", cfg.paths ? json(*cfg.paths) : json(nullptr)},
                     {"dt", cfg.dt ? json(*cfg.dt) : json(nullptr)},
                     {"seed", cfg.seed ? json(*cfg.seed) : json(nullptr)},
                     {"tolerances", verify::to_json(cfg.tolerances)}};
    doc["reports"] = arr;
    emit(o.out, out, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
    return ok ? kExitPass : kExitVerificationFailed;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Interlaced Brownian motions: densities, simulation and verification", kToolName};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    Options o;

    auto common = [&](CLI::App* s) {
        s->add_option("--n", o.n, "Level / number of particles")->check(CLI::NonNegativeNumber);
        s->add_option("--t", o.t, "Time (horizon for simulations)");
        s->add_option("--out", o.out, "Output path ('-' or omitted: stdout)");
        s->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    };
    auto simflags = [&](CLI::App* s) {
        s->add_option("--dt", o.dt, "Time step");
        s->add_option("--paths", o.paths, "Number of paths");
        s->add_option("--seed", o.seed, "Random seed");
        s->add_option("--threads", o.threads, "Worker threads (0: INTERLACE_THREADS or hardware)");
    };

    auto* density = app.add_subcommand("density", "Evaluate a density or distribution function on a grid");
    density->add_option("kind", o.kind, "Function")
        ->required()
        ->check(CLI::IsMember({"km", "km_plus", "q", "q_plus", "r", "mu", "nu", "lambda", "gt_mu", "top_cdf",
                               "coalescing_cdf"}));
    common(density);
    density->add_option("--from", o.from, "First argument, comma separated");
    density->add_option("--grid", o.grid, "Grid over the second argument: 'a:b:k;...'")->required();

    auto* simulate = app.add_subcommand("simulate", "Run a path simulation and write terminal samples");
    simulate->add_option("kind", o.kind, "Process")
        ->required()
        ->check(CLI::IsMember({"pair", "pair_plus", "dyson", "gt_cone", "coalescing", "sup_functional"}));
    common(simulate);
    simflags(simulate);
    simulate->add_option("--from", o.from, "Start point, comma separated");
    simulate->add_option("--start", o.start, "spread:eps or entrance:t0");
    simulate->add_option("--bridge-correction", o.bridge, "on or off")->check(CLI::IsMember({"on", "off"}));
    simulate->add_option("--store-every", o.store_every, "Also write the state every k steps");

    auto* verify_cmd = app.add_subcommand("verify", "Run verification checks and write a JSON report");
    verify_cmd->add_option("kind", o.kind, "Suite")->required();
    verify_cmd->add_option("--out", o.out, "Report path ('-' or omitted: stdout)");
    simflags(verify_cmd);
    verify_cmd->add_option("--tol", o.tol, "Tolerance override key=value (repeatable)");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (*density) return cmd_density(o, out);
        if (*simulate) return cmd_simulate(o, out);
        const auto& suites = verify::suite_names();
        if (std::find(suites.begin(), suites.end(), o.kind) == suites.end()) {
            err << "error: unknown suite '" << o.kind << "'\n";
            return kExitUsage;
        }
        return cmd_verify(o, *verify_cmd, out, err);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const CapabilityError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitVerificationFailed;
    }
}

} // namespace interlace::cli
