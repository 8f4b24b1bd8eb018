#include "doctest.h"

#include "interlace/cli.h"
#include "interlace/densities.h"
#include "interlace/verify.h"
#include "oracles/oracles.h"

#include "json.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace interlace;
using interlace::cli::run_cli;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

struct Csv {
    std::vector<std::string> meta;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

Csv parse_csv(const std::string& text) {
    Csv c;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            c.meta.push_back(line);
        } else if (c.header.empty()) {
            c.header = split(line);
        } else {
            std::vector<double> row;
            for (const auto& cell : split(line)) {
                double v = 0.0;
                std::from_chars(cell.data(), cell.data() + cell.size(), v);
                row.push_back(v);
            }
            c.rows.push_back(std::move(row));
        }
    }
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "interlace_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("number formatting and grids") {
    for (double v : {0.0, 0.5, -1.25, 0.1, 1e-300, 6.02214076e23, 0.10060511156757618}) {
        const std::string s = cli::format_number(v);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        CHECK(back == v);
    }
    CHECK(cli::format_number(0.5) == "0.5");
    CHECK(cli::format_number(2.0) == "2");

    const auto g = cli::parse_grid("0:1:3;2,5;7");
    REQUIRE(g.size() == 3);
    CHECK(g[0] == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(g[1] == std::vector<double>{2.0, 5.0});
    CHECK(g[2] == std::vector<double>{7.0});
}

TEST_CASE("density tables") {
    auto r = run({"density", "top_cdf", "--n", "1", "--t", "1", "--grid", "0"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("\n0,0.5\n") != std::string::npos);
    const auto top = parse_csv(r.out);
    CHECK(top.header == std::vector<std::string>{"x", "value"});

    r = run({"density", "km", "--n", "2", "--t", "1", "--from", "0,0", "--grid", "-1:1:5;0:2:5"});
    REQUIRE(r.code == 0);
    const auto km = parse_csv(r.out);
    CHECK_FALSE(km.rows.empty());
    for (const auto& row : km.rows) CHECK(row.back() == 0.0);

    // Snapshot: every row equals the library value bit for bit.
    r = run({"density", "q", "--n", "1", "--t", "0.7", "--from=-1,1,0", "--grid", "-1.5:-0.2:4;0.3:1.8:4;-0.1:0.2:3"});
    REQUIRE(r.code == 0);
    const auto q = parse_csv(r.out);
    CHECK(q.header == std::vector<std::string>{"x2_1", "x2_2", "y2_1", "value"});
    CHECK(q.rows.size() == 4 * 4 * 3);
    const InterlacedPoint w({-1.0, 1.0}, {0.0});
    for (const auto& row : q.rows) {
        const double expected = densities::q_density(w, InterlacedPoint({row[0], row[1]}, {row[2]}), 0.7).value;
        CHECK(row[3] == expected);
    }

    r = run({"density", "coalescing_cdf", "--n", "2", "--t", "1", "--from", "0,0.5", "--grid", "0;1", "--format", "json"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["metadata"]["tool"] == "interlace");
    CHECK(j["rows"][0][2] == densities::coalescing_cdf({0.0, 0.5}, {0.0, 1.0}, 1));
}

TEST_CASE("usage, domain and I/O errors map to exit codes") {
    CHECK(run({"density", "top_cdf", "--n", "1", "--t", "-1", "--grid", "0"}).code == cli::kExitUsage);
    CHECK(run({"density", "nope", "--grid", "0"}).code == cli::kExitUsage);
    CHECK(run({"density", "km", "--n", "2", "--t", "1", "--from", "1,0", "--grid", "0;1"}).code == cli::kExitUsage);
    CHECK(run({"verify", "bogus"}).code == cli::kExitUsage);
    CHECK(run({"verify", "duality", "--tol", "nonsense=1"}).code == cli::kExitUsage);
    CHECK(run({"simulate", "pair", "--n", "1"}).code == cli::kExitUsage);
    CHECK(run({}).code == cli::kExitUsage);
    const auto bad = run({"density", "top_cdf", "--n", "1", "--t", "1", "--grid", "0", "--out",
                          (scratch("missing") / "deeper" / "x.csv").string()});
    CHECK(bad.code == cli::kExitIo);
    CHECK_FALSE(bad.err.empty());
}

TEST_CASE("simulation output and metadata") {
    const auto out = scratch("pair.csv");
    auto r = run({"simulate", "pair", "--n", "1", "--t", "0.25", "--dt", "1e-3", "--paths", "20000", "--seed", "21",
                  "--from=-1,1,0", "--out", out.string()});
    REQUIRE(r.code == 0);
    const auto csv = parse_csv(slurp(out));
    CHECK(csv.rows.size() == 20000);
    REQUIRE(csv.header.size() >= 3);
    CHECK(csv.header[0] == "x1");
    bool has_seed = false;
    for (const auto& m : csv.meta) has_seed = has_seed || m == "# seed=21";
    CHECK(has_seed);

    const auto meta = nlohmann::json::parse(slurp(out.string() + ".meta.json"));
    CHECK(meta["version"] == cli::kToolVersion);
    CHECK(meta["seed"] == 21);
    CHECK(meta["config"]["n_paths"] == 20000);
    CHECK(meta["config"]["start"]["mode"] == "fixed");

    // The samples feed a KS test: X_2 - Y is reflected Brownian motion from 1.
    std::vector<double> gap;
    for (const auto& row : csv.rows) gap.push_back(row[1] - row[2]);
    const auto ks = verify::ks_test(gap, [](double g) {
        return g <= 0.0 ? 0.0 : oracle::Phi(g - 1.0, 0.5) - oracle::Phi(-g - 1.0, 0.5);
    });
    CHECK(ks.p_value > 0.01);

    // Cone at level one is Brownian motion.
    r = run({"simulate", "gt_cone", "--n", "1", "--t", "1", "--dt", "1e-2", "--paths", "5000", "--seed", "3"});
    REQUIRE(r.code == 0);
    const auto cone = parse_csv(r.out);
    double sum = 0.0, sq = 0.0;
    for (const auto& row : cone.rows) {
        sum += row[0];
        sq += row[0] * row[0];
    }
    const double n = static_cast<double>(cone.rows.size());
    const double mean = sum / n, se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean) < 3 * se);

    // Stored paths go to a second file.
    const auto stored = scratch("dyson.csv");
    r = run({"simulate", "dyson", "--n", "2", "--t", "0.1", "--dt", "1e-2", "--paths", "3", "--store-every", "5",
             "--out", stored.string()});
    REQUIRE(r.code == 0);
    const auto paths = parse_csv(slurp(stored.string() + ".paths.csv"));
    CHECK(paths.header.front() == "path");
    CHECK(paths.rows.size() == 3 * 3);
}

TEST_CASE("simulation files do not depend on the worker count") {
    for (const std::string proc : {"pair", "gt_cone", "coalescing", "sup_functional"}) {
        std::vector<std::string> contents;
        for (const char* threads : {"1", "4", "8"}) {
            const auto out = scratch(proc + "_" + threads + ".csv");
            std::vector<std::string> args = {"simulate", proc, "--n", "2", "--t", "0.2", "--dt", "1e-2",
                                             "--paths", "50", "--seed", "99", "--threads", threads,
                                             "--store-every", "4", "--out", out.string()};
            if (proc == "pair") args.push_back("--from=-1,0,1,-0.5,0.5");
            if (proc == "coalescing") args.push_back("--from=0,0.3");
            REQUIRE(run(args).code == 0);
            auto meta = nlohmann::json::parse(slurp(out.string() + ".meta.json"));
            meta.erase("samples_file");
            contents.push_back(slurp(out) + meta.dump());
            if (proc != "sup_functional") contents.back() += slurp(out.string() + ".paths.csv");
        }
        INFO(proc);
        CHECK(contents[1] == contents[0]);
        CHECK(contents[2] == contents[0]);
    }
}

TEST_CASE("verify command") {
    const auto out = scratch("duality.json");
    const auto start = std::chrono::steady_clock::now();
    const auto r = run({"verify", "duality", "--out", out.string()});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(r.code == cli::kExitPass);
    CHECK(secs < 5.0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["tool"] == "interlace");
    REQUIRE(j["reports"].size() == 1);
    CHECK(j["reports"][0]["pass"] == true);
    CHECK(j["reports"][0]["id"] == "duality");

    // An impossible tolerance turns the same run into a verification failure.
    CHECK(run({"verify", "pde", "--tol", "order_ratio_lo=4.4", "--tol", "order_ratio_hi=4.41"}).code ==
          cli::kExitVerificationFailed);
}
