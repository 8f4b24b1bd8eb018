// Acceptance run: one line per criterion, nonzero exit if any fails.
#include "interlace/cli.h"
#include "interlace/verify.h"

#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace interlace;
using namespace interlace::verify;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void line(const char* id, bool ok, const std::string& text) {
    std::printf("%s %s  %s\n", id, ok ? "PASS" : "FAIL", text.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

const VerificationReport& find(const std::vector<VerificationReport>& rs, const std::string& id) {
    for (const auto& r : rs)
        if (r.id == id) return r;
    throw std::runtime_error("missing report " + id);
}

double total_seconds(const std::vector<VerificationReport>& rs) {
    double s = 0.0;
    for (const auto& r : rs) s += r.wall_seconds;
    return s;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// Names of the failed sub-criteria of a composite report.
std::string failed_criteria(const VerificationReport& r) {
    std::string out;
    if (!r.details.contains("criteria")) return out;
    for (const auto& c : r.details["criteria"])
        if (!c["pass"].get<bool>()) out += " " + c["name"].get<std::string>();
    return out;
}

void ac1() {
    const auto rs = run_suite("intertwine", {});
    const auto& a = find(rs, "intertwining_n1");
    const auto& b = find(rs, "intertwining_n2");
    const double secs = total_seconds(rs);
    line("AC1", a.pass && b.pass && secs < 30.0,
         "intertwining: n=1 20 cases max residual " + fmt("%.3g", a.discrepancy) + " (< 1e-8), n=2 3 cases " +
             fmt("%.3g", b.discrepancy) + " (< 1e-6), " + fmt("%.1f", secs) + " s (< 30 s)");
}

void ac2() {
    const auto rs = run_suite("duality", {});
    const auto& r = rs.front();
    std::string ratio;
    for (const auto& c : r.details["criteria"])
        if (c["name"].get<std::string>().find("ratio") != std::string::npos)
            ratio += (ratio.empty() ? "" : "/") + fmt("%.4f", c["value"].get<double>());
    line("AC2", r.pass,
         "duality: transpose identity exact on " + std::to_string(r.details["pairs_compared"].get<int>()) +
             " pairs (n <= 3), mixed-derivative residual ratio h=2e-3 vs 1e-3 (min/max over points) " + ratio + " (in [3.5, 4.5])" +
             failed_criteria(r));
}

void ac3() {
    const auto rs = run_suite("pde", {});
    const auto& r = rs.front();
    const double secs = total_seconds(rs);
    line("AC3", r.pass && secs < 10.0,
         "PDE/boundaries: " + std::to_string(static_cast<int>(r.details["criteria"].size()) - static_cast<int>(r.discrepancy)) +
             "/" + std::to_string(r.details["criteria"].size()) + " sub-criteria (O(h^2) decay, vanishing < 1e-12, Neumann < 1e-6), " +
             fmt("%.2f", secs) + " s (< 10 s)" + failed_criteria(r));
}

void ac4() {
    const auto rs = run_suite("entrance", {});
    const auto& km = find(rs, "chapman_kolmogorov_km_plus");
    const auto& r = find(rs, "chapman_kolmogorov_r");
    const auto& e = find(rs, "entrance_law_n1");
    line("AC4", km.pass && r.pass && e.pass,
         "semigroup at (s,t)=(0.3,0.7): CK p^{2,+} rel " + fmt("%.3g", km.discrepancy) + ", CK r_2 rel " +
             fmt("%.3g", r.discrepancy) + ", entrance law n=1 rel " + fmt("%.3g", e.discrepancy) + " (all < 1e-6)");
}

// Both come from the same suite run; the GUE line is printed after AC6.
std::vector<VerificationReport> interlace_reports;

void ac5() {
    interlace_reports = run_suite("interlace", {});
    const auto& prop = find(interlace_reports, "proposition_interlace_n1");
    const double p_max = prop.details["x_max"]["p_value"].get<double>();
    line("AC5", p_max >= 0.01 && prop.wall_seconds < 300.0,
         "interlaced X marginals n=1: EntranceStart, 1e5 paths, dt=1e-4, seed " + std::to_string(*prop.seed) +
             ": KS p(X-max) = " + fmt("%.4f", p_max) + " (>= 0.01); min p over all X coordinates " +
             fmt("%.4f", prop.discrepancy) + "; " + fmt("%.0f", prop.wall_seconds) + " s (< 300 s)");
}

void ac7() {
    const auto& gue = find(interlace_reports, "gue_top_eigenvalue");
    line("AC7", gue.pass,
         "GUE consistency: 1e5 tridiagonal spectra n=3 t=1 seed " + std::to_string(*gue.seed) +
             ": KS p(largest eigenvalue) = " + fmt("%.4f", gue.discrepancy) + " (>= 0.01)");
}

void ac6() {
    const auto rs = run_suite("identity", {});
    const auto& r = rs.front();
    line("AC6", r.pass && r.wall_seconds < 300.0,
         "identity sup functional n=3: 1e5 paths, 1e4 grid steps, seed " + std::to_string(*r.seed) +
             ": sup-norm " + fmt("%.5f", r.discrepancy) + " (< 0.01), KS p " +
             fmt("%.3f", r.details["ks"]["p_value"].get<double>()) + ", " + fmt("%.0f", r.wall_seconds) +
             " s (< 300 s)");
}

void ac8() {
    const auto rs = run_suite("coalescing", {});
    const auto& a = find(rs, "coalescing_n2");
    const auto& b = find(rs, "coalescing_n3");
    const double secs = total_seconds(rs);
    line("AC8", a.pass && b.pass && secs < 300.0,
         "coalescing law: n=2 z=(0,0.5) 5x5 grid max |emp-exact|/SE " + fmt("%.2f", a.discrepancy) +
             ", n=3 3 points " + fmt("%.2f", b.discrepancy) + " (<= 3), 1e5 paths with bridge correction, " +
             fmt("%.0f", secs) + " s (< 300 s)");
}

void ac9() {
    const auto rs = run_suite("small_t", {});
    std::string seq;
    bool ok = true;
    for (const auto& r : rs) {
        ok = ok && r.pass;
        seq += " " + r.id + ":";
        for (const auto& row : r.details["sequence"]) seq += " " + fmt("%.2e", row["discrepancy"].get<double>());
    }
    line("AC9", ok, "small-t discrepancies strictly decreasing over t = 1e-1, 1e-2, 1e-3;" + seq);
}

void ac10() {
    const auto dir = fs::temp_directory_path() / "interlace_acceptance";
    fs::create_directories(dir);
    struct Case {
        std::string process;
        std::vector<std::string> extra;
    };
    const std::vector<Case> cases = {{"pair", {"--n", "2", "--from=-1,0,1,-0.5,0.5"}},
                                     {"pair_plus", {"--n", "2"}},
                                     {"dyson", {"--n", "3"}},
                                     {"gt_cone", {"--n", "3"}},
                                     {"coalescing", {"--from=0,0.5,1"}},
                                     {"sup_functional", {"--n", "3"}}};
    bool ok = true;
    std::string bad;
    for (const auto& c : cases) {
        std::vector<std::string> blobs;
        for (const char* threads : {"1", "4", "8"}) {
            const auto out = dir / (c.process + "_" + threads + ".csv");
            std::vector<std::string> args = {"simulate", c.process, "--t", "0.5", "--dt", "1e-3", "--paths", "200",
                                             "--seed", "2024", "--threads", threads, "--store-every", "50",
                                             "--out", out.string()};
            args.insert(args.end(), c.extra.begin(), c.extra.end());
            std::ostringstream o, e;
            if (cli::run_cli(args, o, e) != 0) {
                ok = false;
                bad += " " + c.process + "(exit)";
                break;
            }
            // The sidecar names its own samples file; everything else must match.
            auto meta = nlohmann::json::parse(slurp(out.string() + ".meta.json"));
            meta.erase("samples_file");
            std::string blob = slurp(out) + meta.dump();
            if (fs::exists(out.string() + ".paths.csv")) blob += slurp(out.string() + ".paths.csv");
            blobs.push_back(std::move(blob));
        }
        if (blobs.size() == 3 && (blobs[1] != blobs[0] || blobs[2] != blobs[0])) {
            ok = false;
            bad += " " + c.process;
        }
    }
    line("AC10", ok,
         "determinism: simulate {pair, pair_plus, dyson, gt_cone, coalescing, sup_functional} byte-identical "
         "sample, path and metadata files at 1, 4, 8 worker threads" +
             (bad.empty() ? std::string() : "; differs:" + bad));
}

} // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<void (*)()> steps = {ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10};
    for (auto step : steps) {
        try {
            step();
        } catch (const std::exception& e) {
            std::printf("ERROR %s\n", e.what());
            ++failures;
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("acceptance: %d failure(s), %.0f s\n", failures, secs);
    return failures == 0 ? 0 : 1;
}
