#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace interlace::cli {

inline constexpr const char* kToolName = "interlace";
inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes.
inline constexpr int kExitPass = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

// Runs the command line (args excludes the program name) and returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

// "a:b:k" (k evenly spaced points), "v1,v2,..." or a single value, one
// dimension per ';'-separated field.
std::vector<std::vector<double>> parse_grid(const std::string& spec);

} // namespace interlace::cli
