#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace qclass::cli {

/// Parses an angle token: plain radians ("0.7"), multiples of pi ("pi",
/// "0.5pi", "2pi"), or multiples of pi/2 with the p2 suffix ("1.35p2").
double parse_angle(const std::string& token);

/// Parses "lo:hi:count"; lo and hi accept angle tokens.
nlohmann::json parse_grid(const std::string& token);

/// Parses a comma-separated list of numbers.
std::vector<double> parse_list(const std::string& token);

/// Executes an effective run configuration (as emitted in the config echo).
/// Writes the artifact and the echo, prints the summary. Throws on failure.
void execute(const nlohmann::json& config);

/// Full command-line entry point; returns the process exit code
/// (0 success, 2 usage, 3 validation, 4 numerical failure).
int run(const std::vector<std::string>& args);

/// Formats a double with 12 significant digits (CSV convention).
std::string format_number(double v);

} // namespace qclass::cli
