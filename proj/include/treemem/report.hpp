#pragma once

#include <string>

#include <json.hpp>

namespace treemem {

inline constexpr const char* kLibraryVersion = "0.1.0";

// Parse, validate and normalize a run configuration (defaults filled in).
// Throws Errc::InvalidConfig / ParseError on bad input. The returned object
// is the config echo embedded in report.json; a run can be repeated from it.
nlohmann::json normalize_config(const nlohmann::json& raw);

// Execute one run described by a config object. Writes fields.csv,
// report.json (and coincidence.csv for the membrane modes) into out_dir.
// Returns the process exit code: 0 ok, 2 invalid input, 3 solver failure,
// 4 invariant violation. Errors are also recorded in report.json.
int run_config(const nlohmann::json& raw, const std::string& out_dir);

// Convenience wrapper: read the config file, then run_config.
int run(const std::string& config_path, const std::string& out_dir_override = "");

// 17-significant-digit decimal rendering (lossless round trip for doubles).
std::string format_g17(double v);

}  // namespace treemem
