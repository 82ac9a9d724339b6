#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "abflux/fields.hpp"
#include "abflux/geometry.hpp"

namespace abflux {

using Json = nlohmann::json;

struct Diagnostic {
    enum class Level { Error, Warning };
    Level level;
    std::string path;  // dotted key path of the offending entry
    std::string message;
};

/// Built-in scenario corpus, keyed by name.
const std::map<std::string, Json>& builtin_scenarios();

/// Resolves a CLI argument to a config: an existing file path is parsed as
/// JSON, otherwise the name is looked up among the built-ins.
Json resolve_scenario(const std::string& name_or_path);

/// Applies a dotted-path override "a.b.c=value"; the value is parsed as JSON
/// when possible, else taken as a string.
void apply_override(Json& config, const std::string& keyval);

/// Schema check plus physical sanity checks; no side effects.
std::vector<Diagnostic> validate_config(const Json& config);

struct RunOutcome {
    int exit_code = 0;  // 0 pass, 2 declared-tolerance failure (1 = error, thrown)
    Json report;
};

/// Executes the scenario task, writes report.json and task CSVs under
/// out_dir, and prints a one-line summary per check to stdout.
RunOutcome run_scenario(const Json& config, const std::string& out_dir, bool with_timings);

// --- deterministic families (shared with the test suites) ------------------

/// n broken rays entering through the outer boundary at time t0; seeded and
/// reproducible. Rays that trap or exit degenerately are resampled.
std::vector<BrokenRay> random_ray_family(const Domain& domain, int n, double t0, uint64_t seed,
                                         int max_reflections = 64);

/// Compactly supported C-infinity pulse of mass `amp` centered at tc with
/// half-width eps; .first = e, .second = de/dt.
std::pair<std::function<double(double)>, std::function<double(double)>> bump_profile(double amp,
                                                                                     double tc,
                                                                                     double eps);

}  // namespace abflux
