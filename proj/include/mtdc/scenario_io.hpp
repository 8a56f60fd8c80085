#pragma once

#include <string>

#include <json.hpp>

#include "mtdc/analysis.hpp"
#include "mtdc/sim.hpp"

namespace mtdc {

using Json = nlohmann::ordered_json;

// Parses and validates a scenario document (schema 1). Unknown keys are
// rejected; scalar gains and area constants broadcast to per-area arrays.
// Throws ScenarioError with a field path on any violation.
Scenario parse_scenario(const Json& doc);
Scenario load_scenario(const std::string& path);

// Serializes a resolved scenario; parse(serialize(s)) reproduces s.
Json serialize_scenario(const Scenario& scn);

// Built-in six-terminal benchmark grid (line constants, gains, communication
// ring and the 0.2 p.u. generation-loss event in area 1).
Scenario benchmark_scenario(Config config);

// Full analysis record: resolved config echo, stability certificate,
// equilibrium (or the reason it does not exist), both bound sets when gains
// are uniform, a gamma ladder for the gamma = 0 averaged controllers, and
// the deviation notes for the documented formula choices.
Json analyze_report(const Scenario& scn);

// Objective verification used by the verify command: simulate, then check
// bound dominance and the applicable equilibrium/ladder properties.
struct VerifyResult {
    bool pass = false;
    std::vector<std::string> failures;
    Json report;
};
VerifyResult run_verify(const Scenario& scn);

// CSV trajectory export: t, omega_1..n, v_1..n, pgen_1..n, lyap_w with 12
// significant digits.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

} // namespace mtdc
