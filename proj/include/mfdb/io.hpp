#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mfdb/params.hpp"
#include "mfdb/sim.hpp"
#include "mfdb/solver.hpp"

namespace mfdb {

// A run description: parameters, channel, and simulation choices.
struct RunConfig {
    SystemParams params;
    ChannelScenario scenario;
    Strategy strategy = Strategy::kMeanField;
    std::vector<std::uint64_t> seeds = {1};
    std::vector<int> n_values = {50, 500, 1000, 1500, 2000};
    double initial_energy = 0.7;
};

// Parses a JSON config. Any key of SystemParams or ChannelScenario is
// accepted at top level, plus "strategy", "seeds", "n_values",
// "initial_energy". Unknown keys are an error naming the key. Omitted keys
// keep their defaults; frame_duration and slot counts are cross-checked, and
// energy_ref / fixed_power default from the scenario's zero-interference
// required power when not given. A non-null `scenario_alias` replaces the
// whole scenario with the named preset after JSON keys are applied.
RunConfig parse_config_text(const std::string& text,
                            const std::string* scenario_alias = nullptr);
RunConfig load_config(const std::string& path,
                      const std::string* scenario_alias = nullptr);

// Stable 64-bit fingerprint of everything the solve depends on, used to pair
// policy files with configs at simulate time.
std::uint64_t solve_fingerprint(const SystemParams& p, const ChannelScenario& scen,
                                const SolverGrid& grid);
std::string fingerprint_hex(std::uint64_t fp);

// Text policy container: "MFDB-POLICY v1" magic, "# key: value" headers,
// then "ARRAY <name> <count>" blocks of %.17g values. Round-trips bit-exact.
void save_policy(std::ostream& os, const SystemParams& p, const ChannelScenario& scen,
                 const SolveResult& r);
void save_policy_file(const std::string& path, const SystemParams& p,
                      const ChannelScenario& scen, const SolveResult& r);

struct LoadedPolicy {
    SolveResult result;
    std::uint64_t fingerprint = 0;
    bool converged = false;
};

LoadedPolicy load_policy(std::istream& is);
LoadedPolicy load_policy_file(const std::string& path);

// %.17g formatting used by every file writer, so outputs are byte-stable.
std::string format_double(double v);

// CSV writers. Each takes leading provenance comment lines ("# ..." is added
// by the writer) and emits an exact header plus LF rows.
void write_session_csv(std::ostream& os, const std::vector<std::string>& provenance,
                       const std::vector<std::pair<Strategy, SessionResult>>& sessions);
void write_sweep_csv(std::ostream& os, const std::vector<std::string>& provenance,
                     const std::vector<SweepPoint>& points);
void write_convergence_csv(std::ostream& os, const SolveReport& report);
// Backoff surface over (frame, energy) at one gain column (figure data).
void write_policy_slice_csv(std::ostream& os, const SolverGrid& grid,
                            const StateField& policy, int k_gain);
// Energy marginal of the density at every frame boundary (figure data).
void write_meanfield_csv(std::ostream& os, const SolverGrid& grid,
                         const StateField& meanfield);

} // namespace mfdb
