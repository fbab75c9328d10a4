#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfdb/fields.hpp"
#include "mfdb/grid.hpp"
#include "mfdb/params.hpp"
#include "mfdb/solver.hpp"

namespace mfdb {

enum class Strategy { kMeanField, kAcb, kAloha, kMinBackoff };

Strategy strategy_from_name(const std::string& name); // mfdb / acb / aloha / mb
std::string strategy_name(Strategy s);

struct DeviceState {
    double radius = 0.0;       // distance from receiver, m
    double loss = 1.0;         // bounded path loss at that distance
    double energy = 0.0;       // normalized energy
    double gain = 0.0;         // combined channel gain H
    int exhausted_frame = -1;  // first frame an attempt was cancelled for energy
    // Strategy scratch, reset between frames where appropriate:
    int acb_pointer = 1;       // next slot the barring check runs at
};

// Per-frame population aggregates.
struct FrameStats {
    double mean_delay = 0.0;     // s; delay of record averaged over devices
    double cum_delay_cost = 0.0; // s^2; running mean of summed squared delays
    double mean_energy = 0.0;    // normalized
    double drop_rate = 0.0;      // fraction of devices with no attempt this frame
};

struct SessionResult {
    std::vector<FrameStats> frames;
    std::vector<double> final_energy;   // per device, after the last frame
    std::vector<double> total_cost;     // per device, summed squared delays, s^2
    std::vector<DeviceState> devices;   // terminal device states
    int exhausted_count = 0;            // devices that ever hit the energy wall
    bool infeasible = false;            // >= half the population exhausted
    int infeasible_frame = -1;          // first frame (1-based) crossing that mark
    std::uint64_t clamped_lookups = 0;  // policy lookups outside the grid hull
};

// One slot's worth of simultaneous transmissions.
struct SlotEntry {
    int device = 0;
    double power = 0.0;
    double effective_gain = 0.0; // loss * gain
};

// Successive-decode outcome: which entries pass the SINR threshold, capped at
// decode_capacity winners (best SINR first; ties keep the earlier entry).
std::vector<bool> decode_slot(const std::vector<SlotEntry>& entries, double threshold,
                              double noise, int capacity);

// Draws the device population: positions uniform on the disc, common initial
// energy and gain from the scenario.
std::vector<DeviceState> spawn_devices(const SystemParams& p, const ChannelScenario& scen,
                                       std::uint64_t seed, int count, double initial_energy);

// Runs a full session for one strategy. `policy` may be null except for the
// mean-field strategy, which replays the solved backoff and interference.
SessionResult run_session(const SystemParams& p, const ChannelScenario& scen,
                          Strategy strategy, const SolveResult* policy,
                          std::uint64_t seed, int device_count, double initial_energy);

// Same, over a caller-built population (for tests that sample initial states
// from a prescribed law instead of the common fixed budget).
SessionResult run_session(const SystemParams& p, const ChannelScenario& scen,
                          Strategy strategy, const SolveResult* policy,
                          std::uint64_t seed, std::vector<DeviceState> devices);

// Nearest-node (E, H) histogram of a device population; masses sum to 1.
std::vector<double> empirical_density(const SolverGrid& grid,
                                      const std::vector<DeviceState>& devices);

struct SweepPoint {
    int n_devices = 0;
    Strategy strategy{};
    double mean_delay = 0.0; // s; averaged over frames, devices and seeds
    double stderr_delay = 0.0; // s; standard error across seeds
};

// Mean session delay versus population size, averaged over seeds.
std::vector<SweepPoint> sweep_population(const SystemParams& p, const ChannelScenario& scen,
                                         const SolveResult* policy,
                                         const std::vector<Strategy>& strategies,
                                         const std::vector<int>& n_values,
                                         const std::vector<std::uint64_t>& seeds,
                                         double initial_energy);

} // namespace mfdb
