#pragma once

#include <vector>

#include "mfdb/params.hpp"

namespace mfdb {

// Discretization shared by the control and transport solvers.
//
// State axes: normalized energy E on [0, 1] and combined gain H on a band
// wide enough to hold the deterministic path plus four standard deviations
// of accumulated disturbance. Backoff candidates sample [slot, frame] at a
// tenth of a slot. Time is split into frames (the control is constant within
// a frame) with `substeps` transport steps inside each.
struct SolverGrid {
    int n_e = 0, n_h = 0, n_d = 0;
    int frames = 0;
    int substeps = 0;                  // transport substeps per frame
    double de = 0, dh = 0, dd = 0;
    std::vector<double> e_axis;        // n_e nodes, [0, 1]
    std::vector<double> h_axis;        // n_h nodes
    std::vector<double> delay_axis;    // n_d nodes, [slot_duration, frame_duration]
    std::vector<double> frame_times;   // frames + 1 boundaries, 0 .. horizon

    int cell_count() const { return n_e * n_h; }
    int idx(int j_e, int k_h) const { return j_e * n_h + k_h; }
    // Nearest node indices, clamped to the axis range.
    int nearest_e(double e) const;
    int nearest_h(double h) const;
    int nearest_delay_slot(double d, double slot_duration) const;
};

// Builds the grid for one scenario. Substeps default to a CFL-safe count for
// the zero-interference rates; the solver still tightens per iteration when
// realized rates demand it. Pass substeps_override > 0 to force a count.
SolverGrid build_grid(const SystemParams& p, const ChannelScenario& scen,
                      int n_e = 101, int n_h = 61, int substeps_override = 0);

} // namespace mfdb
