#pragma once

#include <optional>
#include <vector>

#include "mfdb/fields.hpp"
#include "mfdb/grid.hpp"
#include "mfdb/params.hpp"

namespace mfdb {

// Outcome bookkeeping for the fixed-point iteration.
struct SolveReport {
    bool converged = false;
    int iterations = 0;
    double final_delta = 0.0;           // last sup-norm policy change, seconds
    std::vector<double> deltas;         // one entry per measured iteration
    double beta = 0.0;                  // interference normalization used
    int substeps = 0;                   // transport substeps actually used
    double max_mass_drift = 0.0;        // worst |1 - total mass| seen in transport
    bool aggregate_frozen = false;      // stalled cycle resolved against its mean aggregate
    int freeze_pass = 0;                // pass where the aggregate was frozen (0 = never)
    double aggregate_residual = 0.0;    // worst-frame relative L1 gap, induced vs stored interference
};

// Converged equilibrium: policy/value/population fields plus the per-frame
// delay profile and interference it induces.
struct SolveResult {
    SolverGrid grid;
    StateField policy;        // frames     x E x H, backoff in seconds
    StateField value;         // frames + 1 x E x H, cost-to-go
    StateField meanfield;     // frames + 1 x E x H, density (cell masses sum to 1)
    DelayField interference;  // frames x delay axis, watts at the receiver
    DelayField lambda;        // frames x delay axis, backoff density (integrates to 1)
    SolveReport report;
};

// Smoothed backoff density of a population slice and its derivative in the
// delay coordinate. `policy` and `m` are E x H slices; outputs have grid.n_d
// entries. The density is kernel-smoothed with the given bandwidth and then
// normalized to integrate to exactly 1 (trapezoid rule) over the delay axis.
void delay_distribution(const SolverGrid& grid, const double* policy, const double* m,
                        double bandwidth, double* lambda_out, double* dlambda_out);

// Aggregate interference profile over the delay axis induced by one population
// slice, given last iteration's interference (power control reacts to it).
// I(d) = beta * lambda(d) * sum over affordable cells of m * p(d, cell) * H.
void mean_field_interference(const SystemParams& p, const SolverGrid& grid,
                             const double* lambda, const double* m,
                             const double* interference_prev, double* interference_out);

// Backward sweep of the control stage: fills value (frames+1 slices, terminal
// slice from the leftover-energy reward) and the per-frame minimizing backoff.
// `interference` is the lagged profile the population is assumed to produce.
void hjb_backward(const SystemParams& p, const ChannelScenario& scen,
                  const SolverGrid& grid, const DelayField& interference,
                  StateField& value_out, StateField& policy_out,
                  int* substeps_used = nullptr);

// Forward transport of the population density under the given policy and
// interference. m0 is the initial E x H slice (cell masses summing to 1).
// Returns the worst mass drift observed. Cells that cannot afford one frame
// at their required power park where their remaining energy puts them.
double fpk_forward(const SystemParams& p, const ChannelScenario& scen,
                   const SolverGrid& grid, const StateField& policy,
                   const DelayField& interference, const std::vector<double>& m0,
                   StateField& m_out, int* substeps_used = nullptr);

// Initial density: uniform in E, concentrated at the scenario's initial gain
// (linearly split between the two nearest H nodes).
std::vector<double> uniform_initial_density(const SolverGrid& grid,
                                            const ChannelScenario& scen);

// Initial density concentrated at one state point (for transport tests).
std::vector<double> point_initial_density(const SolverGrid& grid, double e0, double h0);

// Optional warm start for the fixed-point iteration.
struct WarmStart {
    StateField policy;        // frames x E x H
    DelayField interference;  // frames x delay axis
};

// Fixed-point iteration coupling the control and transport stages until the
// damped policy stops moving (sup norm below fp_tolerance) or fp_max_iters.
SolveResult solve_equilibrium(const SystemParams& p, const ChannelScenario& scen,
                              const SolverGrid& grid,
                              const std::vector<double>* m0 = nullptr,
                              const WarmStart* warm = nullptr);

// Minimizer of per-frame cost samples over the delay axis, with parabolic
// refinement between samples (ties resolve to the smaller delay). Exposed for
// verification against the closed-form first-order condition.
double argmin_refined(const std::vector<double>& cost, const std::vector<double>& delay_axis);

// Closed-form stationary backoff from the first-order condition, clamped to
// the delay axis. dI_dD is the interference sensitivity at the device's
// chosen delay, dv_dE the marginal value of energy, h the device gain.
double closed_form_backoff(const SystemParams& p, double dI_dD, double dv_dE,
                           double h, double d_min, double d_max);

// Population-mean backoff of an equilibrium: the policy averaged over the
// transported density across every frame. This is the scalar used to compare
// scenarios.
double population_mean_backoff(const SolveResult& r);

// Bilinear policy lookup at an arbitrary state (clamped to the grid).
double policy_lookup(const SolverGrid& grid, const StateField& policy, int frame,
                     double e, double h);

// Linear interference lookup on the delay axis for one frame.
double interference_lookup(const SolverGrid& grid, const DelayField& interference,
                           int frame, double d);

} // namespace mfdb
