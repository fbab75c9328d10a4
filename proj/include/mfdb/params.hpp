#pragma once

#include <cmath>
#include <string>

namespace mfdb {

// Protocol, radio, economics and solver knobs. Field names double as the JSON
// config keys, so renaming a member is a file-format change.
struct SystemParams {
    int    frames            = 20;       // status-update frames per session
    double frame_duration    = 0.010;    // s per frame (= slots_per_frame * slot_duration)
    int    slots_per_frame   = 20;       // transmission slots per frame
    double slot_duration     = 5.0e-4;   // s per slot
    double path_loss_exp     = 2.5;      // bounded path loss min(1, r^-a)
    double noise_power       = 3.9810717055349693e-14; // W over the whole band (-104 dBm)
    double bandwidth         = 50.0e3;   // Hz; informational, noise_power is the band total
    double device_density    = 5.0;      // devices per m^2
    double sinr_threshold    = 0.5;      // decode SINR threshold
    int    device_count      = 1000;     // devices simulated per beam
    double cluster_radius    = 0.01;     // m; with device_density sets the interference normalization
    double max_power         = 0.2;      // W; a required power above this skips the transmission
    double energy_ref        = 1.1058532515374914e-13; // J per unit of normalized energy
    double penalty_scale     = 4.0e-3;   // terminal energy penalty scale, cost units (s^2)
    double penalty_steepness = 100.0;    // logistic steepness, 1/normalized-energy
    double acb_factor        = 0.5;      // barring factor; a draw b > acb_factor passes the gate
    double fixed_power       = 2.6540478036899795e-11; // W; ALOHA/ACB transmit power
    int    decode_capacity   = 6;        // max transmitters decodable in one slot
    double fp_tolerance      = 1.0e-5;   // s; sup-norm policy change that declares convergence
    int    fp_max_iters      = 50;       // fixed-point iteration cap
    double kernel_bandwidth  = 5.0e-4;   // s; delay-distribution smoothing width
    double damping           = 0.5;      // policy relaxation factor per iteration

    double horizon() const { return frames * frame_duration; }

    // Interference normalization: expected aggregate path-loss weight of a
    // device cluster, integral of density * min(1, r^-a) over the disc.
    double beta() const;

    // Throws std::invalid_argument on out-of-range or inconsistent values.
    void validate() const;
};

// Combined channel gain H: deterministic sinusoid plus Brownian disturbance.
struct ChannelScenario {
    double base_gain    = 3.0e-3;  // mean gain level
    double amplitude    = 0.0;     // sinusoid amplitude
    double angular_freq = 0.0;     // rad/s
    double phase        = 0.0;     // rad
    double sigma        = 0.0;     // diffusion strength, gain/sqrt(s)
    double initial_gain = 3.0e-3;  // H at t = 0

    double deterministic_gain(double t) const {
        return base_gain + amplitude * std::sin(angular_freq * t + phase);
    }
    // d/dt of the deterministic part; the drift of the gain SDE.
    double drift(double t) const {
        return amplitude * angular_freq * std::cos(angular_freq * t + phase);
    }
};

// Named presets: "cc" (constant), "dc" (fast sinusoid, sigma 0.1),
// "h1".."h4" (slow sinusoid, sigma 0 / 0.1 / 1 / 10).
ChannelScenario scenario_by_name(const std::string& name);
bool is_scenario_name(const std::string& name);

} // namespace mfdb
