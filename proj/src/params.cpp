#include "mfdb/params.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mfdb/model.hpp"

namespace mfdb {

double SystemParams::beta() const {
    return beta_closed_form(device_density, path_loss_exp, cluster_radius);
}

void SystemParams::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
    if (frames < 1) fail("frames must be >= 1");
    if (slots_per_frame < 1) fail("slots_per_frame must be >= 1");
    if (frame_duration <= 0) fail("frame_duration must be positive");
    if (slot_duration <= 0) fail("slot_duration must be positive");
    double derived = slots_per_frame * slot_duration;
    if (std::abs(derived - frame_duration) > 1e-9 * frame_duration)
        fail("frame_duration must equal slots_per_frame * slot_duration (got " +
             std::to_string(frame_duration) + " vs " + std::to_string(derived) + ")");
    if (path_loss_exp <= 0) fail("path_loss_exp must be positive");
    if (noise_power <= 0) fail("noise_power must be positive");
    if (device_density < 0) fail("device_density must be >= 0 (0 means an empty cluster)");
    if (sinr_threshold <= 0) fail("sinr_threshold must be positive");
    if (device_count < 1) fail("device_count must be >= 1");
    if (cluster_radius <= 0) fail("cluster_radius must be positive");
    if (cluster_radius > 1.0 && std::abs(path_loss_exp - 2.0) < 1e-12)
        fail("path_loss_exp = 2 with cluster_radius > 1 has no closed-form normalization");
    if (max_power <= 0) fail("max_power must be positive");
    if (energy_ref <= 0) fail("energy_ref must be positive");
    if (penalty_scale < 0) fail("penalty_scale must be >= 0");
    if (penalty_steepness <= 0) fail("penalty_steepness must be positive");
    if (acb_factor < 0 || acb_factor >= 1) fail("acb_factor must be in [0, 1)");
    if (fixed_power <= 0) fail("fixed_power must be positive");
    if (decode_capacity < 1) fail("decode_capacity must be >= 1");
    if (fp_tolerance <= 0) fail("fp_tolerance must be positive");
    if (fp_max_iters < 1) fail("fp_max_iters must be >= 1");
    if (kernel_bandwidth <= 0) fail("kernel_bandwidth must be positive");
    if (damping <= 0 || damping > 1) fail("damping must be in (0, 1]");
}

namespace {

ChannelScenario make_slow_fading(double sigma) {
    ChannelScenario s;
    s.base_gain = 3.0e-3;
    s.amplitude = 2.0e-3;
    s.angular_freq = 0.4;
    s.phase = 2.0;
    s.sigma = sigma;
    s.initial_gain = s.deterministic_gain(0.0);
    return s;
}

} // namespace

ChannelScenario scenario_by_name(const std::string& name) {
    if (name == "cc") {
        ChannelScenario s;
        s.base_gain = 3.0e-3;
        s.initial_gain = 3.0e-3;
        return s;
    }
    if (name == "dc") {
        ChannelScenario s = make_slow_fading(0.1);
        s.angular_freq = 20.0;
        s.initial_gain = s.deterministic_gain(0.0);
        return s;
    }
    if (name == "h1") return make_slow_fading(0.0);
    if (name == "h2") return make_slow_fading(0.1);
    if (name == "h3") return make_slow_fading(1.0);
    if (name == "h4") return make_slow_fading(10.0);
    throw std::invalid_argument("unknown scenario name: " + name);
}

bool is_scenario_name(const std::string& name) {
    return name == "cc" || name == "dc" || name == "h1" || name == "h2" ||
           name == "h3" || name == "h4";
}

} // namespace mfdb
