#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "mfdb/io.hpp"
#include "mfdb/model.hpp"

namespace mfdb {

namespace {

using nlohmann::json;

double as_number(const json& v, const std::string& key) {
    if (!v.is_number()) throw std::invalid_argument("config key \"" + key + "\" must be a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& key) {
    if (!v.is_number_integer())
        throw std::invalid_argument("config key \"" + key + "\" must be an integer");
    return v.get<int>();
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string* scenario_alias) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw std::invalid_argument("config must be a JSON object");

    RunConfig cfg;
    SystemParams& p = cfg.params;
    ChannelScenario& s = cfg.scenario;
    bool set_frame = false, set_slots = false, set_slot = false;
    bool set_eref = false, set_pfix = false, set_h0 = false;

    for (const auto& [key, v] : root.items()) {
        if (key == "frames") p.frames = as_int(v, key);
        else if (key == "frame_duration") { p.frame_duration = as_number(v, key); set_frame = true; }
        else if (key == "slots_per_frame") { p.slots_per_frame = as_int(v, key); set_slots = true; }
        else if (key == "slot_duration") { p.slot_duration = as_number(v, key); set_slot = true; }
        else if (key == "path_loss_exp") p.path_loss_exp = as_number(v, key);
        else if (key == "noise_power") p.noise_power = as_number(v, key);
        else if (key == "bandwidth") p.bandwidth = as_number(v, key);
        else if (key == "device_density") p.device_density = as_number(v, key);
        else if (key == "sinr_threshold") p.sinr_threshold = as_number(v, key);
        else if (key == "device_count") p.device_count = as_int(v, key);
        else if (key == "cluster_radius") p.cluster_radius = as_number(v, key);
        else if (key == "max_power") p.max_power = as_number(v, key);
        else if (key == "energy_ref") { p.energy_ref = as_number(v, key); set_eref = true; }
        else if (key == "penalty_scale") p.penalty_scale = as_number(v, key);
        else if (key == "penalty_steepness") p.penalty_steepness = as_number(v, key);
        else if (key == "acb_factor") p.acb_factor = as_number(v, key);
        else if (key == "fixed_power") { p.fixed_power = as_number(v, key); set_pfix = true; }
        else if (key == "decode_capacity") p.decode_capacity = as_int(v, key);
        else if (key == "fp_tolerance") p.fp_tolerance = as_number(v, key);
        else if (key == "fp_max_iters") p.fp_max_iters = as_int(v, key);
        else if (key == "kernel_bandwidth") p.kernel_bandwidth = as_number(v, key);
        else if (key == "damping") p.damping = as_number(v, key);
        else if (key == "base_gain") s.base_gain = as_number(v, key);
        else if (key == "amplitude") s.amplitude = as_number(v, key);
        else if (key == "angular_freq") s.angular_freq = as_number(v, key);
        else if (key == "phase") s.phase = as_number(v, key);
        else if (key == "sigma") s.sigma = as_number(v, key);
        else if (key == "initial_gain") { s.initial_gain = as_number(v, key); set_h0 = true; }
        else if (key == "strategy") {
            if (!v.is_string()) throw std::invalid_argument("config key \"strategy\" must be a string");
            cfg.strategy = strategy_from_name(v.get<std::string>());
        } else if (key == "seeds") {
            if (!v.is_array() || v.empty())
                throw std::invalid_argument("config key \"seeds\" must be a non-empty array");
            cfg.seeds.clear();
            for (const auto& e : v) cfg.seeds.push_back(e.get<std::uint64_t>());
        } else if (key == "n_values") {
            if (!v.is_array() || v.empty())
                throw std::invalid_argument("config key \"n_values\" must be a non-empty array");
            cfg.n_values.clear();
            for (const auto& e : v) cfg.n_values.push_back(as_int(e, key));
        } else if (key == "initial_energy") {
            cfg.initial_energy = as_number(v, key);
            if (cfg.initial_energy < 0.0 || cfg.initial_energy > 1.0)
                throw std::invalid_argument("initial_energy must lie in [0, 1]");
        } else {
            throw std::invalid_argument("unknown config key \"" + key + "\"");
        }
    }

    // Frame timing closure: derive whichever of the three is unset, and
    // reject explicit combinations that disagree.
    if (set_slot && !set_frame) {
        p.frame_duration = p.slots_per_frame * p.slot_duration;
    } else if (!set_slot) {
        p.slot_duration = p.frame_duration / p.slots_per_frame;
    } else if (set_frame && set_slot && !set_slots) {
        double k = p.frame_duration / p.slot_duration;
        p.slots_per_frame = static_cast<int>(std::lround(k));
        if (std::abs(k - p.slots_per_frame) > 1e-9)
            throw std::invalid_argument(
                "frame_duration / slot_duration must be a whole slot count");
    }

    if (scenario_alias) s = scenario_by_name(*scenario_alias);
    else if (!set_h0) s.initial_gain = s.deterministic_gain(0.0);

    // Scenario-derived economics: one zero-interference transmission costs
    // 0.03 normalized units, and the fixed power carries 4x headroom.
    double p0 = p.sinr_threshold * p.noise_power / s.base_gain;
    if (!set_eref) p.energy_ref = p0 * p.slot_duration / 0.03;
    if (!set_pfix) p.fixed_power = 4.0 * p0;

    p.validate();
    if (s.base_gain <= 0) throw std::invalid_argument("base_gain must be positive");
    if (s.sigma < 0) throw std::invalid_argument("sigma must be >= 0");
    if (s.initial_gain <= 0) throw std::invalid_argument("initial_gain must be positive");
    for (int n : cfg.n_values)
        if (n < 1) throw std::invalid_argument("n_values entries must be >= 1");
    return cfg;
}

RunConfig load_config(const std::string& path, const std::string* scenario_alias) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), scenario_alias);
}

} // namespace mfdb
