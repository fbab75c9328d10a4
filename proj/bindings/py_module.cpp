// Python surface for the backoff equilibrium pipeline: parameters, grid,
// solve, session simulation, policy files, config parsing, and the built-in
// verification suite. Field arrays come back as numpy arrays (copies).
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <optional>
#include <vector>

#include "mfdb/checks.hpp"
#include "mfdb/grid.hpp"
#include "mfdb/io.hpp"
#include "mfdb/model.hpp"
#include "mfdb/params.hpp"
#include "mfdb/sim.hpp"
#include "mfdb/solver.hpp"

namespace py = pybind11;
using namespace mfdb;

namespace {

py::array_t<double> state_array(const StateField& f) {
    py::array_t<double> a(std::vector<py::ssize_t>{f.nt, f.n_e, f.n_h});
    std::copy(f.data.begin(), f.data.end(), a.mutable_data());
    return a;
}

py::array_t<double> delay_array(const DelayField& f) {
    py::array_t<double> a(std::vector<py::ssize_t>{f.nt, f.n_d});
    std::copy(f.data.begin(), f.data.end(), a.mutable_data());
    return a;
}

} // namespace

PYBIND11_MODULE(mfdb_py, m) {
    m.doc() = "Dynamic-backoff equilibrium solver and uplink session simulator";

    py::class_<SystemParams>(m, "SystemParams")
        .def(py::init<>())
        .def_readwrite("frames", &SystemParams::frames)
        .def_readwrite("frame_duration", &SystemParams::frame_duration)
        .def_readwrite("slots_per_frame", &SystemParams::slots_per_frame)
        .def_readwrite("slot_duration", &SystemParams::slot_duration)
        .def_readwrite("path_loss_exp", &SystemParams::path_loss_exp)
        .def_readwrite("noise_power", &SystemParams::noise_power)
        .def_readwrite("bandwidth", &SystemParams::bandwidth)
        .def_readwrite("device_density", &SystemParams::device_density)
        .def_readwrite("sinr_threshold", &SystemParams::sinr_threshold)
        .def_readwrite("device_count", &SystemParams::device_count)
        .def_readwrite("cluster_radius", &SystemParams::cluster_radius)
        .def_readwrite("max_power", &SystemParams::max_power)
        .def_readwrite("energy_ref", &SystemParams::energy_ref)
        .def_readwrite("penalty_scale", &SystemParams::penalty_scale)
        .def_readwrite("penalty_steepness", &SystemParams::penalty_steepness)
        .def_readwrite("acb_factor", &SystemParams::acb_factor)
        .def_readwrite("fixed_power", &SystemParams::fixed_power)
        .def_readwrite("decode_capacity", &SystemParams::decode_capacity)
        .def_readwrite("fp_tolerance", &SystemParams::fp_tolerance)
        .def_readwrite("fp_max_iters", &SystemParams::fp_max_iters)
        .def_readwrite("kernel_bandwidth", &SystemParams::kernel_bandwidth)
        .def_readwrite("damping", &SystemParams::damping)
        .def("horizon", &SystemParams::horizon)
        .def("beta", &SystemParams::beta)
        .def("validate", &SystemParams::validate);

    py::class_<ChannelScenario>(m, "ChannelScenario")
        .def(py::init<>())
        .def_readwrite("base_gain", &ChannelScenario::base_gain)
        .def_readwrite("amplitude", &ChannelScenario::amplitude)
        .def_readwrite("angular_freq", &ChannelScenario::angular_freq)
        .def_readwrite("phase", &ChannelScenario::phase)
        .def_readwrite("sigma", &ChannelScenario::sigma)
        .def_readwrite("initial_gain", &ChannelScenario::initial_gain)
        .def("deterministic_gain", &ChannelScenario::deterministic_gain)
        .def("drift", &ChannelScenario::drift);

    m.def("scenario_by_name", &scenario_by_name, py::arg("name"));
    m.def("is_scenario_name", &is_scenario_name, py::arg("name"));

    py::class_<SolverGrid>(m, "SolverGrid")
        .def_readonly("n_e", &SolverGrid::n_e)
        .def_readonly("n_h", &SolverGrid::n_h)
        .def_readonly("n_d", &SolverGrid::n_d)
        .def_readonly("frames", &SolverGrid::frames)
        .def_readonly("substeps", &SolverGrid::substeps)
        .def_readonly("de", &SolverGrid::de)
        .def_readonly("dh", &SolverGrid::dh)
        .def_readonly("dd", &SolverGrid::dd)
        .def_readonly("e_axis", &SolverGrid::e_axis)
        .def_readonly("h_axis", &SolverGrid::h_axis)
        .def_readonly("delay_axis", &SolverGrid::delay_axis)
        .def_readonly("frame_times", &SolverGrid::frame_times);

    m.def("build_grid", &build_grid, py::arg("params"), py::arg("scenario"),
          py::arg("n_e") = 101, py::arg("n_h") = 61, py::arg("substeps_override") = 0);

    py::class_<SolveReport>(m, "SolveReport")
        .def_readonly("converged", &SolveReport::converged)
        .def_readonly("iterations", &SolveReport::iterations)
        .def_readonly("final_delta", &SolveReport::final_delta)
        .def_readonly("deltas", &SolveReport::deltas)
        .def_readonly("beta", &SolveReport::beta)
        .def_readonly("substeps", &SolveReport::substeps)
        .def_readonly("max_mass_drift", &SolveReport::max_mass_drift)
        .def_readonly("aggregate_frozen", &SolveReport::aggregate_frozen)
        .def_readonly("freeze_pass", &SolveReport::freeze_pass)
        .def_readonly("aggregate_residual", &SolveReport::aggregate_residual);

    py::class_<SolveResult>(m, "SolveResult")
        .def_readonly("grid", &SolveResult::grid)
        .def_readonly("report", &SolveResult::report)
        .def_property_readonly("policy",
                               [](const SolveResult& r) { return state_array(r.policy); })
        .def_property_readonly("value",
                               [](const SolveResult& r) { return state_array(r.value); })
        .def_property_readonly("meanfield",
                               [](const SolveResult& r) { return state_array(r.meanfield); })
        .def_property_readonly(
            "interference", [](const SolveResult& r) { return delay_array(r.interference); })
        .def_property_readonly(
            "delay_density", [](const SolveResult& r) { return delay_array(r.lambda); });

    m.def(
        "solve_equilibrium",
        [](const SystemParams& p, const ChannelScenario& s, const SolverGrid& g) {
            return solve_equilibrium(p, s, g);
        },
        py::arg("params"), py::arg("scenario"), py::arg("grid"));

    py::class_<FrameStats>(m, "FrameStats")
        .def_readonly("mean_delay", &FrameStats::mean_delay)
        .def_readonly("cum_delay_cost", &FrameStats::cum_delay_cost)
        .def_readonly("mean_energy", &FrameStats::mean_energy)
        .def_readonly("drop_rate", &FrameStats::drop_rate);

    py::class_<DeviceState>(m, "DeviceState")
        .def_readonly("radius", &DeviceState::radius)
        .def_readonly("loss", &DeviceState::loss)
        .def_readonly("energy", &DeviceState::energy)
        .def_readonly("gain", &DeviceState::gain)
        .def_readonly("exhausted_frame", &DeviceState::exhausted_frame);

    py::class_<SessionResult>(m, "SessionResult")
        .def_readonly("frames", &SessionResult::frames)
        .def_readonly("final_energy", &SessionResult::final_energy)
        .def_readonly("total_cost", &SessionResult::total_cost)
        .def_readonly("devices", &SessionResult::devices)
        .def_readonly("exhausted_count", &SessionResult::exhausted_count)
        .def_readonly("infeasible", &SessionResult::infeasible)
        .def_readonly("infeasible_frame", &SessionResult::infeasible_frame)
        .def_readonly("clamped_lookups", &SessionResult::clamped_lookups);

    m.def(
        "run_session",
        [](const SystemParams& p, const ChannelScenario& s, const std::string& strategy,
           const SolveResult* policy, std::uint64_t seed, int device_count,
           double initial_energy) {
            return run_session(p, s, strategy_from_name(strategy), policy, seed,
                               device_count, initial_energy);
        },
        py::arg("params"), py::arg("scenario"), py::arg("strategy"),
        py::arg("policy").none(true), py::arg("seed"), py::arg("device_count"),
        py::arg("initial_energy"));

    py::class_<SweepPoint>(m, "SweepPoint")
        .def_readonly("n_devices", &SweepPoint::n_devices)
        .def_property_readonly(
            "strategy", [](const SweepPoint& pt) { return strategy_name(pt.strategy); })
        .def_readonly("mean_delay", &SweepPoint::mean_delay)
        .def_readonly("stderr_delay", &SweepPoint::stderr_delay);

    m.def(
        "sweep_population",
        [](const SystemParams& p, const ChannelScenario& s, const SolveResult* policy,
           const std::vector<std::string>& strategies, const std::vector<int>& n_values,
           const std::vector<std::uint64_t>& seeds, double initial_energy) {
            std::vector<Strategy> st;
            st.reserve(strategies.size());
            for (const auto& name : strategies) st.push_back(strategy_from_name(name));
            return sweep_population(p, s, policy, st, n_values, seeds, initial_energy);
        },
        py::arg("params"), py::arg("scenario"), py::arg("policy").none(true),
        py::arg("strategies"), py::arg("n_values"), py::arg("seeds"),
        py::arg("initial_energy"));

    py::class_<RunConfig>(m, "RunConfig")
        .def_readonly("params", &RunConfig::params)
        .def_readonly("scenario", &RunConfig::scenario)
        .def_property_readonly(
            "strategy", [](const RunConfig& c) { return strategy_name(c.strategy); })
        .def_readonly("seeds", &RunConfig::seeds)
        .def_readonly("n_values", &RunConfig::n_values)
        .def_readonly("initial_energy", &RunConfig::initial_energy);

    m.def(
        "parse_config_text",
        [](const std::string& text, std::optional<std::string> alias) {
            return parse_config_text(text, alias ? &*alias : nullptr);
        },
        py::arg("text"), py::arg("scenario_alias") = py::none());
    m.def(
        "load_config",
        [](const std::string& path, std::optional<std::string> alias) {
            return load_config(path, alias ? &*alias : nullptr);
        },
        py::arg("path"), py::arg("scenario_alias") = py::none());

    m.def("solve_fingerprint", &solve_fingerprint, py::arg("params"), py::arg("scenario"),
          py::arg("grid"));
    m.def("fingerprint_hex", &fingerprint_hex, py::arg("fingerprint"));
    m.def("save_policy_file", &save_policy_file, py::arg("path"), py::arg("params"),
          py::arg("scenario"), py::arg("result"));

    py::class_<LoadedPolicy>(m, "LoadedPolicy")
        .def_readonly("result", &LoadedPolicy::result)
        .def_readonly("fingerprint", &LoadedPolicy::fingerprint)
        .def_readonly("converged", &LoadedPolicy::converged);

    m.def("load_policy_file", &load_policy_file, py::arg("path"));

    m.def("run_checks", []() {
        CheckReport r = run_checks();
        py::list out;
        for (const auto& e : r.entries) out.append(py::make_tuple(e.name, e.pass, e.detail));
        return out;
    });
}
