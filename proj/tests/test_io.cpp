// Config parsing, the policy container, fingerprints, and CSV writers.
// File formats are pinned byte-for-byte: a change here is a format change.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mfdb/grid.hpp"
#include "mfdb/io.hpp"
#include "mfdb/params.hpp"
#include "mfdb/sim.hpp"
#include "mfdb/solver.hpp"

using namespace mfdb;

TEST_CASE("stable double formatting round-trips every value") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(0.001) == "0.001");
    CHECK(format_double(0.0625) == "0.0625");
    CHECK(format_double(0.0) == "0");
    for (double v : {0.1, 1.0 / 3.0, 1e300, 2.5e-17, 1.1058532515374914e-13,
                     3.9810717055349693e-14, 123456.78901234567}) {
        double back = std::strtod(format_double(v).c_str(), nullptr);
        CHECK(back == v);
        back = std::strtod(format_double(-v).c_str(), nullptr);
        CHECK(back == -v);
    }
}

TEST_CASE("empty config takes every default") {
    RunConfig cfg = parse_config_text("{}");
    CHECK(cfg.params.frames == 20);
    CHECK(cfg.params.frame_duration == 0.010);
    CHECK(cfg.params.slots_per_frame == 20);
    CHECK(cfg.params.slot_duration == 5e-4);
    CHECK(cfg.params.device_count == 1000);
    // Economics derived from the scenario: one clear-channel transmission
    // costs 0.03 units, and the fixed power carries 4x headroom.
    CHECK(cfg.params.energy_ref == 1.1058532515374914e-13);
    CHECK(cfg.params.fixed_power == 2.6540478036899795e-11);
    CHECK(cfg.scenario.base_gain == 3e-3);
    CHECK(cfg.scenario.initial_gain == 3e-3);
    CHECK(cfg.strategy == Strategy::kMeanField);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{1});
    CHECK(cfg.n_values == std::vector<int>{50, 500, 1000, 1500, 2000});
    CHECK(cfg.initial_energy == 0.7);
}

TEST_CASE("config keys apply and re-derive the economics") {
    RunConfig cfg = parse_config_text(R"({
        "frames": 10, "base_gain": 6e-3, "sigma": 0.3,
        "strategy": "aloha", "seeds": [5, 6], "n_values": [10],
        "initial_energy": 0.5, "decode_capacity": 4
    })");
    CHECK(cfg.params.frames == 10);
    CHECK(cfg.scenario.base_gain == 6e-3);
    CHECK(cfg.scenario.sigma == 0.3);
    CHECK(cfg.scenario.initial_gain == 6e-3); // deterministic gain at t = 0
    CHECK(cfg.params.energy_ref == 5.529266257687457e-14);
    CHECK(cfg.params.fixed_power == 1.3270239018449897e-11);
    CHECK(cfg.strategy == Strategy::kAloha);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{5, 6});
    CHECK(cfg.n_values == std::vector<int>{10});
    CHECK(cfg.initial_energy == 0.5);
    CHECK(cfg.params.decode_capacity == 4);

    // Explicit energy economics are left alone.
    RunConfig kept = parse_config_text(
        R"({"base_gain": 6e-3, "energy_ref": 1e-13, "fixed_power": 2e-11})");
    CHECK(kept.params.energy_ref == 1e-13);
    CHECK(kept.params.fixed_power == 2e-11);
}

TEST_CASE("frame timing closure") {
    RunConfig a = parse_config_text(R"({"slot_duration": 1e-3})");
    CHECK(a.params.frame_duration == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(a.params.slots_per_frame == 20);

    RunConfig b = parse_config_text(R"({"frame_duration": 0.02})");
    CHECK(b.params.slot_duration == doctest::Approx(1e-3).epsilon(1e-15));

    RunConfig c = parse_config_text(R"({"frame_duration": 0.02, "slot_duration": 1e-3})");
    CHECK(c.params.slots_per_frame == 20);

    CHECK_THROWS_AS(
        parse_config_text(R"({"frame_duration": 0.02, "slot_duration": 3e-4})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        parse_config_text(
            R"({"frame_duration": 0.02, "slot_duration": 1e-3, "slots_per_frame": 19})"),
        std::invalid_argument);
}

TEST_CASE("config rejections name the problem") {
    CHECK_THROWS_WITH_AS(parse_config_text(R"({"foo": 1})"),
                         "unknown config key \"foo\"", std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text(R"({"frames": 2.5})"),
                         "config key \"frames\" must be an integer", std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text(R"({"noise_power": "loud"})"),
                         "config key \"noise_power\" must be a number", std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("not json"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("[1, 2]"), "config must be a JSON object",
                         std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text(R"({"seeds": []})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text(R"({"n_values": [0]})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text(R"({"initial_energy": 1.5})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text(R"({"damping": 0})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text(R"({"base_gain": -1})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text(R"({"strategy": "carrier-pigeon"})"),
                    std::invalid_argument);
}

TEST_CASE("scenario alias replaces the whole channel, then economics derive") {
    std::string alias = "h2";
    RunConfig cfg = parse_config_text(R"({"sigma": 7, "base_gain": 9e-3})", &alias);
    CHECK(cfg.scenario.sigma == 0.1);
    CHECK(cfg.scenario.amplitude == 2e-3);
    CHECK(cfg.scenario.base_gain == 3e-3);
    CHECK(cfg.scenario.initial_gain ==
          doctest::Approx(0.004818594853651364).epsilon(1e-15));
    // Derived from the alias scenario's base gain, not the overridden one.
    CHECK(cfg.params.energy_ref == 1.1058532515374914e-13);
    std::string bad = "zz";
    CHECK_THROWS_AS(parse_config_text("{}", &bad), std::invalid_argument);
}

TEST_CASE("config file loader") {
    const char* path = "/tmp/mfdb_test_config.json";
    {
        std::ofstream out(path);
        out << R"({"frames": 7})";
    }
    RunConfig cfg = load_config(path);
    CHECK(cfg.params.frames == 7);
    std::remove(path);
    CHECK_THROWS_AS(load_config("/tmp/definitely-not-there.json"), std::runtime_error);
}

TEST_CASE("solve fingerprint is stable and input-sensitive") {
    SystemParams p;
    ChannelScenario cc = scenario_by_name("cc");
    SolverGrid g = build_grid(p, cc, 11, 5);
    std::uint64_t fp = solve_fingerprint(p, cc, g);
    CHECK(fp == solve_fingerprint(p, cc, g));

    SystemParams p2 = p;
    p2.damping = 0.4;
    CHECK(solve_fingerprint(p2, cc, g) != fp);
    ChannelScenario s2 = cc;
    s2.sigma = 0.01;
    CHECK(solve_fingerprint(p, s2, g) != fp);
    SolverGrid g2 = build_grid(p, cc, 12, 5);
    CHECK(solve_fingerprint(p, cc, g2) != fp);

    std::string hex = fingerprint_hex(fp);
    CHECK(hex.size() == 16);
    CHECK(std::strtoull(hex.c_str(), nullptr, 16) == fp);
}

TEST_CASE("policy container round-trips bit-exact") {
    SystemParams p;
    p.device_density = 0.0; // fast, fully converged solve
    ChannelScenario cc = scenario_by_name("cc");
    SolverGrid g = build_grid(p, cc, 5, 3);
    SolveResult r = solve_equilibrium(p, cc, g);
    // Exercise nontrivial report fields through the container.
    r.report.final_delta = 1.25e-7;
    r.report.aggregate_frozen = true;
    r.report.freeze_pass = 13;
    r.report.aggregate_residual = 0.04123456789012345;

    std::ostringstream os;
    save_policy(os, p, cc, r);
    std::string text = os.str();
    CHECK(text.rfind("MFDB-POLICY v1\n", 0) == 0);

    std::istringstream is(text);
    LoadedPolicy lp = load_policy(is);
    const SolveResult& q = lp.result;
    CHECK(lp.fingerprint == solve_fingerprint(p, cc, g));
    CHECK(lp.converged == r.report.converged);
    CHECK(q.grid.n_e == g.n_e);
    CHECK(q.grid.n_h == g.n_h);
    CHECK(q.grid.n_d == g.n_d);
    CHECK(q.grid.frames == g.frames);
    CHECK(q.grid.de == g.de);
    CHECK(q.grid.dh == g.dh);
    CHECK(q.grid.dd == g.dd);
    CHECK(q.grid.substeps == g.substeps);
    CHECK(q.grid.e_axis == g.e_axis);
    CHECK(q.grid.h_axis == g.h_axis);
    CHECK(q.grid.delay_axis == g.delay_axis);
    CHECK(q.grid.frame_times == g.frame_times);
    CHECK(q.policy.data == r.policy.data);
    CHECK(q.value.data == r.value.data);
    CHECK(q.meanfield.data == r.meanfield.data);
    CHECK(q.interference.data == r.interference.data);
    CHECK(q.lambda.data == r.lambda.data);
    CHECK(q.report.deltas == r.report.deltas);
    CHECK(q.report.iterations == r.report.iterations);
    CHECK(q.report.final_delta == r.report.final_delta);
    CHECK(q.report.beta == r.report.beta);
    CHECK(q.report.substeps == r.report.substeps);
    CHECK(q.report.max_mass_drift == r.report.max_mass_drift);
    CHECK(q.report.aggregate_frozen == r.report.aggregate_frozen);
    CHECK(q.report.freeze_pass == r.report.freeze_pass);
    CHECK(q.report.aggregate_residual == r.report.aggregate_residual);

    // Saving the loaded result reproduces the file byte-for-byte.
    std::ostringstream os2;
    save_policy(os2, p, cc, q);
    CHECK(os2.str() == text);

    SUBCASE("bad magic") {
        std::istringstream junk("JUNK v9\n" + text.substr(text.find('\n') + 1));
        CHECK_THROWS_AS(load_policy(junk), std::runtime_error);
    }
    SUBCASE("truncated file") {
        std::istringstream half(text.substr(0, text.size() / 2));
        CHECK_THROWS_AS(load_policy(half), std::runtime_error);
    }
    SUBCASE("non-finite entry") {
        std::string bad = text;
        // Last token of the final array.
        auto cut = bad.find_last_not_of("\n");
        auto sp = bad.find_last_of(" \n", cut);
        bad = bad.substr(0, sp + 1) + "nan\n";
        std::istringstream is3(bad);
        CHECK_THROWS_AS(load_policy(is3), std::runtime_error);
    }
    SUBCASE("non-monotone axis") {
        SolveResult wrecked = r;
        wrecked.grid.e_axis[1] = wrecked.grid.e_axis[0];
        std::ostringstream os3;
        save_policy(os3, p, cc, wrecked);
        std::istringstream is3(os3.str());
        CHECK_THROWS_AS(load_policy(is3), std::runtime_error);
    }
}

TEST_CASE("session CSV layout") {
    SessionResult r;
    r.frames.push_back({0.5, 0.25, 0.125, 0.0625});
    std::ostringstream os;
    write_session_csv(os, {"cfg: demo", "seed: 1"}, {{Strategy::kAloha, r}});
    CHECK(os.str() ==
          "# cfg: demo\n"
          "# seed: 1\n"
          "frame,strategy,mean_delay_s,cdc_s2,mean_energy,drop_rate\n"
          "1,aloha,0.5,0.25,0.125,0.0625\n");
}

TEST_CASE("sweep CSV layout") {
    std::ostringstream os;
    write_sweep_csv(os, {}, {{500, Strategy::kAcb, 0.5, 0.25}});
    CHECK(os.str() ==
          "n_devices,strategy,mean_delay_s,stderr_s\n"
          "500,acb,0.5,0.25\n");
}

TEST_CASE("convergence CSV layout") {
    SolveReport rep;
    rep.converged = true;
    rep.iterations = 3;
    rep.substeps = 2;
    rep.max_mass_drift = 0.25;
    rep.deltas = {0.5, 0.25};
    std::ostringstream os;
    write_convergence_csv(os, rep);
    CHECK(os.str() ==
          "# converged: 1\n"
          "# iterations: 3\n"
          "# substeps: 2\n"
          "# max_mass_drift: 0.25\n"
          "iteration,delta_s\n"
          "1,0.5\n"
          "2,0.25\n");
}

TEST_CASE("figure CSV writers") {
    SystemParams p;
    ChannelScenario cc = scenario_by_name("cc");
    SolverGrid g = build_grid(p, cc, 5, 3);

    StateField policy(g.frames, g.n_e, g.n_h);
    for (auto& v : policy.data) v = 0.5;
    std::ostringstream os;
    write_policy_slice_csv(os, g, policy, 1);
    std::istringstream lines(os.str());
    std::string l0, l1, l2;
    std::getline(lines, l0);
    std::getline(lines, l1);
    std::getline(lines, l2);
    CHECK(l0 == "# gain: " + format_double(g.h_axis[1]));
    CHECK(l1 == "frame,energy,backoff_s");
    CHECK(l2 == "1,0,0.5"); // frames are 1-based in figure files

    StateField m(2, g.n_e, g.n_h);
    for (auto& v : m.data) v = 1.0;
    std::ostringstream os2;
    write_meanfield_csv(os2, g, m);
    std::istringstream lines2(os2.str());
    std::getline(lines2, l0);
    std::getline(lines2, l1);
    CHECK(l0 == "frame,energy,mass");
    CHECK(l1.rfind("0,0,", 0) == 0); // density snapshots are 0-based frame boundaries
}
