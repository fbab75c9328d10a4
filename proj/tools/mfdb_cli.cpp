// mfdb — experiment driver for the mean-field dynamic backoff artifact.
//
// Subcommands:
//   solve     config -> policy file + convergence/slice/mean-field CSVs
//   simulate  config + policy -> per-frame session CSV for one strategy
//   sweep     config + policy -> mean delay vs population size CSV
//   compare   config + policy -> all four strategies, one CSV + text summary
//   check     built-in oracle suite, exit code reflects the outcome
//
// Every CSV is regenerable from config + seeds alone; provenance lines at the
// top of each file record the full parameter set that produced it.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "mfdb/checks.hpp"
#include "mfdb/io.hpp"
#include "mfdb/sim.hpp"
#include "mfdb/solver.hpp"

namespace {

using namespace mfdb;

// --- small helpers ---------------------------------------------------------

std::string path_stem(const std::string& path) {
    std::size_t slash = path.find_last_of('/');
    std::size_t dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return path;
    return path.substr(0, dot);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << text;
    if (!os) throw std::runtime_error("write failed on " + path);
}

RunConfig make_config(const std::string& config_path, const std::string& scenario_flag) {
    const std::string* alias = scenario_flag.empty() ? nullptr : &scenario_flag;
    if (config_path.empty()) return parse_config_text("{}", alias);
    return load_config(config_path, alias);
}

std::vector<std::uint64_t> make_seeds(const RunConfig& cfg, int seeds_flag) {
    if (seeds_flag <= 0) return cfg.seeds;
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(seeds_flag));
    std::iota(seeds.begin(), seeds.end(), std::uint64_t{1});
    return seeds;
}

std::vector<int> parse_n_values(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        int v = std::stoi(item, &used);
        if (used != item.size() || v < 1)
            throw std::runtime_error("bad --n-values entry \"" + item + "\"");
        out.push_back(v);
    }
    if (out.empty()) throw std::runtime_error("--n-values needs at least one entry");
    return out;
}

std::string params_line(const SystemParams& p) {
    std::ostringstream os;
    os << "params:"
       << " frames=" << p.frames << " frame_duration=" << format_double(p.frame_duration)
       << " slots_per_frame=" << p.slots_per_frame
       << " slot_duration=" << format_double(p.slot_duration)
       << " path_loss_exp=" << format_double(p.path_loss_exp)
       << " noise_power=" << format_double(p.noise_power)
       << " bandwidth=" << format_double(p.bandwidth)
       << " device_density=" << format_double(p.device_density)
       << " sinr_threshold=" << format_double(p.sinr_threshold)
       << " device_count=" << p.device_count
       << " cluster_radius=" << format_double(p.cluster_radius)
       << " max_power=" << format_double(p.max_power)
       << " energy_ref=" << format_double(p.energy_ref)
       << " penalty_scale=" << format_double(p.penalty_scale)
       << " penalty_steepness=" << format_double(p.penalty_steepness)
       << " acb_factor=" << format_double(p.acb_factor)
       << " fixed_power=" << format_double(p.fixed_power)
       << " decode_capacity=" << p.decode_capacity
       << " fp_tolerance=" << format_double(p.fp_tolerance)
       << " fp_max_iters=" << p.fp_max_iters
       << " kernel_bandwidth=" << format_double(p.kernel_bandwidth)
       << " damping=" << format_double(p.damping);
    return os.str();
}

std::string scenario_line(const ChannelScenario& s) {
    std::ostringstream os;
    os << "scenario:"
       << " base_gain=" << format_double(s.base_gain)
       << " amplitude=" << format_double(s.amplitude)
       << " angular_freq=" << format_double(s.angular_freq)
       << " phase=" << format_double(s.phase) << " sigma=" << format_double(s.sigma)
       << " initial_gain=" << format_double(s.initial_gain);
    return os.str();
}

std::vector<std::string> provenance_lines(const RunConfig& cfg,
                                          const std::vector<std::uint64_t>& seeds,
                                          const LoadedPolicy* policy) {
    std::vector<std::string> out;
    out.push_back(params_line(cfg.params));
    out.push_back(scenario_line(cfg.scenario));
    out.push_back("initial_energy: " + format_double(cfg.initial_energy));
    std::string s = "seeds:";
    for (std::uint64_t seed : seeds) s += " " + std::to_string(seed);
    out.push_back(s);
    if (policy) out.push_back("policy_fingerprint: " + fingerprint_hex(policy->fingerprint));
    return out;
}

// Loads a policy and insists it was solved for exactly this configuration.
LoadedPolicy load_matching_policy(const std::string& path, const RunConfig& cfg) {
    LoadedPolicy lp = load_policy_file(path);
    std::uint64_t want = solve_fingerprint(cfg.params, cfg.scenario, lp.result.grid);
    if (want != lp.fingerprint)
        throw std::runtime_error("policy file " + path +
                                 " was solved for a different configuration (fingerprint " +
                                 fingerprint_hex(lp.fingerprint) + ", config needs " +
                                 fingerprint_hex(want) + ")");
    if (!lp.converged)
        std::cerr << "warning: policy in " << path
                  << " did not converge; results use its last iterate\n";
    return lp;
}

// Runs one strategy over all seeds; returns the per-seed sessions.
std::vector<SessionResult> run_seeds(const RunConfig& cfg, Strategy strategy,
                                     const SolveResult* policy,
                                     const std::vector<std::uint64_t>& seeds) {
    std::vector<SessionResult> runs;
    runs.reserve(seeds.size());
    for (std::uint64_t seed : seeds)
        runs.push_back(run_session(cfg.params, cfg.scenario, strategy, policy, seed,
                                   cfg.params.device_count, cfg.initial_energy));
    return runs;
}

// Seed-averaged frame statistics (the CSV rows); scalar fields keep majority
// or mean semantics for the summary table.
SessionResult average_sessions(const std::vector<SessionResult>& runs) {
    SessionResult avg;
    if (runs.empty()) return avg;
    std::size_t frames = runs.front().frames.size();
    avg.frames.assign(frames, FrameStats{});
    for (const SessionResult& r : runs) {
        for (std::size_t f = 0; f < frames; ++f) {
            avg.frames[f].mean_delay += r.frames[f].mean_delay;
            avg.frames[f].cum_delay_cost += r.frames[f].cum_delay_cost;
            avg.frames[f].mean_energy += r.frames[f].mean_energy;
            avg.frames[f].drop_rate += r.frames[f].drop_rate;
        }
        avg.exhausted_count += r.exhausted_count;
        avg.clamped_lookups += r.clamped_lookups;
    }
    double inv = 1.0 / static_cast<double>(runs.size());
    for (FrameStats& fs : avg.frames) {
        fs.mean_delay *= inv;
        fs.cum_delay_cost *= inv;
        fs.mean_energy *= inv;
        fs.drop_rate *= inv;
    }
    int infeasible_runs = 0;
    for (const SessionResult& r : runs)
        if (r.infeasible) ++infeasible_runs;
    avg.infeasible = 2 * infeasible_runs >= static_cast<int>(runs.size());
    return avg;
}

// --- text summary (compare) ------------------------------------------------

struct SummaryRow {
    std::string strategy;
    std::string mean_delay;
    std::string cdc;     // with INF flag when saturated
    std::string exhaust; // first frame half the population died, or "-"
};

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string render_summary(const std::vector<std::pair<Strategy, std::vector<SessionResult>>>&
                               by_strategy) {
    if (by_strategy.empty()) return "no data\n";
    std::vector<SummaryRow> rows;
    for (const auto& [strategy, runs] : by_strategy) {
        if (runs.empty() || runs.front().frames.empty()) continue;
        double delay = 0.0, cdc = 0.0;
        int infeasible_runs = 0, exhaust_runs = 0;
        double exhaust_frame = 0.0;
        for (const SessionResult& r : runs) {
            double d = 0.0;
            for (const FrameStats& fs : r.frames) d += fs.mean_delay;
            delay += d / static_cast<double>(r.frames.size());
            cdc += r.frames.back().cum_delay_cost;
            if (r.infeasible) ++infeasible_runs;
            if (r.infeasible_frame > 0) {
                ++exhaust_runs;
                exhaust_frame += r.infeasible_frame;
            }
        }
        double inv = 1.0 / static_cast<double>(runs.size());
        SummaryRow row;
        row.strategy = strategy_name(strategy);
        row.mean_delay = fmt_g(delay * inv);
        row.cdc = fmt_g(cdc * inv);
        if (2 * infeasible_runs >= static_cast<int>(runs.size())) row.cdc += " INF";
        if (exhaust_runs > 0) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.1f",
                          exhaust_frame / static_cast<double>(exhaust_runs));
            row.exhaust = buf;
        } else {
            row.exhaust = "-";
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) return "no data\n";

    const char* head[4] = {"strategy", "mean_delay_s", "cdc_at_T_s2", "exhaust_frame"};
    std::size_t width[4];
    for (int c = 0; c < 4; ++c) width[c] = std::string(head[c]).size();
    for (const SummaryRow& r : rows) {
        width[0] = std::max(width[0], r.strategy.size());
        width[1] = std::max(width[1], r.mean_delay.size());
        width[2] = std::max(width[2], r.cdc.size());
        width[3] = std::max(width[3], r.exhaust.size());
    }
    auto pad = [](const std::string& s, std::size_t w) {
        return s + std::string(w - s.size() + 2, ' ');
    };
    std::string out;
    for (int c = 0; c < 4; ++c) out += pad(head[c], width[c]);
    out += '\n';
    for (const SummaryRow& r : rows) {
        out += pad(r.strategy, width[0]);
        out += pad(r.mean_delay, width[1]);
        out += pad(r.cdc, width[2]);
        out += pad(r.exhaust, width[3]);
        out += '\n';
    }
    return out;
}

// --- subcommands -----------------------------------------------------------

int cmd_solve(const std::string& config_path, const std::string& scenario_flag,
              const std::string& out_path) {
    RunConfig cfg = make_config(config_path, scenario_flag);
    SolverGrid grid = build_grid(cfg.params, cfg.scenario);
    SolveResult result = solve_equilibrium(cfg.params, cfg.scenario, grid);

    if (result.report.converged)
        std::cout << "converged in " << result.report.iterations
                  << " iterations (final change " << format_double(result.report.final_delta)
                  << " s)\n";
    else
        std::cout << "did not converge within " << result.report.iterations
                  << " iterations (final change " << format_double(result.report.final_delta)
                  << " s); writing the last iterate\n";

    save_policy_file(out_path, cfg.params, cfg.scenario, result);
    std::cout << "wrote " << out_path << '\n';

    std::string stem = path_stem(out_path);
    {
        std::ostringstream os;
        write_convergence_csv(os, result.report);
        write_text_file(stem + ".convergence.csv", os.str());
        std::cout << "wrote " << stem << ".convergence.csv\n";
    }
    {
        std::ostringstream os;
        write_policy_slice_csv(os, result.grid, result.policy,
                               result.grid.nearest_h(cfg.scenario.initial_gain));
        write_text_file(stem + ".slice.csv", os.str());
        std::cout << "wrote " << stem << ".slice.csv\n";
    }
    {
        std::ostringstream os;
        write_meanfield_csv(os, result.grid, result.meanfield);
        write_text_file(stem + ".meanfield.csv", os.str());
        std::cout << "wrote " << stem << ".meanfield.csv\n";
    }
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& scenario_flag,
                 const std::string& policy_path, const std::string& strategy_flag,
                 int seeds_flag, const std::string& out_path) {
    RunConfig cfg = make_config(config_path, scenario_flag);
    Strategy strategy = strategy_flag.empty() ? cfg.strategy : strategy_from_name(strategy_flag);
    std::vector<std::uint64_t> seeds = make_seeds(cfg, seeds_flag);

    LoadedPolicy lp;
    const SolveResult* policy = nullptr;
    if (!policy_path.empty()) {
        lp = load_matching_policy(policy_path, cfg);
        policy = &lp.result;
    } else if (strategy == Strategy::kMeanField) {
        throw std::runtime_error("the mfdb strategy needs --policy");
    }

    std::vector<SessionResult> runs = run_seeds(cfg, strategy, policy, seeds);
    std::vector<std::pair<Strategy, SessionResult>> sessions;
    sessions.emplace_back(strategy, average_sessions(runs));

    std::vector<std::string> prov = provenance_lines(cfg, seeds, policy ? &lp : nullptr);
    prov.push_back("strategy: " + strategy_name(strategy));
    std::ostringstream os;
    write_session_csv(os, prov, sessions);
    write_text_file(out_path, os.str());
    std::cout << "wrote " << out_path << '\n';
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& scenario_flag,
              const std::string& policy_path, const std::string& strategy_flag,
              int seeds_flag, const std::string& n_values_flag, const std::string& out_path) {
    RunConfig cfg = make_config(config_path, scenario_flag);
    std::vector<std::uint64_t> seeds = make_seeds(cfg, seeds_flag);
    std::vector<int> n_values =
        n_values_flag.empty() ? cfg.n_values : parse_n_values(n_values_flag);

    std::vector<Strategy> strategies;
    if (strategy_flag.empty())
        strategies = {Strategy::kMeanField, Strategy::kAcb, Strategy::kAloha};
    else
        strategies = {strategy_from_name(strategy_flag)};

    LoadedPolicy lp;
    const SolveResult* policy = nullptr;
    bool needs_policy = false;
    for (Strategy s : strategies)
        if (s == Strategy::kMeanField) needs_policy = true;
    if (!policy_path.empty()) {
        lp = load_matching_policy(policy_path, cfg);
        policy = &lp.result;
    } else if (needs_policy) {
        throw std::runtime_error("the mfdb strategy needs --policy");
    }

    std::vector<SweepPoint> points = sweep_population(cfg.params, cfg.scenario, policy,
                                                      strategies, n_values, seeds,
                                                      cfg.initial_energy);

    std::vector<std::string> prov = provenance_lines(cfg, seeds, policy ? &lp : nullptr);
    std::string nv = "n_values:";
    for (int n : n_values) nv += " " + std::to_string(n);
    prov.push_back(nv);
    std::ostringstream os;
    write_sweep_csv(os, prov, points);
    write_text_file(out_path, os.str());
    std::cout << "wrote " << out_path << '\n';
    return 0;
}

int cmd_compare(const std::string& config_path, const std::string& scenario_flag,
                const std::string& policy_path, int seeds_flag, const std::string& out_path) {
    RunConfig cfg = make_config(config_path, scenario_flag);
    std::vector<std::uint64_t> seeds = make_seeds(cfg, seeds_flag);
    if (policy_path.empty()) throw std::runtime_error("compare needs --policy");
    LoadedPolicy lp = load_matching_policy(policy_path, cfg);

    const Strategy all[4] = {Strategy::kMeanField, Strategy::kAcb, Strategy::kAloha,
                             Strategy::kMinBackoff};
    std::vector<std::pair<Strategy, std::vector<SessionResult>>> by_strategy;
    std::vector<std::pair<Strategy, SessionResult>> sessions;
    for (Strategy s : all) {
        std::vector<SessionResult> runs = run_seeds(cfg, s, &lp.result, seeds);
        sessions.emplace_back(s, average_sessions(runs));
        by_strategy.emplace_back(s, std::move(runs));
    }

    if (!out_path.empty()) {
        std::vector<std::string> prov = provenance_lines(cfg, seeds, &lp);
        prov.push_back("strategies: mfdb acb aloha mb");
        std::ostringstream os;
        write_session_csv(os, prov, sessions);
        write_text_file(out_path, os.str());
        std::cout << "wrote " << out_path << '\n';
    }
    std::cout << render_summary(by_strategy);
    return 0;
}

int cmd_check() {
    CheckReport report = run_checks();
    std::cout << render_checks(report);
    return report.all_pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mean-field dynamic backoff: solver, simulator and checks"};
    app.require_subcommand(1);

    std::string config_path, scenario_flag, policy_path, strategy_flag, out_path;
    std::string n_values_flag;
    int seeds_flag = 0;

    auto add_common = [&](CLI::App* sub, bool with_policy) {
        sub->add_option("--config", config_path, "JSON run configuration");
        sub->add_option("--scenario", scenario_flag, "channel preset: cc, dc, h1, h2, h3, h4")
            ->check(CLI::IsMember({"cc", "dc", "h1", "h2", "h3", "h4"}));
        if (with_policy) sub->add_option("--policy", policy_path, "solved policy file");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve the equilibrium and save the policy");
    add_common(solve, false);
    solve->add_option("--out", out_path, "policy file to write")->required();

    CLI::App* simulate = app.add_subcommand("simulate", "run one strategy, write session CSV");
    add_common(simulate, true);
    simulate->add_option("--strategy", strategy_flag, "mfdb, acb, aloha or mb")
        ->check(CLI::IsMember({"mfdb", "acb", "aloha", "mb"}));
    simulate->add_option("--seeds", seeds_flag, "run seeds 1..N and average");
    simulate->add_option("--out", out_path, "session CSV to write")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "mean delay versus population size");
    add_common(sweep, true);
    sweep->add_option("--strategy", strategy_flag, "restrict to one strategy")
        ->check(CLI::IsMember({"mfdb", "acb", "aloha", "mb"}));
    sweep->add_option("--seeds", seeds_flag, "run seeds 1..N and average");
    sweep->add_option("--n-values", n_values_flag, "comma-separated population sizes");
    sweep->add_option("--out", out_path, "sweep CSV to write")->required();

    CLI::App* compare = app.add_subcommand("compare", "all four strategies side by side");
    add_common(compare, true);
    compare->add_option("--seeds", seeds_flag, "run seeds 1..N and average");
    compare->add_option("--out", out_path, "merged session CSV to write");

    app.add_subcommand("check", "run the built-in oracle suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(config_path, scenario_flag, out_path);
        if (simulate->parsed())
            return cmd_simulate(config_path, scenario_flag, policy_path, strategy_flag,
                                seeds_flag, out_path);
        if (sweep->parsed())
            return cmd_sweep(config_path, scenario_flag, policy_path, strategy_flag, seeds_flag,
                             n_values_flag, out_path);
        if (compare->parsed())
            return cmd_compare(config_path, scenario_flag, policy_path, seeds_flag, out_path);
        return cmd_check();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
