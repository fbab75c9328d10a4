#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfdb/io.hpp"

namespace mfdb {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

constexpr const char* kMagic = "MFDB-POLICY v1";

void fnv_mix(std::uint64_t& h, const std::string& s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    h ^= '\n';
    h *= 0x100000001b3ULL;
}

void write_array(std::ostream& os, const std::string& name, const std::vector<double>& v) {
    os << "ARRAY " << name << ' ' << v.size() << '\n';
    for (std::size_t i = 0; i < v.size(); ++i) {
        os << format_double(v[i]);
        os << (((i + 1) % 8 == 0 || i + 1 == v.size()) ? '\n' : ' ');
    }
}

} // namespace

std::uint64_t solve_fingerprint(const SystemParams& p, const ChannelScenario& scen,
                                const SolverGrid& grid) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto num = [&](double v) { fnv_mix(h, format_double(v)); };
    num(p.frames); num(p.frame_duration); num(p.slots_per_frame); num(p.slot_duration);
    num(p.path_loss_exp); num(p.noise_power); num(p.bandwidth); num(p.device_density);
    num(p.sinr_threshold); num(p.device_count); num(p.cluster_radius); num(p.max_power);
    num(p.energy_ref); num(p.penalty_scale); num(p.penalty_steepness); num(p.acb_factor);
    num(p.fixed_power); num(p.decode_capacity); num(p.fp_tolerance); num(p.fp_max_iters);
    num(p.kernel_bandwidth); num(p.damping);
    num(scen.base_gain); num(scen.amplitude); num(scen.angular_freq); num(scen.phase);
    num(scen.sigma); num(scen.initial_gain);
    num(grid.n_e); num(grid.n_h); num(grid.n_d); num(grid.frames);
    return h;
}

std::string fingerprint_hex(std::uint64_t fp) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fp));
    return buf;
}

void save_policy(std::ostream& os, const SystemParams& p, const ChannelScenario& scen,
                 const SolveResult& r) {
    const SolverGrid& g = r.grid;
    os << kMagic << '\n';
    os << "# fingerprint: " << fingerprint_hex(solve_fingerprint(p, scen, g)) << '\n';
    os << "# converged: " << (r.report.converged ? 1 : 0) << '\n';
    os << "# iterations: " << r.report.iterations << '\n';
    os << "# final_delta: " << format_double(r.report.final_delta) << '\n';
    os << "# beta: " << format_double(r.report.beta) << '\n';
    os << "# substeps: " << r.report.substeps << '\n';
    os << "# base_substeps: " << g.substeps << '\n';
    os << "# max_mass_drift: " << format_double(r.report.max_mass_drift) << '\n';
    os << "# aggregate_frozen: " << (r.report.aggregate_frozen ? 1 : 0) << '\n';
    os << "# freeze_pass: " << r.report.freeze_pass << '\n';
    os << "# aggregate_residual: " << format_double(r.report.aggregate_residual) << '\n';
    os << "# de: " << format_double(g.de) << '\n';
    os << "# dh: " << format_double(g.dh) << '\n';
    os << "# dd: " << format_double(g.dd) << '\n';
    os << "# n_e: " << g.n_e << " min: " << format_double(g.e_axis.front())
       << " max: " << format_double(g.e_axis.back()) << '\n';
    os << "# n_h: " << g.n_h << " min: " << format_double(g.h_axis.front())
       << " max: " << format_double(g.h_axis.back()) << '\n';
    os << "# n_d: " << g.n_d << " min: " << format_double(g.delay_axis.front())
       << " max: " << format_double(g.delay_axis.back()) << '\n';
    os << "# cost_rate: backoff-squared-per-frame\n";
    write_array(os, "e_axis", g.e_axis);
    write_array(os, "h_axis", g.h_axis);
    write_array(os, "delay_axis", g.delay_axis);
    write_array(os, "frame_times", g.frame_times);
    write_array(os, "policy", r.policy.data);
    write_array(os, "value", r.value.data);
    write_array(os, "meanfield", r.meanfield.data);
    write_array(os, "interference", r.interference.data);
    write_array(os, "lambda", r.lambda.data);
    write_array(os, "deltas", r.report.deltas);
}

void save_policy_file(const std::string& path, const SystemParams& p,
                      const ChannelScenario& scen, const SolveResult& r) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write policy file: " + path);
    save_policy(os, p, scen, r);
    if (!os) throw std::runtime_error("write failed for policy file: " + path);
}

namespace {

struct HeaderData {
    std::map<std::string, std::string> values;
};

std::vector<double> read_array(std::istream& is, const std::string& want) {
    std::string tag, name;
    std::size_t count = 0;
    if (!(is >> tag >> name >> count) || tag != "ARRAY" || name != want)
        throw std::runtime_error("policy file: expected ARRAY " + want + " block");
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (!(is >> v[i]))
            throw std::runtime_error("policy file: array " + want + " is truncated");
        if (!std::isfinite(v[i]))
            throw std::runtime_error("policy file: array " + want + " contains a non-finite value");
    }
    return v;
}

} // namespace

LoadedPolicy load_policy(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kMagic)
        throw std::runtime_error(
            "policy file: bad or missing version line (expected \"" + std::string(kMagic) + "\")");
    HeaderData hdr;
    while (is.peek() == '#') {
        std::getline(is, line);
        auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string key = line.substr(2, colon - 2);
        std::string val = line.substr(colon + 2);
        // Keep only the first token for multi-field lines (axis summaries).
        std::istringstream vs(val);
        std::string first;
        vs >> first;
        hdr.values[key] = first;
    }

    LoadedPolicy out;
    SolveResult& r = out.result;
    SolverGrid& g = r.grid;
    g.e_axis = read_array(is, "e_axis");
    g.h_axis = read_array(is, "h_axis");
    g.delay_axis = read_array(is, "delay_axis");
    g.frame_times = read_array(is, "frame_times");
    g.n_e = static_cast<int>(g.e_axis.size());
    g.n_h = static_cast<int>(g.h_axis.size());
    g.n_d = static_cast<int>(g.delay_axis.size());
    g.frames = static_cast<int>(g.frame_times.size()) - 1;
    if (g.n_e < 2 || g.n_h < 2 || g.n_d < 1 || g.frames < 1)
        throw std::runtime_error("policy file: axis lengths do not form a valid grid");
    for (auto axis : {&g.e_axis, &g.h_axis, &g.delay_axis, &g.frame_times})
        for (std::size_t i = 1; i < axis->size(); ++i)
            if ((*axis)[i] <= (*axis)[i - 1])
                throw std::runtime_error("policy file: axes must be strictly increasing");

    auto header_num = [&](const std::string& key) -> double {
        auto it = hdr.values.find(key);
        if (it == hdr.values.end())
            throw std::runtime_error("policy file: missing header \"" + key + "\"");
        return std::strtod(it->second.c_str(), nullptr);
    };
    g.de = header_num("de");
    g.dh = header_num("dh");
    g.dd = header_num("dd");
    g.substeps = static_cast<int>(header_num("base_substeps"));

    auto read_field = [&](const std::string& name, int nt) {
        StateField f(nt, g.n_e, g.n_h);
        std::vector<double> v = read_array(is, name);
        if (v.size() != f.data.size())
            throw std::runtime_error("policy file: array " + name + " has the wrong length");
        f.data = std::move(v);
        return f;
    };
    auto read_rows = [&](const std::string& name) {
        DelayField f(g.frames, g.n_d);
        std::vector<double> v = read_array(is, name);
        if (v.size() != f.data.size())
            throw std::runtime_error("policy file: array " + name + " has the wrong length");
        f.data = std::move(v);
        return f;
    };
    r.policy = read_field("policy", g.frames);
    r.value = read_field("value", g.frames + 1);
    r.meanfield = read_field("meanfield", g.frames + 1);
    r.interference = read_rows("interference");
    r.lambda = read_rows("lambda");
    r.report.deltas = read_array(is, "deltas");

    r.report.converged = header_num("converged") != 0.0;
    r.report.iterations = static_cast<int>(header_num("iterations"));
    r.report.final_delta = header_num("final_delta");
    r.report.beta = header_num("beta");
    r.report.substeps = static_cast<int>(header_num("substeps"));
    r.report.max_mass_drift = header_num("max_mass_drift");
    r.report.aggregate_frozen = header_num("aggregate_frozen") != 0.0;
    r.report.freeze_pass = static_cast<int>(header_num("freeze_pass"));
    r.report.aggregate_residual = header_num("aggregate_residual");
    out.converged = r.report.converged;
    out.fingerprint = std::strtoull(hdr.values.at("fingerprint").c_str(), nullptr, 16);
    return out;
}

LoadedPolicy load_policy_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open policy file: " + path);
    return load_policy(is);
}

} // namespace mfdb
