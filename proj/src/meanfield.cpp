#include <algorithm>
#include <cmath>
#include <vector>

#include "mfdb/model.hpp"
#include "mfdb/solver.hpp"

namespace mfdb {

void delay_distribution(const SolverGrid& grid, const double* policy, const double* m,
                        double bandwidth, double* lambda_out, double* dlambda_out) {
    int nd = grid.n_d;
    if (nd < 2) {
        if (nd == 1) { lambda_out[0] = 1.0; if (dlambda_out) dlambda_out[0] = 0.0; }
        return;
    }
    std::vector<double> raw(nd, 0.0), draw(nd, 0.0);
    double cell = grid.de * grid.dh;
    double inv2bw2 = 1.0 / (2.0 * bandwidth * bandwidth);
    int cells = grid.cell_count();
    for (int c = 0; c < cells; ++c) {
        double w = m[c] * cell;
        if (w <= 0.0) continue;
        double d_star = policy[c];
        for (int d = 0; d < nd; ++d) {
            double x = grid.delay_axis[d] - d_star;
            double k = w * std::exp(-x * x * inv2bw2);
            raw[d] += k;
            draw[d] += -k * x / (bandwidth * bandwidth);
        }
    }
    // Trapezoid normalization makes the profile integrate to exactly 1.
    double z = 0.0;
    for (int d = 0; d + 1 < nd; ++d) z += 0.5 * (raw[d] + raw[d + 1]) * grid.dd;
    if (z <= 0.0) {
        double span = grid.delay_axis.back() - grid.delay_axis.front();
        for (int d = 0; d < nd; ++d) {
            lambda_out[d] = 1.0 / span;
            if (dlambda_out) dlambda_out[d] = 0.0;
        }
        return;
    }
    for (int d = 0; d < nd; ++d) {
        lambda_out[d] = raw[d] / z;
        if (dlambda_out) dlambda_out[d] = draw[d] / z;
    }
}

void mean_field_interference(const SystemParams& p, const SolverGrid& grid,
                             const double* lambda, const double* m,
                             const double* interference_prev, double* interference_out) {
    // A transmitter's received power is p * H with p = threshold*(I+PN)/H, so
    // every affordable cell contributes threshold*(I+PN) times its mass; the
    // profile reduces to beta * lambda(d) * threshold*(I_prev(d)+PN) * M(d)
    // with M(d) the mass that can both meet the power cap and afford a frame.
    double beta = p.beta();
    double cell = grid.de * grid.dh;
    double spend_per_watt = p.slot_duration / p.energy_ref;

    // Suffix masses over E per H column, so each (d, k) gate is a lookup.
    std::vector<double> suffix(static_cast<std::size_t>(grid.n_h) * (grid.n_e + 1), 0.0);
    for (int k = 0; k < grid.n_h; ++k) {
        double acc = 0.0;
        for (int j = grid.n_e - 1; j >= 0; --j) {
            acc += m[grid.idx(j, k)] * cell;
            suffix[static_cast<std::size_t>(k) * (grid.n_e + 1) + j] = acc;
        }
    }

    for (int d = 0; d < grid.n_d; ++d) {
        double ppow = p.sinr_threshold * (interference_prev[d] + p.noise_power);
        double mass = 0.0;
        for (int k = 0; k < grid.n_h; ++k) {
            double p_req = ppow / grid.h_axis[k];
            if (p_req > p.max_power) continue;
            double need = p_req * spend_per_watt; // normalized energy per slot
            int j0 = static_cast<int>(std::ceil(need / grid.de - 1e-9));
            if (j0 < 0) j0 = 0;
            if (j0 >= grid.n_e) continue;
            mass += suffix[static_cast<std::size_t>(k) * (grid.n_e + 1) + j0];
        }
        interference_out[d] = beta * lambda[d] * ppow * mass;
    }
}

std::vector<double> uniform_initial_density(const SolverGrid& grid,
                                            const ChannelScenario& scen) {
    std::vector<double> m(grid.cell_count(), 0.0);
    double h0 = std::clamp(scen.initial_gain, grid.h_axis.front(), grid.h_axis.back());
    double pos = (h0 - grid.h_axis.front()) / grid.dh;
    int k0 = std::clamp(static_cast<int>(pos), 0, grid.n_h - 2);
    double frac = std::clamp(pos - k0, 0.0, 1.0);
    double cell = grid.de * grid.dh;
    double per_e = 1.0 / grid.n_e;
    for (int j = 0; j < grid.n_e; ++j) {
        m[grid.idx(j, k0)] += per_e * (1.0 - frac) / cell;
        m[grid.idx(j, k0 + 1)] += per_e * frac / cell;
    }
    return m;
}

std::vector<double> point_initial_density(const SolverGrid& grid, double e0, double h0) {
    std::vector<double> m(grid.cell_count(), 0.0);
    double ep = std::clamp((e0 - grid.e_axis.front()) / grid.de, 0.0, grid.n_e - 1.0);
    double hp = std::clamp((h0 - grid.h_axis.front()) / grid.dh, 0.0, grid.n_h - 1.0);
    int j0 = std::min(static_cast<int>(ep), grid.n_e - 2);
    int k0 = std::min(static_cast<int>(hp), grid.n_h - 2);
    double fe = std::clamp(ep - j0, 0.0, 1.0), fh = std::clamp(hp - k0, 0.0, 1.0);
    double cell = grid.de * grid.dh;
    m[grid.idx(j0, k0)] = (1 - fe) * (1 - fh) / cell;
    m[grid.idx(j0 + 1, k0)] = fe * (1 - fh) / cell;
    m[grid.idx(j0, k0 + 1)] = (1 - fe) * fh / cell;
    m[grid.idx(j0 + 1, k0 + 1)] = fe * fh / cell;
    return m;
}

double policy_lookup(const SolverGrid& grid, const StateField& policy, int frame,
                     double e, double h) {
    double ep = std::clamp((e - grid.e_axis.front()) / grid.de, 0.0, grid.n_e - 1.0);
    double hp = std::clamp((h - grid.h_axis.front()) / grid.dh, 0.0, grid.n_h - 1.0);
    int j0 = std::min(static_cast<int>(ep), grid.n_e - 2);
    int k0 = std::min(static_cast<int>(hp), grid.n_h - 2);
    double fe = ep - j0, fh = hp - k0;
    return policy.at(frame, j0, k0) * (1 - fe) * (1 - fh) +
           policy.at(frame, j0 + 1, k0) * fe * (1 - fh) +
           policy.at(frame, j0, k0 + 1) * (1 - fe) * fh +
           policy.at(frame, j0 + 1, k0 + 1) * fe * fh;
}

double interference_lookup(const SolverGrid& grid, const DelayField& interference,
                           int frame, double d) {
    if (grid.n_d == 1) return interference.at(frame, 0);
    double dp = std::clamp((d - grid.delay_axis.front()) / grid.dd, 0.0, grid.n_d - 1.0);
    int d0 = std::min(static_cast<int>(dp), grid.n_d - 2);
    double f = dp - d0;
    return interference.at(frame, d0) * (1 - f) + interference.at(frame, d0 + 1) * f;
}

double argmin_refined(const std::vector<double>& cost, const std::vector<double>& delay_axis) {
    int n = static_cast<int>(cost.size());
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (cost[i] < cost[best]) best = i;
    if (best == 0 || best == n - 1) return delay_axis[best];
    double denom = cost[best - 1] - 2.0 * cost[best] + cost[best + 1];
    if (denom <= 0.0) return delay_axis[best];
    double offset = 0.5 * (cost[best - 1] - cost[best + 1]) / denom;
    offset = std::clamp(offset, -0.5, 0.5);
    double dd = delay_axis[1] - delay_axis[0];
    return delay_axis[best] + offset * dd;
}

double closed_form_backoff(const SystemParams& p, double dI_dD, double dv_dE,
                           double h, double d_min, double d_max) {
    double u = std::max(0.0, -dv_dE);
    double d = -p.sinr_threshold * p.frame_duration * u * dI_dD /
               (2.0 * p.slots_per_frame * p.energy_ref * h);
    return std::clamp(d, d_min, d_max);
}

double population_mean_backoff(const SolveResult& r) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < r.policy.nt; ++i) {
        const double* pol = r.policy.slice(i);
        const double* m = r.meanfield.slice(i);
        for (int c = 0; c < r.grid.cell_count(); ++c) {
            num += m[c] * pol[c];
            den += m[c];
        }
    }
    return den > 0.0 ? num / den : 0.0;
}

} // namespace mfdb
