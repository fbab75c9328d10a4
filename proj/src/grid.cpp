#include "mfdb/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfdb {

namespace {

int clamp_index(double x, int n) {
    int i = static_cast<int>(std::lround(x));
    return std::clamp(i, 0, n - 1);
}

} // namespace

int SolverGrid::nearest_e(double e) const {
    return clamp_index((e - e_axis.front()) / de, n_e);
}

int SolverGrid::nearest_h(double h) const {
    return clamp_index((h - h_axis.front()) / dh, n_h);
}

int SolverGrid::nearest_delay_slot(double d, double slot_duration) const {
    // Round to the nearest whole-slot delay; exact midpoints round down.
    int slots = static_cast<int>(frame_times.size()) >= 2
                    ? static_cast<int>(std::lround((delay_axis.back()) / slot_duration))
                    : 1;
    int s = static_cast<int>(std::ceil(d / slot_duration - 0.5));
    return std::clamp(s, 1, slots);
}

SolverGrid build_grid(const SystemParams& p, const ChannelScenario& scen,
                      int n_e, int n_h, int substeps_override) {
    if (n_e < 2 || n_h < 2) throw std::invalid_argument("grid needs at least 2 nodes per axis");
    SolverGrid g;
    g.n_e = n_e;
    g.n_h = n_h;
    g.frames = p.frames;

    g.e_axis.resize(n_e);
    g.de = 1.0 / (n_e - 1);
    for (int j = 0; j < n_e; ++j) g.e_axis[j] = j * g.de;

    // Deterministic gain envelope over the horizon, sampled densely; the
    // sinusoid's extremes are hit to well below grid resolution.
    double T = p.horizon();
    double lo_det = scen.deterministic_gain(0.0), hi_det = lo_det;
    const int samples = 4096;
    for (int i = 1; i <= samples; ++i) {
        double h = scen.deterministic_gain(T * i / samples);
        lo_det = std::min(lo_det, h);
        hi_det = std::max(hi_det, h);
    }
    if (lo_det <= 0.0)
        throw std::invalid_argument("deterministic gain must stay positive over the horizon");
    // Diffusion widens the band, but the excursions that matter economically
    // are bounded by the gain scale itself: far above the deterministic
    // envelope power is uniformly cheap, and the reflecting boundaries stand
    // in for the unbounded tails.  Growing the band past a couple of mean
    // gains would only dilute resolution where the power economics live.
    double spread = std::min(4.0 * scen.sigma * std::sqrt(T), 2.0 * scen.base_gain);
    double h_lo = std::max(lo_det - spread, 0.25 * lo_det);
    double h_hi = hi_det + spread;
    if (h_hi <= h_lo) { // constant, disturbance-free channel: pad for a usable band
        h_lo = 0.75 * scen.base_gain;
        h_hi = 1.25 * scen.base_gain;
    }
    g.h_axis.resize(n_h);
    g.dh = (h_hi - h_lo) / (n_h - 1);
    for (int k = 0; k < n_h; ++k) g.h_axis[k] = h_lo + k * g.dh;

    // Backoff candidates: slot boundaries refined ten-fold.
    int K = p.slots_per_frame;
    g.n_d = K > 1 ? (K - 1) * 10 + 1 : 1;
    g.delay_axis.resize(g.n_d);
    g.dd = K > 1 ? (K - 1) * p.slot_duration / (g.n_d - 1) : 0.0;
    for (int d = 0; d < g.n_d; ++d) g.delay_axis[d] = p.slot_duration + d * g.dd;

    g.frame_times.resize(p.frames + 1);
    for (int i = 0; i <= p.frames; ++i) g.frame_times[i] = i * p.frame_duration;

    if (substeps_override > 0) {
        g.substeps = substeps_override;
    } else {
        // CFL bound at zero-interference rates; the solver tightens further
        // when realized interference raises the energy drain rate.
        double dt_max = p.frame_duration;
        double p_req0 = p.sinr_threshold * p.noise_power / h_lo;
        double a_e = std::min(p_req0, p.max_power) / (p.energy_ref * K);
        if (a_e > 0) dt_max = std::min(dt_max, 0.5 * g.de / a_e);
        double adv = std::abs(scen.amplitude * scen.angular_freq);
        if (adv > 0) dt_max = std::min(dt_max, 0.5 * g.dh / adv);
        // Gain diffusion is integrated implicitly and puts no bound on the
        // step; only the advection terms constrain it.
        g.substeps = std::max(1, static_cast<int>(std::ceil(p.frame_duration / dt_max)));
    }
    return g;
}

} // namespace mfdb
