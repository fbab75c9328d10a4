#include "mfdb/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mfdb/grid.hpp"
#include "mfdb/model.hpp"
#include "mfdb/rng.hpp"

namespace mfdb {

Strategy strategy_from_name(const std::string& name) {
    if (name == "mfdb") return Strategy::kMeanField;
    if (name == "acb") return Strategy::kAcb;
    if (name == "aloha") return Strategy::kAloha;
    if (name == "mb") return Strategy::kMinBackoff;
    throw std::invalid_argument("unknown strategy: " + name +
                                " (expected mfdb, acb, aloha, or mb)");
}

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::kMeanField: return "mfdb";
        case Strategy::kAcb: return "acb";
        case Strategy::kAloha: return "aloha";
        case Strategy::kMinBackoff: return "mb";
    }
    return "?";
}

std::vector<bool> decode_slot(const std::vector<SlotEntry>& entries, double threshold,
                              double noise, int capacity) {
    std::vector<bool> ok(entries.size(), false);
    if (entries.empty()) return ok;
    double total = 0.0;
    for (const auto& e : entries) total += e.power * e.effective_gain;
    std::vector<int> above;
    std::vector<double> ratio(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        double rx = entries[i].power * entries[i].effective_gain;
        ratio[i] = rx / (total - rx + noise);
        if (ratio[i] >= threshold) above.push_back(static_cast<int>(i));
    }
    // Keep the strongest `capacity` of the qualifying set; stable sort keeps
    // the earlier entry on exact ties, so the outcome is deterministic.
    std::stable_sort(above.begin(), above.end(),
                     [&](int a, int b) { return ratio[a] > ratio[b]; });
    if (static_cast<int>(above.size()) > capacity) above.resize(capacity);
    for (int i : above) ok[i] = true;
    return ok;
}

std::vector<DeviceState> spawn_devices(const SystemParams& p, const ChannelScenario& scen,
                                       std::uint64_t seed, int count, double initial_energy) {
    std::vector<DeviceState> devices(count);
    for (int n = 0; n < count; ++n) {
        double u = rng::uniform(seed, n, 0, rng::kSpawn, 0);
        DeviceState& d = devices[n];
        d.radius = p.cluster_radius * std::sqrt(u); // uniform over the disc
        d.loss = path_loss(d.radius, p.path_loss_exp);
        d.energy = initial_energy;
        d.gain = scen.initial_gain;
    }
    return devices;
}

std::vector<double> empirical_density(const SolverGrid& grid,
                                      const std::vector<DeviceState>& devices) {
    std::vector<double> m(grid.cell_count(), 0.0);
    if (devices.empty()) return m;
    double w = 1.0 / (devices.size() * grid.de * grid.dh);
    for (const auto& d : devices)
        m[grid.idx(grid.nearest_e(d.energy), grid.nearest_h(d.gain))] += w;
    return m;
}

namespace {

// Per-device outcome of one frame.
struct FrameOutcome {
    double delay = 0.0;
    bool attempted = false;
    bool succeeded = false;
};

struct Attempt {
    int device = 0;
    double power = 0.0;
};

class SessionRunner {
public:
    SessionRunner(const SystemParams& p, const ChannelScenario& scen, Strategy strategy,
                  const SolveResult* policy, std::uint64_t seed,
                  std::vector<DeviceState> devices)
        : p_(p), scen_(scen), strategy_(strategy), policy_(policy), seed_(seed),
          devices_(std::move(devices)) {
        if (strategy_ == Strategy::kMeanField && policy_ == nullptr)
            throw std::invalid_argument("the mean-field strategy needs a solved policy");
        grid_ = policy_ ? policy_->grid : build_grid(p_, scen_);
        result_.frames.resize(p_.frames);
        per_device_cost_.assign(devices_.size(), 0.0);
        exhausted_.assign(devices_.size(), false);
    }

    SessionResult run() {
        int n = static_cast<int>(devices_.size());
        for (int frame = 0; frame < p_.frames; ++frame) {
            std::vector<FrameOutcome> out = run_frame(frame);
            FrameStats& fs = result_.frames[frame];
            double cost_sum = 0.0, delay_sum = 0.0, energy_sum = 0.0;
            int drops = 0;
            for (int i = 0; i < n; ++i) {
                delay_sum += out[i].delay;
                per_device_cost_[i] += out[i].delay * out[i].delay;
                cost_sum += per_device_cost_[i];
                energy_sum += devices_[i].energy;
                if (!out[i].attempted) ++drops;
            }
            fs.mean_delay = delay_sum / n;
            fs.cum_delay_cost = cost_sum / n;
            fs.mean_energy = energy_sum / n;
            fs.drop_rate = static_cast<double>(drops) / n;
            if (result_.infeasible_frame < 0 && n > 0) {
                auto down = static_cast<int>(std::count(exhausted_.begin(), exhausted_.end(), true));
                if (2 * down >= n) result_.infeasible_frame = frame + 1;
            }
            step_channels(frame);
        }
        result_.final_energy.resize(n);
        for (int i = 0; i < n; ++i) result_.final_energy[i] = devices_[i].energy;
        result_.total_cost = per_device_cost_;
        result_.exhausted_count =
            static_cast<int>(std::count(exhausted_.begin(), exhausted_.end(), true));
        result_.infeasible = 2 * result_.exhausted_count >= n;
        std::swap(result_.devices, devices_);
        return std::move(result_);
    }

private:
    void mark_exhausted(int device, int frame) {
        if (!exhausted_[device]) {
            exhausted_[device] = true;
            if (devices_[device].exhausted_frame < 0)
                devices_[device].exhausted_frame = frame;
        }
    }

    // Transmission bookkeeping for one attempt: debit energy exactly.
    void debit(DeviceState& d, double power) {
        d.energy -= power * p_.slot_duration / p_.energy_ref;
    }

    std::vector<FrameOutcome> run_frame(int frame) {
        int n = static_cast<int>(devices_.size());
        int K = p_.slots_per_frame;
        std::vector<FrameOutcome> out(n);
        // Per-slot pending attempts; index 1..K.
        std::vector<std::vector<Attempt>> pending(K + 1);
        std::vector<double> power_of(n, 0.0);
        std::vector<int> last_attempt_slot(n, 0);
        std::vector<int> gap_counter(n, 0), slot_counter(n, 0);

        double broadcast = strategy_ == Strategy::kMinBackoff ? mb_broadcast_ : 0.0;

        // Schedule each device's first attempt of the frame.
        for (int i = 0; i < n; ++i) {
            DeviceState& d = devices_[i];
            int ts = 0;
            double power = 0.0;
            switch (strategy_) {
                case Strategy::kMeanField: {
                    double e = d.energy, h = d.gain;
                    bool inside = e >= grid_.e_axis.front() && e <= grid_.e_axis.back() &&
                                  h >= grid_.h_axis.front() && h <= grid_.h_axis.back();
                    if (!inside) ++result_.clamped_lookups;
                    double backoff = policy_lookup(grid_, policy_->policy, frame, e, h);
                    ts = grid_.nearest_delay_slot(backoff, p_.slot_duration);
                    double inter =
                        interference_lookup(grid_, policy_->interference, frame, backoff);
                    power = required_power(h, inter, p_.noise_power, p_.sinr_threshold);
                    break;
                }
                case Strategy::kAcb: {
                    // Barring walk: draw at the pointer slot, admitted draws
                    // pick a slot in the remaining window, blocked draws move
                    // the pointer on and try again.
                    int pointer = 1;
                    int draw = 0;
                    ts = 0;
                    while (pointer <= K) {
                        double b = rng::uniform(seed_, i, frame, rng::kBarring, draw++);
                        if (b > p_.acb_factor) {
                            ts = rng::uniform_int(seed_, i, frame, rng::kSlot,
                                                  slot_counter[i]++, pointer, K);
                            break;
                        }
                        pointer += rng::uniform_int(seed_, i, frame, rng::kGap,
                                                    gap_counter[i]++, 1, 3);
                    }
                    power = p_.fixed_power;
                    break;
                }
                case Strategy::kAloha: {
                    ts = rng::uniform_int(seed_, i, frame, rng::kSlot, slot_counter[i]++, 1, K);
                    power = p_.fixed_power;
                    break;
                }
                case Strategy::kMinBackoff: {
                    ts = 1;
                    power = required_power(d.gain, broadcast, p_.noise_power,
                                           p_.sinr_threshold);
                    break;
                }
            }
            power_of[i] = power;
            if (ts >= 1 && ts <= K) pending[ts].push_back({i, power});
        }

        // Walk the slots, decoding and scheduling retries.
        double mb_sum = 0.0;
        int mb_count = 0;
        for (int ts = 1; ts <= K; ++ts) {
            std::vector<SlotEntry> entries;
            std::vector<int> senders;
            for (const Attempt& a : pending[ts]) {
                DeviceState& d = devices_[a.device];
                double need = a.power * p_.slot_duration / p_.energy_ref;
                if (a.power > p_.max_power) continue; // silent per power cap
                if (d.energy < need) {
                    mark_exhausted(a.device, frame);
                    continue;
                }
                debit(d, a.power);
                entries.push_back({a.device, a.power, d.gain});
                senders.push_back(a.device);
                out[a.device].attempted = true;
                last_attempt_slot[a.device] = ts;
            }
            if (entries.empty()) continue;
            if (strategy_ == Strategy::kMinBackoff && ts == 1) {
                for (const auto& e : entries) mb_sum += e.power * e.effective_gain;
                mb_count = static_cast<int>(entries.size());
            }
            std::vector<bool> ok =
                decode_slot(entries, p_.sinr_threshold, p_.noise_power, p_.decode_capacity);
            for (std::size_t e = 0; e < entries.size(); ++e) {
                int dev = senders[e];
                if (ok[e]) {
                    if (!out[dev].succeeded) {
                        out[dev].succeeded = true;
                        out[dev].delay = ts * p_.slot_duration;
                    }
                } else if (strategy_ == Strategy::kAcb || strategy_ == Strategy::kAloha) {
                    // In-frame retransmission after a short random gap.
                    int next = ts + rng::uniform_int(seed_, dev, frame, rng::kGap,
                                                     gap_counter[dev]++, 1, 3);
                    if (next <= K) pending[next].push_back({dev, power_of[dev]});
                }
            }
        }

        if (strategy_ == Strategy::kMinBackoff)
            mb_broadcast_ = mb_count > 1 ? mb_sum / (mb_count - 1) : 0.0;

        // Delay of record: first success; else the last transmission's slot;
        // else the full frame with a drop.
        for (int i = 0; i < n; ++i) {
            if (out[i].succeeded) continue;
            if (out[i].attempted)
                out[i].delay = last_attempt_slot[i] * p_.slot_duration;
            else
                out[i].delay = K * p_.slot_duration;
        }
        return out;
    }

    void step_channels(int frame) {
        if (scen_.sigma == 0.0 && scen_.amplitude == 0.0) return;
        double t0 = frame * p_.frame_duration;
        for (std::size_t i = 0; i < devices_.size(); ++i) {
            double h = devices_[i].gain;
            for (int s = 0; s < p_.slots_per_frame; ++s) {
                double t = t0 + s * p_.slot_duration;
                double z = scen_.sigma > 0.0
                               ? rng::normal(seed_, i, frame, rng::kChannel, s)
                               : 0.0;
                h = channel_step(h, t, scen_, p_.slot_duration, z,
                                 grid_.h_axis.front(), grid_.h_axis.back());
            }
            devices_[i].gain = h;
        }
    }

    const SystemParams& p_;
    const ChannelScenario& scen_;
    Strategy strategy_;
    const SolveResult* policy_;
    std::uint64_t seed_;
    std::vector<DeviceState> devices_;
    SolverGrid grid_;
    SessionResult result_;
    std::vector<double> per_device_cost_;
    std::vector<bool> exhausted_;
    double mb_broadcast_ = 0.0;
};

} // namespace

SessionResult run_session(const SystemParams& p, const ChannelScenario& scen,
                          Strategy strategy, const SolveResult* policy,
                          std::uint64_t seed, std::vector<DeviceState> devices) {
    SessionRunner runner(p, scen, strategy, policy, seed, std::move(devices));
    return runner.run();
}

SessionResult run_session(const SystemParams& p, const ChannelScenario& scen,
                          Strategy strategy, const SolveResult* policy,
                          std::uint64_t seed, int device_count, double initial_energy) {
    return run_session(p, scen, strategy, policy, seed,
                       spawn_devices(p, scen, seed, device_count, initial_energy));
}

std::vector<SweepPoint> sweep_population(const SystemParams& p, const ChannelScenario& scen,
                                         const SolveResult* policy,
                                         const std::vector<Strategy>& strategies,
                                         const std::vector<int>& n_values,
                                         const std::vector<std::uint64_t>& seeds,
                                         double initial_energy) {
    if (seeds.empty()) throw std::invalid_argument("sweep needs at least one seed");
    std::vector<SweepPoint> points;
    for (int n : n_values) {
        for (Strategy s : strategies) {
            std::vector<double> session_means;
            session_means.reserve(seeds.size());
            for (std::uint64_t seed : seeds) {
                SystemParams q = p;
                q.device_count = n;
                SessionResult r = run_session(q, scen, s, policy, seed, n, initial_energy);
                double mean = 0.0;
                for (const FrameStats& f : r.frames) mean += f.mean_delay;
                session_means.push_back(mean / r.frames.size());
            }
            double mean = std::accumulate(session_means.begin(), session_means.end(), 0.0) /
                          session_means.size();
            double var = 0.0;
            for (double v : session_means) var += (v - mean) * (v - mean);
            double se = session_means.size() > 1
                            ? std::sqrt(var / (session_means.size() - 1)) /
                                  std::sqrt(static_cast<double>(session_means.size()))
                            : 0.0;
            points.push_back({n, s, mean, se});
        }
    }
    return points;
}

} // namespace mfdb
