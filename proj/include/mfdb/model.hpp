#pragma once

#include "mfdb/params.hpp"

namespace mfdb {

// Bounded path loss min(1, r^-a); saturates inside the unit radius.
double path_loss(double r, double a);

// SINR of one transmitter against aggregate interference + noise.
double sinr(double effective_gain, double power, double interference, double noise);

// Power that meets the SINR threshold exactly at the given interference level.
double required_power(double effective_gain, double interference, double noise,
                      double threshold);

// Power-control rule: transmit at the required power if it is affordable
// (within max_power), otherwise stay silent.
double transmit_power(double req, double max_power);

// Normalized energy after one attempt; clamped at zero.
double energy_after(double energy, double power, double slot_duration, double energy_ref);

// Terminal reward for leftover energy: odd logistic in E, in [-scale/2, scale/2].
// Steepness concentrates the payoff change in a thin layer above E = 0.
double terminal_penalty(double energy, double scale, double steepness);

// Running cost rate of choosing backoff D (seconds^2 per frame).
inline double backoff_cost_rate(double d) { return d * d; }

// One Euler step of the gain disturbance; z is a standard normal draw.
// The result is reflected into [lo, hi].
double channel_step(double h, double t, const ChannelScenario& scen, double dt,
                    double z, double lo, double hi);

// Reflect x into [lo, hi] by mirroring at the boundaries.
double reflect_into(double x, double lo, double hi);

// Interference normalization: integral over the disc of radius rm of
// density * min(1, r^-a). Closed form; a must differ from 2 when rm > 1.
double beta_closed_form(double density, double a, double rm);

// Same integral by adaptive Simpson quadrature, split at r = 1. Used as an
// independent check of the closed form.
double beta_quadrature(double density, double a, double rm);

// Algebraic variant of the closed form seen in the wild: the far-field
// coefficient applied to only one term and no near-field case. Kept only so
// the check report can quantify how far it sits from the true integral.
double beta_naive_form(double density, double a, double rm);

} // namespace mfdb
