#include "mfdb/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace mfdb {

double path_loss(double r, double a) {
    if (r <= 1.0) return 1.0;
    return std::pow(r, -a);
}

double sinr(double effective_gain, double power, double interference, double noise) {
    return power * effective_gain / (interference + noise);
}

double required_power(double effective_gain, double interference, double noise,
                      double threshold) {
    return threshold * (interference + noise) / effective_gain;
}

double transmit_power(double req, double max_power) {
    return req <= max_power ? req : 0.0;
}

double energy_after(double energy, double power, double slot_duration, double energy_ref) {
    return std::max(0.0, energy - power * slot_duration / energy_ref);
}

double terminal_penalty(double energy, double scale, double steepness) {
    return scale / (1.0 + std::exp(steepness * energy)) - scale / 2.0;
}

double reflect_into(double x, double lo, double hi) {
    if (!(lo < hi)) return std::clamp(x, std::min(lo, hi), std::max(lo, hi));
    double span = hi - lo;
    double y = std::fmod(x - lo, 2.0 * span);
    if (y < 0.0) y += 2.0 * span;
    return y <= span ? lo + y : hi - (y - span);
}

double channel_step(double h, double t, const ChannelScenario& scen, double dt,
                    double z, double lo, double hi) {
    double next = h + scen.drift(t) * dt + scen.sigma * std::sqrt(dt) * z;
    return reflect_into(next, lo, hi);
}

double beta_closed_form(double density, double a, double rm) {
    using std::numbers::pi;
    if (rm <= 1.0) return density * pi * rm * rm;
    // Near field saturates at loss 1; far field integrates 2*pi*r*r^-a.
    double far = 2.0 / (a - 2.0) * (1.0 - std::pow(rm, 2.0 - a));
    return density * pi * (1.0 + far);
}

namespace {

// Adaptive Simpson with absolute tolerance; plain recursive bisection.
double simpson(double lo, double hi, double flo, double fmid, double fhi) {
    return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
}

double adaptive(const std::function<double(double)>& f, double lo, double hi,
                double flo, double fmid, double fhi, double whole, double tol,
                int depth) {
    double mid = 0.5 * (lo + hi);
    double lmid = 0.5 * (lo + mid), rmid = 0.5 * (mid + hi);
    double flmid = f(lmid), frmid = f(rmid);
    double left = simpson(lo, mid, flo, flmid, fmid);
    double right = simpson(mid, hi, fmid, frmid, fhi);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive(f, lo, mid, flo, flmid, fmid, left, tol / 2.0, depth - 1) +
           adaptive(f, mid, hi, fmid, frmid, fhi, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (hi <= lo) return 0.0;
    double mid = 0.5 * (lo + hi);
    double flo = f(lo), fmid = f(mid), fhi = f(hi);
    double whole = simpson(lo, hi, flo, fmid, fhi);
    return adaptive(f, lo, hi, flo, fmid, fhi, whole, tol, 48);
}

} // namespace

double beta_quadrature(double density, double a, double rm) {
    using std::numbers::pi;
    auto integrand = [&](double r) { return 2.0 * pi * r * path_loss(r, a); };
    double split = std::min(rm, 1.0);
    double total = integrate(integrand, 0.0, split, 1e-12);
    if (rm > 1.0) total += integrate(integrand, 1.0, rm, 1e-12);
    return density * total;
}

double beta_naive_form(double density, double a, double rm) {
    using std::numbers::pi;
    return density * pi * (1.0 + 2.0 / (a - 2.0) - std::pow(rm, 2.0 - a));
}

} // namespace mfdb
