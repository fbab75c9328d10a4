#include <ostream>
#include <string>
#include <vector>

#include "mfdb/io.hpp"

namespace mfdb {

namespace {

void write_provenance(std::ostream& os, const std::vector<std::string>& lines) {
    for (const std::string& l : lines) os << "# " << l << '\n';
}

} // namespace

void write_session_csv(std::ostream& os, const std::vector<std::string>& provenance,
                       const std::vector<std::pair<Strategy, SessionResult>>& sessions) {
    write_provenance(os, provenance);
    os << "frame,strategy,mean_delay_s,cdc_s2,mean_energy,drop_rate\n";
    for (const auto& [strategy, r] : sessions) {
        for (std::size_t f = 0; f < r.frames.size(); ++f) {
            const FrameStats& fs = r.frames[f];
            os << (f + 1) << ',' << strategy_name(strategy) << ','
               << format_double(fs.mean_delay) << ',' << format_double(fs.cum_delay_cost)
               << ',' << format_double(fs.mean_energy) << ','
               << format_double(fs.drop_rate) << '\n';
        }
    }
}

void write_sweep_csv(std::ostream& os, const std::vector<std::string>& provenance,
                     const std::vector<SweepPoint>& points) {
    write_provenance(os, provenance);
    os << "n_devices,strategy,mean_delay_s,stderr_s\n";
    for (const SweepPoint& pt : points)
        os << pt.n_devices << ',' << strategy_name(pt.strategy) << ','
           << format_double(pt.mean_delay) << ',' << format_double(pt.stderr_delay) << '\n';
}

void write_convergence_csv(std::ostream& os, const SolveReport& report) {
    os << "# converged: " << (report.converged ? 1 : 0) << '\n';
    os << "# iterations: " << report.iterations << '\n';
    os << "# substeps: " << report.substeps << '\n';
    os << "# max_mass_drift: " << format_double(report.max_mass_drift) << '\n';
    os << "iteration,delta_s\n";
    for (std::size_t i = 0; i < report.deltas.size(); ++i)
        os << (i + 1) << ',' << format_double(report.deltas[i]) << '\n';
}

void write_policy_slice_csv(std::ostream& os, const SolverGrid& grid,
                            const StateField& policy, int k_gain) {
    os << "# gain: " << format_double(grid.h_axis[k_gain]) << '\n';
    os << "frame,energy,backoff_s\n";
    for (int t = 0; t < policy.nt; ++t)
        for (int j = 0; j < grid.n_e; ++j)
            os << (t + 1) << ',' << format_double(grid.e_axis[j]) << ','
               << format_double(policy.at(t, j, k_gain)) << '\n';
}

void write_meanfield_csv(std::ostream& os, const SolverGrid& grid,
                         const StateField& meanfield) {
    os << "frame,energy,mass\n";
    for (int t = 0; t < meanfield.nt; ++t) {
        for (int j = 0; j < grid.n_e; ++j) {
            double mass = 0.0;
            for (int k = 0; k < grid.n_h; ++k)
                mass += meanfield.at(t, j, k) * grid.de * grid.dh;
            os << t << ',' << format_double(grid.e_axis[j]) << ',' << format_double(mass)
               << '\n';
        }
    }
}

} // namespace mfdb
