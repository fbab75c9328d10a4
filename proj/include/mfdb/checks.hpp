#pragma once

#include <string>
#include <vector>

namespace mfdb {

// One built-in verification: a quantity computed two independent ways.
struct CheckEntry {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct CheckReport {
    std::vector<CheckEntry> entries;
    bool all_pass() const;
};

// Runs the oracle suite: interference normalization closed form vs direct
// quadrature, solver argmin vs the first-order-condition backoff, transport
// mass conservation, and the disturbance-free analytic value function.
// Uses a reduced grid so it finishes in seconds.
CheckReport run_checks();

// Renders the report as one line per entry plus a summary line.
std::string render_checks(const CheckReport& report);

} // namespace mfdb
