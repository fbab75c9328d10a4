#pragma once

#include <cstddef>
#include <vector>

namespace mfdb {

// Dense (time, E, H) array, row-major with H fastest.
struct StateField {
    int nt = 0, n_e = 0, n_h = 0;
    std::vector<double> data;

    StateField() = default;
    StateField(int nt_, int ne_, int nh_)
        : nt(nt_), n_e(ne_), n_h(nh_),
          data(static_cast<std::size_t>(nt_) * ne_ * nh_, 0.0) {}

    double& at(int t, int j, int k) {
        return data[(static_cast<std::size_t>(t) * n_e + j) * n_h + k];
    }
    double at(int t, int j, int k) const {
        return data[(static_cast<std::size_t>(t) * n_e + j) * n_h + k];
    }
    double* slice(int t) { return data.data() + static_cast<std::size_t>(t) * n_e * n_h; }
    const double* slice(int t) const {
        return data.data() + static_cast<std::size_t>(t) * n_e * n_h;
    }
    std::size_t slice_size() const { return static_cast<std::size_t>(n_e) * n_h; }
};

// Dense (time, delay) array for per-frame delay profiles.
struct DelayField {
    int nt = 0, n_d = 0;
    std::vector<double> data;

    DelayField() = default;
    DelayField(int nt_, int nd_)
        : nt(nt_), n_d(nd_), data(static_cast<std::size_t>(nt_) * nd_, 0.0) {}

    double& at(int t, int d) { return data[static_cast<std::size_t>(t) * n_d + d]; }
    double at(int t, int d) const { return data[static_cast<std::size_t>(t) * n_d + d]; }
    double* row(int t) { return data.data() + static_cast<std::size_t>(t) * n_d; }
    const double* row(int t) const { return data.data() + static_cast<std::size_t>(t) * n_d; }
};

} // namespace mfdb
