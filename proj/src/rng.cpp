#include "mfdb/rng.hpp"

#include <cmath>
#include <numbers>

namespace mfdb::rng {

double normal(std::uint64_t seed, std::uint64_t device, std::uint64_t frame,
              std::uint32_t purpose, std::uint64_t k) {
    double u1 = uniform(seed, device, frame, purpose, 2 * k);
    double u2 = uniform(seed, device, frame, purpose, 2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace mfdb::rng
