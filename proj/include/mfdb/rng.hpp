#pragma once

#include <cstdint>

namespace mfdb {

// Counter-based random streams. Every draw is a pure hash of
// (seed, device, frame, purpose, counter), so simulations are reproducible
// and independent of evaluation order or threading.
namespace rng {

enum Purpose : std::uint32_t {
    kChannel  = 0, // channel disturbance normals
    kSpawn    = 1, // device positions / initial draws
    kSlot     = 2, // slot selection
    kGap      = 3, // retry gaps
    kBarring  = 4, // access-barring draws
};

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_draw(std::uint64_t seed, std::uint64_t device,
                               std::uint64_t frame, std::uint32_t purpose,
                               std::uint64_t counter) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ splitmix64(device + 0x1000000001ULL));
    h = splitmix64(h ^ splitmix64(frame + 0x2000000002ULL));
    h = splitmix64(h ^ splitmix64(static_cast<std::uint64_t>(purpose) + 0x3000000003ULL));
    h = splitmix64(h ^ splitmix64(counter + 0x4000000004ULL));
    return h;
}

// Uniform in (0, 1); never returns exactly 0 so it is log-safe.
inline double uniform(std::uint64_t seed, std::uint64_t device, std::uint64_t frame,
                      std::uint32_t purpose, std::uint64_t counter) {
    std::uint64_t h = hash_draw(seed, device, frame, purpose, counter);
    double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
}

// Integer uniform in [lo, hi] inclusive.
inline int uniform_int(std::uint64_t seed, std::uint64_t device, std::uint64_t frame,
                       std::uint32_t purpose, std::uint64_t counter, int lo, int hi) {
    std::uint64_t h = hash_draw(seed, device, frame, purpose, counter);
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(h % span);
}

// Standard normal via Box-Muller; consumes counters 2k and 2k+1.
double normal(std::uint64_t seed, std::uint64_t device, std::uint64_t frame,
              std::uint32_t purpose, std::uint64_t k);

} // namespace rng
} // namespace mfdb
