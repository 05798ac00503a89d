#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bwmac {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stateless seed derivation: hash(master, index). Used so per-trial streams
/// are independent of scheduling and worker count.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master;
    std::uint64_t mixed = splitmix64_next(s);
    s = mixed ^ (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    return splitmix64_next(s);
}

/// Standard-normal source over mt19937_64 via Box-Muller. The transform is
/// spelled out (rather than std::normal_distribution) so the draw sequence is
/// fixed by this code alone.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // uniforms in (0, 1] so log() stays finite
        const double u1 = ((engine_() >> 11) + 1) * kInv53;
        const double u2 = ((engine_() >> 11) + 1) * kInv53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.141592653589793238462643 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    std::uint64_t raw() { return engine_(); }

private:
    static constexpr double kInv53 = 1.0 / 9007199254740992.0;  // 2^-53

    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace bwmac
