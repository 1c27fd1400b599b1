#pragma once

#include <cstdint>
#include <random>

namespace esa {

/// Seeded random stream with platform-independent output.
///
/// std::mt19937_64 is fully specified by the standard, but the standard
/// distributions are not, so uniforms and normals are derived here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream for item `index` of a run seeded with `seed`;
    /// adding items never changes the streams of earlier ones.
    static Rng stream(std::uint64_t seed, std::uint64_t index);

    std::uint64_t bits() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1].
    double uniform_open_closed() { return 1.0 - uniform(); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// splitmix64 finaliser, used to derive stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

} // namespace esa
