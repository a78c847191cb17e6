#pragma once

#include <array>
#include <cstdint>

namespace mpk::rng {

// Philox4x64-10 counter-based generator. Streams are keyed by
// (seed, stream id), so a path's draws depend only on its own index and the
// global seed, never on scheduling or worker count.
class Philox {
public:
    Philox(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}

    std::uint64_t next_u64();

    // uniform on (0,1], safe as the argument of log()
    double u01() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53; }
    // uniform on [0,1)
    double u01_left() { return static_cast<double>(next_u64() >> 11) * 0x1p-53; }

    double normal();
    double exponential(double mean);
    // shape alpha > 0, unit scale (Marsaglia-Tsang)
    double gamma(double alpha);
    std::uint64_t poisson(double mean);
    // df >= 0, noncentrality >= 0, via the Poisson mixture of gammas.
    // df == 0 is allowed; the draw is 0 exactly when the Poisson count is 0.
    double noncentral_chi_squared(double df, double noncentrality);

private:
    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> ctr_{0, 0, 0, 0};
    std::array<std::uint64_t, 4> buf_{};
    int have_ = 0;
    double cached_normal_ = 0;
    bool has_cached_normal_ = false;
};

}  // namespace mpk::rng
