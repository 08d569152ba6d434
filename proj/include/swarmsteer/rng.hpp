#pragma once
/*
rng.hpp
-------
Seeded, platform-independent random source for initial conditions.

Bits come from std::mt19937_64, whose output sequence is fixed by the C++
standard. The standard <random> distributions are implementation-defined, so
the conversions to doubles and unit vectors are done here by hand.
*/

#include <cstdint>
#include <random>

#include "swarmsteer/vec3.hpp"

namespace swarmsteer {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform on the unit sphere by rejection from the cube.
    Vec3 unit_vector() {
        for (;;) {
            const Vec3 v{uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0)};
            const double n2 = v.norm2();
            if (n2 > 1e-6 && n2 <= 1.0) {
                return v / std::sqrt(n2);
            }
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace swarmsteer
