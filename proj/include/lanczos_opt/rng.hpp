#pragma once

// Seeded normal variates: std::mt19937_64 raw output, 53-bit uniforms and the
// Box-Muller transform written out explicitly so the stream does not depend on
// the standard library's distribution implementation.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "lanczos_opt/linalg.hpp"

namespace lanczos_opt {

class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

    Vector vector(std::size_t n) {
        Vector v(n);
        for (double& x : v) x = next();
        return v;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace lanczos_opt
