#pragma once

#include <cstdint>
#include <cstdio>
#include <random>
#include <string>

#include "lineext/types.hpp"

namespace lineext {

/// Deterministic uniform generator. The draw algorithm is spelled out here
/// (instead of std::uniform_real_distribution, whose output is
/// implementation-defined) so that a seed pins byte-identical output files.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Uniform on the circle of the given radius.
    Complex on_circle(double radius) {
        const double t = uniform(0.0, kTwoPi);
        return std::polar(radius, t);
    }

    /// Uniform (in area) on the annulus r0 <= |p| <= r1.
    Complex in_annulus(double r0, double r1) {
        const double r = std::sqrt(uniform(r0 * r0, r1 * r1));
        return on_circle(r);
    }

    Complex in_disc(double radius) { return in_annulus(0.0, radius); }

    Complex in_box(double re0, double re1, double im0, double im1) {
        return {uniform(re0, re1), uniform(im0, im1)};
    }

private:
    std::mt19937_64 engine_;
};

/// Shortest-width formatting with 17 significant digits: enough to
/// round-trip any double, and deterministic across runs.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// Wraps an angle into [0, 2*pi).
inline double wrap_angle(double t) {
    t = std::fmod(t, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    return t;
}

} // namespace lineext
