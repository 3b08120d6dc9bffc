#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace charvar {

using cplx = std::complex<double>;

// Deterministic random source. Raw mt19937_64 bits are converted to doubles
// by hand so that streams are identical across standard libraries
// (std::uniform_real_distribution is not pinned by the standard).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // Uniform in [0, 1).
    double unit() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // Uniform point of the disk |z| <= radius.
    cplx disk(double radius) {
        double r = radius * std::sqrt(unit());
        double a = 2.0 * 3.14159265358979323846 * unit();
        return cplx(r * std::cos(a), r * std::sin(a));
    }

    // Uniform modulus/angle point of the annulus lo <= |z| <= hi.
    cplx annulus(double lo, double hi) {
        double r = uniform(lo, hi);
        double a = 2.0 * 3.14159265358979323846 * unit();
        return cplx(r * std::cos(a), r * std::sin(a));
    }

private:
    std::mt19937_64 eng_;
};

// Meridian-trace sampling region: |t| in [0.5, 3.5], away from the loci
// excluded by the epsilon-cases and Claim-type conditions.
inline bool in_generic_trace_region(const cplx& t, double margin = 1e-3) {
    double m = std::abs(t);
    if (m < 0.5 || m > 3.5) return false;
    static const double specials[] = {2.0, -2.0, 1.0, -1.0, 0.0,
                                      1.4142135623730951, -1.4142135623730951,
                                      1.7320508075688772, -1.7320508075688772};
    for (double s : specials)
        if (std::abs(t - cplx(s, 0.0)) < margin) return false;
    return true;
}

inline cplx random_generic_trace(Rng& rng, double margin = 1e-3) {
    for (;;) {
        cplx t = rng.annulus(0.5, 3.5);
        if (in_generic_trace_region(t, margin)) return t;
    }
}

} // namespace charvar
