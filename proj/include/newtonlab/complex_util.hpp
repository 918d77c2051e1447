#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

namespace newtonlab {

using cplx = std::complex<double>;

constexpr double kPi = 3.141592653589793238462643383279502884;

/// Error with a stable machine-readable code, surfaced as structured JSON by the CLI.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

/// Point on the Riemann sphere: a finite complex value or the point at infinity.
struct SpherePoint {
    cplx z{0.0, 0.0};
    bool at_infinity = false;

    static SpherePoint infinity() { return SpherePoint{cplx{0, 0}, true}; }
    static SpherePoint finite(cplx value) { return SpherePoint{value, false}; }
};

/// Chordal distance on the sphere, range [0, 2].
inline double spherical_distance(const SpherePoint& a, const SpherePoint& b) {
    if (a.at_infinity && b.at_infinity) return 0.0;
    if (a.at_infinity) return 2.0 / std::sqrt(1.0 + std::norm(b.z));
    if (b.at_infinity) return 2.0 / std::sqrt(1.0 + std::norm(a.z));
    return 2.0 * std::abs(a.z - b.z) /
           std::sqrt((1.0 + std::norm(a.z)) * (1.0 + std::norm(b.z)));
}

inline double spherical_distance(const SpherePoint& a, cplx b) {
    return spherical_distance(a, SpherePoint::finite(b));
}

inline double spherical_distance(cplx a, cplx b) {
    return spherical_distance(SpherePoint::finite(a), SpherePoint::finite(b));
}

/// Parses one complex number in "re+imi" form, e.g. "-1+0i", "2.5-3e-2i".
/// A bare real part ("1.5") is accepted and read as imaginary part zero.
inline cplx parse_complex(const std::string& text) {
    const char* s = text.c_str();
    char* end = nullptr;
    double re = std::strtod(s, &end);
    if (end == s) throw Error("ParseError", "not a complex number: '" + text + "'");
    while (*end == ' ') ++end;
    if (*end == '\0') return cplx{re, 0.0};
    if (*end == 'i') {
        ++end;
        while (*end == ' ') ++end;
        if (*end != '\0') throw Error("ParseError", "trailing junk in '" + text + "'");
        return cplx{0.0, re};
    }
    const char* imstart = end;
    double im = std::strtod(imstart, &end);
    if (end == imstart || *end != 'i')
        throw Error("ParseError", "expected 're+imi' in '" + text + "'");
    ++end;
    while (*end == ' ') ++end;
    if (*end != '\0') throw Error("ParseError", "trailing junk in '" + text + "'");
    return cplx{re, im};
}

inline std::string format_complex(cplx z) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g%+.17gi", z.real(), z.imag());
    return buf;
}

/// Relative closeness helper used throughout the numeric checks.
inline bool approx_equal(cplx a, cplx b, double tol) {
    return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

} // namespace newtonlab
