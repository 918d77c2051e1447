#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "newtonlab/rat_map.hpp"

namespace newtonlab {

enum class FixedPointKind { superattracting, attracting, repelling, parabolic };

inline const char* to_string(FixedPointKind k) {
    switch (k) {
        case FixedPointKind::superattracting: return "superattracting";
        case FixedPointKind::attracting: return "attracting";
        case FixedPointKind::repelling: return "repelling";
        case FixedPointKind::parabolic: return "parabolic";
    }
    return "?";
}

struct FixedPointInfo {
    SpherePoint location;
    cplx multiplier{0, 0};
    FixedPointKind kind = FixedPointKind::attracting;
    int petals = 0;            // parabolic points only
    int root_multiplicity = 0; // m with multiplier (m-1)/m; 0 when not applicable
};

struct CriticalPoint {
    SpherePoint location;
    int multiplicity = 1;
};

/// The Newton map of p*e^q together with its construction data.
struct NewtonMapSpec {
    ComplexPoly p;
    ComplexPoly q;
    RatMap map;     // reduced z - p/(p' + p q')
    int d = 0;      // degree of the map
    int n = 0;      // deg q (0 for constant q)
};

inline NewtonMapSpec build_newton_map(const ComplexPoly& p, const ComplexPoly& q,
                                      double gcd_tol = 1e-8) {
    if (p.is_zero()) throw Error("DegenerateInput", "p must not be the zero polynomial");
    ComplexPoly den = p.derivative() + p * q.derivative();
    if (den.is_zero())
        throw Error("DegenerateInput", "p' + p q' vanishes identically (constant p, constant q)");
    ComplexPoly num = ComplexPoly::identity() * den - p;
    RatMap map = RatMap(std::move(num), std::move(den)).reduced(gcd_tol);
    NewtonMapSpec spec{p, q, std::move(map), 0, std::max(q.degree(), 0)};
    spec.d = spec.map.degree();
    return spec;
}

namespace detail {

inline FixedPointKind classify_multiplier(cplx lambda) {
    double a = std::abs(lambda);
    if (a < 1e-8) return FixedPointKind::superattracting;
    if (std::abs(lambda - cplx{1, 0}) < 1e-6) return FixedPointKind::parabolic;
    if (a < 1.0) return FixedPointKind::attracting;
    return FixedPointKind::repelling;
}

/// Taylor coefficients of the chart map at w=0 up to order K-1.
inline std::vector<cplx> chart_series(const RatMap& map, int K) {
    RatMap chart = map.chart_at_infinity();
    return series_divide(chart.num(), chart.den(), K);
}

/// Parabolic germ order at infinity: smallest nu >= 1 with the chart map
/// w + a_nu w^(nu+1) + ..., a_nu != 0. Returns (nu, a_nu).
/// The noise floor is judged against the coefficients seen so far; later
/// series terms grow geometrically and must not inflate it.
inline std::pair<int, cplx> germ_at_infinity(const RatMap& map, double rel_tol = 1e-7) {
    int D = map.degree();
    int K = 2 * D + 4;
    std::vector<cplx> s = chart_series(map, K);
    double scale = 1.0;
    for (int j = 2; j < K; ++j) {
        if (std::abs(s[j]) > rel_tol * scale) return {j - 1, s[j]};
        scale = std::max(scale, std::abs(s[j]));
    }
    throw Error("NotParabolic", "no nonvanishing germ coefficient found at infinity");
}

} // namespace detail

/// Derivative of the map at a fixed point xi (finite or infinite); the point at
/// infinity is handled in the chart w = 1/z by coefficient reversal.
inline cplx multiplier_at(const NewtonMapSpec& N, const SpherePoint& xi, double tol = 1e-10) {
    if (xi.at_infinity) {
        RatMap chart = N.map.chart_at_infinity();
        if (spherical_distance(chart.eval_sphere(cplx{0, 0}), cplx{0, 0}) > tol)
            throw Error("NotFixed", "infinity is not fixed within tolerance");
        return chart.derivative_at(cplx{0, 0});
    }
    SpherePoint image = N.map.eval_sphere(xi.z);
    if (spherical_distance(image, xi) > tol)
        throw Error("NotFixed", "point is not fixed within tolerance");
    return N.map.derivative_at(xi.z);
}

namespace detail {

/// num - z*den with the cancellation residue stripped: when the map fixes
/// infinity the top coefficients cancel exactly in theory, but reduction
/// noise (~1e-16 of the coefficient scale) would otherwise leave junk
/// degrees whose roots masquerade as huge fixed points.
inline ComplexPoly fixed_point_poly(const RatMap& map) {
    ComplexPoly fp = map.num() - ComplexPoly::identity() * map.den();
    double scale = std::max(map.num().max_coeff_abs(), map.den().max_coeff_abs());
    std::vector<cplx> c(fp.coeffs());
    while (!c.empty() && std::abs(c.back()) <= 1e-12 * scale) c.pop_back();
    return ComplexPoly(std::move(c));
}

} // namespace detail

/// Fixed points of the map: the finite ones are the roots of num - z*den
/// (the roots of p), plus the point at infinity with its chart multiplier.
inline std::vector<FixedPointInfo> fixed_points(const NewtonMapSpec& N, double tol = 1e-10) {
    std::vector<FixedPointInfo> out;
    ComplexPoly fp_poly = detail::fixed_point_poly(N.map);
    if (!fp_poly.is_zero() && fp_poly.degree() >= 1) {
        RootOptions opt;
        opt.tol = std::min(1e-12, tol);
        RootResult rr = poly_roots(fp_poly, opt);
        if (!rr.converged)
            throw Error("NonConvergence", "fixed point root finding did not converge");
        for (const auto& r : rr.roots) {
            FixedPointInfo info;
            info.location = SpherePoint::finite(r.value);
            info.multiplier = N.map.derivative_at(r.value);
            info.kind = detail::classify_multiplier(info.multiplier);
            if (std::abs(cplx{1, 0} - info.multiplier) > 1e-12) {
                double mreal = (cplx{1, 0} / (cplx{1, 0} - info.multiplier)).real();
                int m = static_cast<int>(std::lround(mreal));
                if (m >= 1 &&
                    std::abs(info.multiplier - cplx{double(m - 1) / m, 0}) < 1e-6)
                    info.root_multiplicity = m;
            }
            out.push_back(info);
        }
    }

    FixedPointInfo inf;
    inf.location = SpherePoint::infinity();
    inf.multiplier = multiplier_at(N, SpherePoint::infinity(), tol);
    inf.kind = detail::classify_multiplier(inf.multiplier);
    if (N.n >= 1) {
        auto [nu, a] = detail::germ_at_infinity(N.map);
        inf.kind = FixedPointKind::parabolic;
        inf.petals = nu; // cross-checked against n = deg q by callers/tests
    }
    out.push_back(inf);
    return out;
}

/// Critical points with multiplicities. Finite ones are the roots of the
/// Wronskian n'd - nd'; infinity carries the remaining 2d-2 - deg(W).
inline std::vector<CriticalPoint> critical_points(const NewtonMapSpec& N, double tol = 1e-10) {
    if (N.d < 2) throw Error("DegenerateInput", "critical points need degree >= 2");
    ComplexPoly w = N.map.wronskian();
    std::vector<CriticalPoint> out;
    int finite_total = 0;
    if (w.degree() >= 1) {
        RootOptions opt;
        opt.tol = std::min(1e-12, tol);
        RootResult rr = poly_roots(w, opt);
        if (!rr.converged)
            throw Error("NonConvergence", "critical point root finding did not converge");
        for (const auto& r : rr.roots) {
            out.push_back({SpherePoint::finite(r.value), r.multiplicity});
            finite_total += r.multiplicity;
        }
    } else {
        finite_total = 0;
    }
    int at_inf = (2 * N.d - 2) - finite_total;
    if (at_inf > 0) out.push_back({SpherePoint::infinity(), at_inf});
    return out;
}

struct CharacterEntry {
    cplx location;
    cplx multiplier;
    int m = 0;
    double residual = 0.0;
};

struct CharacterReport {
    std::vector<CharacterEntry> entries;
    bool pass = false;
    double max_residual = 0.0;
};

/// Necessary-condition certificate that a rational map is the Newton map of an
/// entire function: every finite fixed point must have multiplier (m-1)/m.
inline CharacterReport verify_newton_character(const RatMap& map, double tol = 1e-8) {
    CharacterReport rep;
    ComplexPoly fp_poly = detail::fixed_point_poly(map);
    if (fp_poly.is_zero()) {
        rep.pass = false; // identity map: not a Newton map of an entire function
        return rep;
    }
    if (fp_poly.degree() >= 1) {
        RootResult rr = poly_roots(fp_poly);
        for (const auto& r : rr.roots) {
            CharacterEntry e;
            e.location = r.value;
            e.multiplier = map.derivative_at(r.value);
            e.residual = std::numeric_limits<double>::infinity();
            for (int m = 1; m <= 64; ++m) {
                double res = std::abs(e.multiplier - cplx{double(m - 1) / m, 0});
                if (res < e.residual) {
                    e.residual = res;
                    e.m = m;
                }
            }
            rep.entries.push_back(e);
            rep.max_residual = std::max(rep.max_residual, e.residual);
        }
    }
    rep.pass = true;
    for (const auto& e : rep.entries)
        if (e.residual >= tol) rep.pass = false;
    return rep;
}

} // namespace newtonlab
