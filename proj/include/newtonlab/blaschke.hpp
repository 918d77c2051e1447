#pragma once

#include <cmath>

#include "newtonlab/poly.hpp"

namespace newtonlab {

/// Moebius transform (az+b)/(cz+d), ad-bc != 0.
struct MoebiusTransform {
    cplx a{1, 0}, b{0, 0}, c{0, 0}, d{1, 0};

    cplx det() const { return a * d - b * c; }

    cplx apply(cplx z) const { return (a * z + b) / (c * z + d); }

    MoebiusTransform inverse() const { return {d, -b, -c, a}; }

    MoebiusTransform compose(const MoebiusTransform& o) const {
        // this after o
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
};

/// disk automorphism factor of B_b: M_b(z) = (z+b)/(1+bz)
inline MoebiusTransform moebius_mb(double b) {
    return {cplx{1, 0}, cplx{b, 0}, cplx{b, 0}, cplx{1, 0}};
}

/// The family B_b(z) = (z^k + b)/(1 + b z^k) on the unit disk with its
/// attracting (or parabolic, b = (k-1)/(k+1)) fixed point alpha in (0, 1].
struct BlaschkeModel {
    int k = 2;
    double b = 0.0;
    double alpha = 0.0;
    double multiplier = 0.0;
};

inline double blaschke_amax(int k) { return double(k - 1) / double(k + 1); }

inline cplx eval_blaschke(const BlaschkeModel& model, cplx z) {
    cplx zk = std::pow(z, model.k);
    cplx den = cplx{1, 0} + model.b * zk;
    if (den == cplx{0, 0}) throw Error("PoleHit", "Blaschke denominator vanishes");
    return (zk + model.b) / den;
}

inline cplx blaschke_derivative(const BlaschkeModel& model, cplx z) {
    cplx zk1 = std::pow(z, model.k - 1);
    cplx den = cplx{1, 0} + model.b * zk1 * z;
    return double(model.k) * zk1 * (1.0 - model.b * model.b) / (den * den);
}

namespace detail {

inline double blaschke_alpha(int k, double b) {
    if (b == 0.0) return 0.0;
    // the critical orbit 0, b, B(b), ... marches monotonically to alpha
    BlaschkeModel m{k, b, 0.0, 0.0};
    double z = 0.0;
    for (int i = 0; i < 200000; ++i) {
        double next = eval_blaschke(m, cplx{z, 0}).real();
        if (std::abs(next - z) < 1e-14) {
            z = next;
            break;
        }
        z = next;
    }
    // one Newton polish on B(z) - z
    for (int i = 0; i < 4; ++i) {
        double f = eval_blaschke(m, cplx{z, 0}).real() - z;
        double df = blaschke_derivative(m, cplx{z, 0}).real() - 1.0;
        if (df == 0.0) break;
        z -= f / df;
    }
    return z;
}

} // namespace detail

inline BlaschkeModel attracting_blaschke(int k, double b) {
    if (k < 2) throw Error("BadDegree", "Blaschke degree must be >= 2");
    if (b < 0.0 || b > blaschke_amax(k))
        throw Error("DegenerateInput", "b must lie in [0, (k-1)/(k+1)]");
    BlaschkeModel m{k, b, 0.0, 0.0};
    m.alpha = detail::blaschke_alpha(k, b);
    m.multiplier = blaschke_derivative(m, cplx{m.alpha, 0}).real();
    return m;
}

/// The parabolic normal form P_k: b = (k-1)/(k+1), alpha = 1, multiplier 1.
inline BlaschkeModel parabolic_blaschke(int k) {
    if (k < 2) throw Error("BadDegree", "Blaschke degree must be >= 2");
    BlaschkeModel m{k, blaschke_amax(k), 1.0, 1.0};
    return m;
}

/// Finds b in (0, (k-1)/(k+1)) with multiplier lambda at the attracting fixed
/// point, by bracketing bisection (multiplier 0 at b=0, -> 1 at the parabolic
/// endpoint).
inline BlaschkeModel solve_b_for_multiplier(int k, double lambda) {
    if (k < 2) throw Error("BadDegree", "Blaschke degree must be >= 2");
    if (!(lambda > 0.0 && lambda < 1.0))
        throw Error("DegenerateInput", "target multiplier must be in (0,1)");
    double lo = 1e-12, hi = blaschke_amax(k) - 1e-12;
    auto mult = [&](double b) { return attracting_blaschke(k, b).multiplier; };
    double flo = mult(lo) - lambda, fhi = mult(hi) - lambda;
    if (flo * fhi > 0.0)
        throw Error("NoBracket", "endpoint multipliers do not straddle the target");
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        double f = mult(mid) - lambda;
        if (std::abs(f) < 1e-13 || hi - lo < 1e-15) {
            lo = hi = mid;
            break;
        }
        if (flo * f <= 0.0)
            hi = mid;
        else {
            lo = mid;
            flo = f;
        }
    }
    return attracting_blaschke(k, 0.5 * (lo + hi));
}

/// Residual of the multiplier system k(z-b)(1-zb) = lambda z(1-b^2) at z=alpha;
/// an independent cross-check of the solver.
inline double multiplier_system_residual(int k, double b, double alpha, double lambda) {
    return k * (alpha - b) * (1.0 - alpha * b) - lambda * alpha * (1.0 - b * b);
}

/// Fixed-point polynomial of E(z) = (z^k+a)/(1+a z^k): a z^(k+1) - z^k + z - a.
inline ComplexPoly fixed_point_polynomial(int k, double a, bool monic = false) {
    std::vector<cplx> c(k + 2, cplx{0, 0});
    c[0] = cplx{-a, 0};
    c[1] = cplx{1, 0};
    c[k] += cplx{-1, 0};
    c[k + 1] += cplx{a, 0};
    ComplexPoly p(std::move(c));
    return monic ? p.monic() : p;
}

struct TripleRootReport {
    bool pass = false;
    double remainder_norm = 0.0;
    double second_derivative_residual = 0.0;
    ComplexPoly quotient;
};

/// With a = (k-1)/(k+1) the fixed-point equation has a triple solution at
/// z = 1: division by (z-1)^3 must be remainder-free, and the second
/// derivative criterion (k+1)k - k(k-1)/a must vanish.
inline TripleRootReport verify_triple_root(int k, double a) {
    if (k < 2) throw Error("BadDegree", "Blaschke degree must be >= 2");
    ComplexPoly p = fixed_point_polynomial(k, a, /*monic=*/true);
    ComplexPoly cube = ComplexPoly::from_roots({cplx{1, 0}, cplx{1, 0}, cplx{1, 0}});
    TripleRootReport rep;
    ComplexPoly rem;
    rep.quotient = p.divide(cube, rem);
    for (int j = 0; j <= rem.degree(); ++j)
        rep.remainder_norm = std::max(rep.remainder_norm, std::abs(rem.coeff(j)));
    rep.second_derivative_residual = std::abs((k + 1.0) * k - k * (k - 1.0) / a);
    rep.pass = rep.remainder_norm < 1e-12 && rep.second_derivative_residual < 1e-9;
    return rep;
}

inline TripleRootReport verify_triple_root(int k) {
    return verify_triple_root(k, blaschke_amax(k));
}

/// B_b = M_b o (z -> z^k).
inline std::pair<MoebiusTransform, int> moebius_factorization(const BlaschkeModel& model) {
    return {moebius_mb(model.b), model.k};
}

} // namespace newtonlab
