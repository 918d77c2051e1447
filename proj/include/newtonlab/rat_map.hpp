#pragma once

#include <cmath>
#include <vector>

#include "newtonlab/poly.hpp"
#include "newtonlab/roots.hpp"

namespace newtonlab {

/// Reduced ratio of two complex polynomials.
class RatMap {
public:
    RatMap(ComplexPoly num, ComplexPoly den) : num_(std::move(num)), den_(std::move(den)) {
        if (den_.is_zero()) throw Error("DegenerateInput", "rational map with zero denominator");
    }

    const ComplexPoly& num() const { return num_; }
    const ComplexPoly& den() const { return den_; }
    int degree() const { return std::max(num_.degree(), den_.degree()); }

    cplx eval(cplx z) const { return num_.eval(z) / den_.eval(z); }

    SpherePoint eval_sphere(cplx z) const {
        cplx n = num_.eval(z), d = den_.eval(z);
        if (d == cplx{0, 0} || !std::isfinite(std::abs(n / d)))
            return SpherePoint::infinity();
        return SpherePoint::finite(n / d);
    }

    /// Derivative as a function value (not reduced): (n'd - nd')/d^2 at z.
    cplx derivative_at(cplx z) const {
        cplx n, dn, d, dd;
        num_.eval_with_derivative(z, n, dn);
        den_.eval_with_derivative(z, d, dd);
        return (dn * d - n * dd) / (d * d);
    }

    /// Numerator of the derivative: n'd - nd' (the Wronskian), tolerance-trimmed.
    ComplexPoly wronskian(double trim_eps = 1e-12) const {
        ComplexPoly w = num_.derivative() * den_ - num_ * den_.derivative();
        return w.trimmed(trim_eps);
    }

    RatMap derivative(double gcd_tol = 1e-8) const {
        RatMap d(wronskian(), den_ * den_);
        return d.reduced(gcd_tol);
    }

    /// Conjugation by w = 1/z, written to the common degree D = degree():
    /// (1/N(1/w)) = rev_D(den) / rev_D(num).
    RatMap chart_at_infinity() const {
        int D = degree();
        ComplexPoly cn = den_.reversed_to_degree(D);
        ComplexPoly cd = num_.reversed_to_degree(D);
        return RatMap(std::move(cn), std::move(cd));
    }

    /// Deflates root pairs of num and den that agree within
    /// rho = tol * max(1, largest root magnitude).
    RatMap reduced(double tol = 1e-8) const {
        if (num_.is_zero() || num_.degree() == 0 || den_.degree() == 0) return *this;
        RootResult rn = poly_roots(num_);
        RootResult rd = poly_roots(den_);
        double maxmag = 0.0;
        for (const auto& r : rn.roots) maxmag = std::max(maxmag, std::abs(r.value));
        for (const auto& r : rd.roots) maxmag = std::max(maxmag, std::abs(r.value));
        double rho = tol * std::max(1.0, maxmag);

        ComplexPoly n = num_, d = den_;
        std::vector<int> dleft(rd.roots.size());
        for (size_t j = 0; j < rd.roots.size(); ++j) dleft[j] = rd.roots[j].multiplicity;
        for (const auto& nr : rn.roots) {
            int navail = nr.multiplicity;
            for (size_t j = 0; j < rd.roots.size() && navail > 0; ++j) {
                if (dleft[j] == 0) continue;
                if (std::abs(nr.value - rd.roots[j].value) < rho) {
                    int k = std::min(navail, dleft[j]);
                    for (int t = 0; t < k; ++t) {
                        n = n.deflate(nr.value);
                        d = d.deflate(rd.roots[j].value);
                    }
                    navail -= k;
                    dleft[j] -= k;
                }
            }
        }
        return RatMap(std::move(n), std::move(d));
    }

    /// Monic-normalized comparison form (projective in coefficients).
    RatMap normalized() const {
        cplx s = den_.lead();
        return RatMap(num_.scaled(cplx{1, 0} / s), den_.scaled(cplx{1, 0} / s));
    }

private:
    ComplexPoly num_;
    ComplexPoly den_;
};

inline bool approx_equal(const RatMap& a, const RatMap& b, double tol) {
    RatMap an = a.normalized(), bn = b.normalized();
    if (an.num().degree() != bn.num().degree() || an.den().degree() != bn.den().degree())
        return false;
    for (int k = 0; k <= an.num().degree(); ++k)
        if (std::abs(an.num().coeff(k) - bn.num().coeff(k)) > tol) return false;
    for (int k = 0; k <= an.den().degree(); ++k)
        if (std::abs(an.den().coeff(k) - bn.den().coeff(k)) > tol) return false;
    return true;
}

} // namespace newtonlab
