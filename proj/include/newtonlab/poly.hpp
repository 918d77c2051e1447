#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "newtonlab/complex_util.hpp"

namespace newtonlab {

/// Dense complex polynomial, coefficients in ascending powers.
/// The zero polynomial is the empty coefficient list; otherwise the leading
/// coefficient is nonzero (trailing zeros are trimmed on construction).
class ComplexPoly {
public:
    ComplexPoly() = default;
    ComplexPoly(std::initializer_list<cplx> coeffs) : c_(coeffs) { trim(); }
    explicit ComplexPoly(std::vector<cplx> coeffs) : c_(std::move(coeffs)) { trim(); }

    static ComplexPoly zero() { return ComplexPoly{}; }
    static ComplexPoly constant(cplx a) { return ComplexPoly{{a}}; }
    static ComplexPoly identity() { return ComplexPoly{{cplx{0, 0}, cplx{1, 0}}}; }

    static ComplexPoly from_roots(const std::vector<cplx>& roots, cplx lead = cplx{1, 0}) {
        ComplexPoly p = constant(lead);
        for (cplx r : roots) p = p * ComplexPoly{{-r, cplx{1, 0}}};
        return p;
    }

    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    const std::vector<cplx>& coeffs() const { return c_; }

    cplx coeff(int k) const {
        return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[k] : cplx{0, 0};
    }
    cplx lead() const { return c_.empty() ? cplx{0, 0} : c_.back(); }

    double max_coeff_abs() const {
        double m = 0.0;
        for (cplx a : c_) m = std::max(m, std::abs(a));
        return m;
    }

    /// Horner evaluation.
    cplx eval(cplx z) const {
        cplx acc{0, 0};
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
        return acc;
    }

    /// Value and derivative in one Horner pass.
    void eval_with_derivative(cplx z, cplx& value, cplx& derivative) const {
        cplx p{0, 0}, dp{0, 0};
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
            dp = dp * z + p;
            p = p * z + *it;
        }
        value = p;
        derivative = dp;
    }

    ComplexPoly derivative() const {
        if (c_.size() <= 1) return zero();
        std::vector<cplx> d(c_.size() - 1);
        for (size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * double(k);
        return ComplexPoly(std::move(d));
    }

    ComplexPoly operator+(const ComplexPoly& o) const {
        std::vector<cplx> r(std::max(c_.size(), o.c_.size()), cplx{0, 0});
        for (size_t k = 0; k < c_.size(); ++k) r[k] += c_[k];
        for (size_t k = 0; k < o.c_.size(); ++k) r[k] += o.c_[k];
        return ComplexPoly(std::move(r));
    }

    ComplexPoly operator-(const ComplexPoly& o) const {
        std::vector<cplx> r(std::max(c_.size(), o.c_.size()), cplx{0, 0});
        for (size_t k = 0; k < c_.size(); ++k) r[k] += c_[k];
        for (size_t k = 0; k < o.c_.size(); ++k) r[k] -= o.c_[k];
        return ComplexPoly(std::move(r));
    }

    ComplexPoly operator*(const ComplexPoly& o) const {
        if (is_zero() || o.is_zero()) return zero();
        std::vector<cplx> r(c_.size() + o.c_.size() - 1, cplx{0, 0});
        for (size_t i = 0; i < c_.size(); ++i)
            for (size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
        return ComplexPoly(std::move(r));
    }

    ComplexPoly scaled(cplx s) const {
        std::vector<cplx> r(c_);
        for (cplx& a : r) a *= s;
        return ComplexPoly(std::move(r));
    }

    ComplexPoly monic() const {
        if (is_zero()) return *this;
        return scaled(cplx{1, 0} / lead());
    }

    /// Synthetic division by (z - root); the remainder is dropped.
    ComplexPoly deflate(cplx root) const {
        if (c_.size() <= 1) return zero();
        std::vector<cplx> q(c_.size() - 1);
        cplx carry = c_.back();
        for (int k = static_cast<int>(c_.size()) - 2; k >= 0; --k) {
            q[k] = carry;
            carry = c_[k] + root * carry;
        }
        return ComplexPoly(std::move(q));
    }

    /// Long division; returns quotient, stores remainder.
    ComplexPoly divide(const ComplexPoly& divisor, ComplexPoly& remainder) const {
        if (divisor.is_zero()) throw Error("DivisionByZero", "polynomial division by zero");
        std::vector<cplx> rem(c_);
        int dn = degree(), dd = divisor.degree();
        if (dn < dd) {
            remainder = *this;
            return zero();
        }
        std::vector<cplx> quot(dn - dd + 1, cplx{0, 0});
        for (int k = dn - dd; k >= 0; --k) {
            cplx q = rem[k + dd] / divisor.lead();
            quot[k] = q;
            for (int j = 0; j <= dd; ++j) rem[k + j] -= q * divisor.coeff(j);
        }
        rem.resize(dd > 0 ? dd : 0);
        remainder = ComplexPoly(std::move(rem));
        return ComplexPoly(std::move(quot));
    }

    /// Taylor shift: coefficients of p(center + u) in u.
    ComplexPoly shifted(cplx center) const {
        if (is_zero()) return zero();
        std::vector<cplx> r(c_);
        // repeated synthetic division accumulates the shifted coefficients
        int n = static_cast<int>(r.size());
        for (int i = 0; i < n - 1; ++i)
            for (int k = n - 2; k >= i; --k) r[k] += center * r[k + 1];
        return ComplexPoly(std::move(r));
    }

    /// Reversal to a fixed degree: sum_j c_j w^(D-j). Used for the chart at infinity.
    ComplexPoly reversed_to_degree(int D) const {
        std::vector<cplx> r(D + 1, cplx{0, 0});
        for (int j = 0; j <= degree() && j <= D; ++j) r[D - j] = coeff(j);
        return ComplexPoly(std::move(r));
    }

    /// Drops leading coefficients smaller than eps relative to the largest one.
    ComplexPoly trimmed(double eps) const {
        double scale = max_coeff_abs();
        std::vector<cplx> r(c_);
        while (!r.empty() && std::abs(r.back()) <= eps * scale) r.pop_back();
        return ComplexPoly(std::move(r));
    }

    std::string to_string() const {
        if (is_zero()) return "0+0i";
        std::string out;
        for (size_t k = 0; k < c_.size(); ++k) {
            if (k) out += ',';
            out += format_complex(c_[k]);
        }
        return out;
    }

    static ComplexPoly parse(const std::string& text) {
        std::vector<cplx> coeffs;
        std::stringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ',')) coeffs.push_back(parse_complex(tok));
        return ComplexPoly(std::move(coeffs));
    }

    bool operator==(const ComplexPoly& o) const { return c_ == o.c_; }

private:
    void trim() {
        while (!c_.empty() && c_.back() == cplx{0, 0}) c_.pop_back();
    }

    std::vector<cplx> c_;
};

/// Cauchy bound: every root lies in |z| <= 1 + max |a_i / a_n|.
inline double cauchy_root_bound(const ComplexPoly& p) {
    if (p.degree() < 1) return 1.0;
    double m = 0.0;
    for (int k = 0; k < p.degree(); ++k) m = std::max(m, std::abs(p.coeff(k)));
    return 1.0 + m / std::abs(p.lead());
}

/// Truncated power series of a/b around 0 (b(0) must be nonzero); K coefficients.
inline std::vector<cplx> series_divide(const ComplexPoly& a, const ComplexPoly& b, int K) {
    if (b.coeff(0) == cplx{0, 0})
        throw Error("SeriesPole", "series division with vanishing denominator at 0");
    std::vector<cplx> s(K, cplx{0, 0});
    for (int k = 0; k < K; ++k) {
        cplx acc = a.coeff(k);
        for (int j = 1; j <= k; ++j) acc -= b.coeff(j) * s[k - j];
        s[k] = acc / b.coeff(0);
    }
    return s;
}

} // namespace newtonlab
