#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "newtonlab/poly.hpp"

namespace newtonlab {

struct RootCluster {
    cplx value;
    int multiplicity = 1;
};

struct RootResult {
    std::vector<RootCluster> roots;
    bool converged = true; // false: sweep budget exhausted, partial result
    int sweeps = 0;
    double max_residual = 0.0;

    int total_multiplicity() const {
        int n = 0;
        for (const auto& r : roots) n += r.multiplicity;
        return n;
    }
};

struct RootOptions {
    double tol = 1e-12;          // residual target, relative to coefficient scale
    int max_sweeps = 500;
    double step_tol = 1e-13;     // convergence when max step < step_tol * bound
    double cluster_scale = 0.0;  // 0: use max(1, Cauchy bound)
    unsigned seed = 0x5eed1234u; // deterministic random-disk initialization
};

namespace detail {

// residual scale sum |a_i| |z|^i
inline double residual_scale(const ComplexPoly& p, cplx z) {
    double az = std::abs(z), pw = 1.0, s = 0.0;
    for (int k = 0; k <= p.degree(); ++k) {
        s += std::abs(p.coeff(k)) * pw;
        pw *= az;
    }
    return std::max(s, 1e-300);
}

// Newton polish of `z` as a simple root of `p`; keeps the best residual seen.
inline cplx newton_polish(const ComplexPoly& p, cplx z, int iters = 8) {
    cplx best = z;
    double best_res = std::abs(p.eval(z)) / residual_scale(p, z);
    for (int i = 0; i < iters; ++i) {
        cplx v, d;
        p.eval_with_derivative(z, v, d);
        if (d == cplx{0, 0}) break;
        z -= v / d;
        double res = std::abs(p.eval(z)) / residual_scale(p, z);
        if (res < best_res) {
            best_res = res;
            best = z;
        }
    }
    return best;
}

} // namespace detail

/// Simultaneous Aberth--Ehrlich iteration. Returns deg(p) roots counted with
/// multiplicity; near-coincident approximations are merged into clusters of
/// radius ~ tol^(1/m) and polished on the (m-1)-th derivative.
inline RootResult poly_roots(const ComplexPoly& p, const RootOptions& opt = {}) {
    RootResult result;
    if (p.degree() < 1) {
        if (p.degree() < 0)
            throw Error("DegenerateInput", "poly_roots of the zero polynomial");
        return result; // constants have no roots
    }
    const int n = p.degree();
    const double bound = cauchy_root_bound(p);

    // strip exact zeros at the origin first
    ComplexPoly q = p;
    int zero_mult = 0;
    while (q.coeff(0) == cplx{0, 0} && q.degree() > 0) {
        q = q.deflate(cplx{0, 0});
        ++zero_mult;
    }

    std::vector<cplx> z(q.degree());
    std::mt19937 rng(opt.seed);
    std::uniform_real_distribution<double> uang(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> urad(0.3, 1.0);
    for (auto& zi : z) {
        double a = uang(rng), r = bound * urad(rng);
        zi = cplx{r * std::cos(a), r * std::sin(a)};
    }

    const int m = q.degree();
    bool converged = false;
    int sweep = 0;
    for (; sweep < opt.max_sweeps && m > 0; ++sweep) {
        double max_step = 0.0;
        bool all_resolved = true;
        for (int i = 0; i < m; ++i) {
            cplx v, d;
            q.eval_with_derivative(z[i], v, d);
            if (std::abs(v) > opt.tol * detail::residual_scale(q, z[i])) all_resolved = false;
            if (v == cplx{0, 0}) continue;
            cplx ratio = (d == cplx{0, 0}) ? cplx{0, 0} : v / d;
            cplx rep{0, 0};
            for (int j = 0; j < m; ++j) {
                if (j == i) continue;
                cplx diff = z[i] - z[j];
                if (diff == cplx{0, 0}) diff = cplx{1e-14 * bound, 1e-14 * bound};
                rep += cplx{1, 0} / diff;
            }
            cplx denom = cplx{1, 0} - ratio * rep;
            cplx step = (denom == cplx{0, 0}) ? ratio : ratio / denom;
            z[i] -= step;
            max_step = std::max(max_step, std::abs(step));
        }
        // multiple roots stagnate above the step tolerance; residuals decide then
        if (max_step < opt.step_tol * bound || all_resolved) {
            converged = true;
            ++sweep;
            break;
        }
    }
    if (!converged && m > 0) {
        converged = true;
        for (int i = 0; i < m; ++i)
            if (std::abs(q.eval(z[i])) > opt.tol * detail::residual_scale(q, z[i]))
                converged = false;
    }
    result.converged = converged || m == 0;
    result.sweeps = sweep;

    // Per-point multiplicity estimate from the Newton-step derivative:
    // near a multiplicity-m root, 1 - p p'' / p'^2 -> 1/m.
    const ComplexPoly dp = p.derivative();
    const ComplexPoly ddp = dp.derivative();
    auto estimate_mult = [&](cplx zi) -> int {
        cplx pv = p.eval(zi), dv = dp.eval(zi), d2 = ddp.eval(zi);
        if (dv == cplx{0, 0}) return n;
        cplx u = cplx{1, 0} - pv * d2 / (dv * dv);
        double ur = u.real();
        if (!(ur > 1e-3)) return n;
        int m_hat = static_cast<int>(std::lround(1.0 / ur));
        return std::clamp(m_hat, 1, n);
    };

    struct Working {
        cplx value;
        int multiplicity;
        int mult_hint;
    };
    // cluster radius is relative to the pair's own magnitude (floored at 1);
    // a global coefficient-bound scale would merge distinct small roots of
    // badly scaled polynomials
    auto pair_scale = [&](cplx a, cplx b) {
        if (opt.cluster_scale > 0) return opt.cluster_scale;
        return std::max({1.0, std::abs(a), std::abs(b)});
    };
    std::vector<Working> clusters;
    for (cplx zi : z) clusters.push_back({zi, 1, estimate_mult(zi)});
    if (zero_mult > 0) clusters.push_back({cplx{0, 0}, zero_mult, zero_mult});

    bool merged = true;
    while (merged) {
        merged = false;
        for (size_t i = 0; i < clusters.size() && !merged; ++i) {
            for (size_t j = i + 1; j < clusters.size() && !merged; ++j) {
                int mm = std::max({clusters[i].multiplicity + clusters[j].multiplicity,
                                   clusters[i].mult_hint, clusters[j].mult_hint});
                double radius = 3.0 * pair_scale(clusters[i].value, clusters[j].value) *
                                std::pow(opt.tol, 1.0 / mm);
                if (std::abs(clusters[i].value - clusters[j].value) < radius) {
                    int total = clusters[i].multiplicity + clusters[j].multiplicity;
                    cplx centroid = (clusters[i].value * double(clusters[i].multiplicity) +
                                     clusters[j].value * double(clusters[j].multiplicity)) /
                                    double(total);
                    clusters[i] = {centroid, total,
                                   std::max(clusters[i].mult_hint, clusters[j].mult_hint)};
                    clusters.erase(clusters.begin() + j);
                    merged = true;
                }
            }
        }
    }

    // A multiplicity-m root is a simple root of p^(m-1); polish it there and
    // accept the polish only if it stays inside the cluster zone.
    std::vector<RootCluster> out;
    for (const auto& c : clusters) {
        cplx value = c.value;
        if (c.multiplicity == 1) {
            value = detail::newton_polish(p, value);
        } else {
            ComplexPoly d = p;
            for (int k = 1; k < c.multiplicity; ++k) d = d.derivative();
            cplx polished = detail::newton_polish(d, value);
            if (std::abs(polished - value) <
                6.0 * pair_scale(value, value) * std::pow(opt.tol, 1.0 / c.multiplicity))
                value = polished;
        }
        out.push_back({value, c.multiplicity});
    }
    std::vector<RootCluster> clusters_final = std::move(out);

    std::sort(clusters_final.begin(), clusters_final.end(),
              [](const RootCluster& a, const RootCluster& b) {
                  if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
                  return a.value.imag() < b.value.imag();
              });

    double maxres = 0.0;
    for (const auto& c : clusters_final)
        maxres = std::max(maxres, std::abs(p.eval(c.value)) / detail::residual_scale(p, c.value));
    result.max_residual = maxres;
    result.roots = std::move(clusters_final);
    return result;
}

} // namespace newtonlab
