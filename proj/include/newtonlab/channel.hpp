#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "newtonlab/orbit.hpp"

namespace newtonlab {

/// Local Boettcher coordinate at a superattracting fixed point: phi with
/// phi(N(z)) = phi(z)^k on a disk around the root, phi(root) = 0.
/// The derivative at the root is forced to a_k^(1/(k-1)) by the functional
/// equation (principal root); it is reported, not normalized away.
class BoettcherChart {
public:
    BoettcherChart(const RatMap& map, cplx root, double radius)
        : map_(map), root_(root), radius_(radius) {
        if (spherical_distance(map_.eval_sphere(root), root) > 1e-9)
            throw Error("NotFixed", "chart root is not fixed");
        cplx lambda = map_.derivative_at(root);
        if (std::abs(lambda) > 1e-8)
            throw Error("NonSuperattracting", "chart needs a superattracting fixed point");

        // local germ: series of N(root+u) - root, first nonzero index = local degree
        int K = 2 * map_.degree() + 4;
        ComplexPoly nsh = map_.num().shifted(root);
        den_sh_ = map_.den().shifted(root);
        ComplexPoly pnum = nsh - den_sh_.scaled(root); // vanishes to order k at 0
        std::vector<cplx> s = series_divide(pnum, den_sh_, K);
        double scale = 1.0;
        k_ = 0;
        for (int j = 1; j < K; ++j) {
            if (std::abs(s[j]) > 1e-9 * scale) {
                k_ = j;
                germ_lead_ = s[j];
                break;
            }
            scale = std::max(scale, std::abs(s[j]));
        }
        if (k_ < 2) throw Error("NonSuperattracting", "local degree is 1");
        derivative_ = std::pow(germ_lead_, 1.0 / (k_ - 1));

        // N(root+u) - root = u^k * tail(u)/den_sh(u): dropping the sub-germ
        // coefficients (cancellation residue ~1e-16) makes the orbit of the
        // germ computable without subtractive loss at tiny |u|
        std::vector<cplx> tail(pnum.coeffs().begin() + std::min<size_t>(k_, pnum.coeffs().size()),
                               pnum.coeffs().end());
        tail_ = ComplexPoly(std::move(tail));
    }

    int local_degree() const { return k_; }
    cplx germ_lead() const { return germ_lead_; }
    cplx derivative_at_root() const { return derivative_; }
    double radius() const { return radius_; }

    cplx apply(cplx z) const {
        cplx u = z - root_;
        if (u == cplx{0, 0}) return u;
        if (std::abs(u) > radius_)
            throw Error("OutOfDomain", "point is outside the chart disk");
        // phi(u) = u * exp( sum k^-(n+1) log(u_{n+1}/u_n^k) ) with
        // u_{n+1}/u_n^k = tail(u_n)/den_sh(u_n) evaluated subtraction-free;
        // the remaining terms sum to log(a) * (leftover weights)
        cplx log_sum{0, 0};
        cplx log_a = std::log(germ_lead_);
        cplx un = u;
        double weight = 1.0 / k_;
        for (int n = 0; n < 80; ++n) {
            if (std::abs(un) < 1e-30) break;
            cplx ratio = tail_.eval(un) / den_sh_.eval(un);
            log_sum += weight * (log_a + std::log(ratio / germ_lead_));
            un = std::pow(un, k_) * ratio;
            weight /= k_;
        }
        log_sum += log_a * (weight * k_ / (k_ - 1.0));
        return u * std::exp(log_sum);
    }

    /// Newton inversion of the chart within its disk.
    cplx invert(cplx w) const {
        cplx z = root_ + w / derivative_;
        for (int i = 0; i < 40; ++i) {
            cplx f = apply(z) - w;
            double h = 1e-7 * std::max(1e-6, std::abs(z - root_));
            cplx d = (apply(z + cplx{h, 0}) - apply(z - cplx{h, 0})) / (2.0 * h);
            if (d == cplx{0, 0}) break;
            cplx step = f / d;
            z -= step;
            if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(z))) break;
        }
        if (std::abs(apply(z) - w) > 1e-10 * std::max(1.0, std::abs(w)))
            throw Error("OutOfDomain", "chart inversion failed");
        return z;
    }

private:
    RatMap map_;
    cplx root_;
    double radius_;
    int k_ = 0;
    cplx germ_lead_{0, 0};
    cplx derivative_{0, 0};
    ComplexPoly den_sh_;
    ComplexPoly tail_;
};

inline BoettcherChart local_boettcher(const RatMap& map, cplx root, double radius = 0.1) {
    return BoettcherChart(map, root, radius);
}

struct Ray {
    int basin = -1; // root index
    int j = 0;      // ray index in 0..k_i-2
    std::vector<cplx> polyline;
    bool marked = false;
};

struct RayOptions {
    double escape_radius = 1e3;
    int max_generations = 64;
    int points_per_generation = 16;
    double seed_potential = 0.1; // |phi| at the outer end of the seed segment
};

/// Traces the j-th fixed internal ray of a superattracting basin outward by
/// inverse-branch continuation, verified against basin classification.
inline Ray trace_ray(const Dynamics& dyn, int root_index, int j, const RayOptions& opt = {}) {
    cplx root = dyn.roots[root_index];
    BoettcherChart chart = local_boettcher(dyn.N.map, root, 0.5);
    int k = chart.local_degree();
    if (j < 0 || j > k - 2) throw Error("DegenerateInput", "ray index out of range");
    double ray_angle = 2.0 * kPi * j / (k - 1);
    cplx dir{std::cos(ray_angle), std::sin(ray_angle)};

    Ray ray;
    ray.basin = root_index;
    ray.j = j;

    // seed segment: one fundamental domain of potentials [t0^k, t0]
    double t0 = opt.seed_potential;
    int M = opt.points_per_generation;
    for (int s = 0; s <= M; ++s) {
        double lt = k * std::log(t0) + (std::log(t0) - k * std::log(t0)) * (double(s) / M);
        ray.polyline.push_back(chart.invert(std::exp(lt) * dir));
    }

    for (int gen = 0; gen < opt.max_generations; ++gen) {
        size_t base = ray.polyline.size() - M - 1;
        bool escaped = false;
        for (int s = 1; s <= M; ++s) {
            cplx target = ray.polyline[base + s];
            cplx prev = ray.polyline.back();
            ComplexPoly pre = dyn.N.map.num() - dyn.N.map.den().scaled(target);
            RootResult rr = poly_roots(pre);
            // candidates ordered by distance to the advancing tip
            std::vector<cplx> cand;
            for (const auto& r : rr.roots) cand.push_back(r.value);
            std::sort(cand.begin(), cand.end(), [&](cplx a, cplx b) {
                return std::abs(a - prev) < std::abs(b - prev);
            });
            bool found = false;
            for (cplx c : cand) {
                if (std::abs(c - prev) > 0.75 * std::abs(prev - root) + 0.1) break;
                OrbitRecord o = iterate(dyn, SpherePoint::finite(c));
                if (o.outcome.type == OutcomeType::converged_to &&
                    o.outcome.index == root_index) {
                    ray.polyline.push_back(c);
                    found = true;
                    break;
                }
            }
            if (!found)
                throw Error("BranchLoss", "no inverse-branch candidate stays in the basin");
            if (std::abs(ray.polyline.back()) > opt.escape_radius) {
                escaped = true;
                break;
            }
        }
        if (escaped) break;
    }
    return ray;
}

struct ChannelDiagram {
    std::vector<Ray> rays;
    int n_marked = 0;
};

/// All fixed internal rays of every superattracting basin.
inline ChannelDiagram channel_diagram(const Dynamics& dyn, const RayOptions& opt = {}) {
    ChannelDiagram diagram;
    for (size_t i = 0; i < dyn.roots.size(); ++i) {
        BoettcherChart chart = local_boettcher(dyn.N.map, dyn.roots[i], 0.5);
        for (int j = 0; j + 1 < chart.local_degree(); ++j)
            diagram.rays.push_back(trace_ray(dyn, static_cast<int>(i), j, opt));
    }
    return diagram;
}

struct AccessReport {
    int count = 0;            // invariant accesses = in-basin critical points
    bool petal_basin = false;
    int dynamical_index = -1; // petal basins: the access carrying the critical orbit
};

/// Access count of the basin containing `sample` (root or petal basin).
inline AccessReport count_accesses(const Dynamics& dyn, cplx sample) {
    OrbitRecord rec = iterate(dyn, SpherePoint::finite(sample));
    AccessReport rep;
    auto crits = critical_points(dyn.N);
    if (rec.outcome.type == OutcomeType::converged_to) {
        int idx = rec.outcome.index;
        for (const auto& c : crits) {
            if (c.location.at_infinity) continue;
            if (std::abs(c.location.z - dyn.roots[idx]) < 1e-9 ||
                member_root_basin(dyn, c.location.z, idx))
                rep.count += c.multiplicity;
        }
        return rep;
    }
    if (rec.outcome.type == OutcomeType::petal) {
        rep.petal_basin = true;
        int j = rec.outcome.index;
        for (const auto& c : crits) {
            if (c.location.at_infinity) continue;
            if (member_petal_basin(dyn, c.location.z, j)) {
                rep.count += c.multiplicity;
                if (rep.dynamical_index < 0) rep.dynamical_index = 0;
            }
        }
        return rep;
    }
    throw Error("Inconclusive", "sample basin is unclassified");
}

/// Marks at most one ray per basin; n_marked = |selections|.
inline ChannelDiagram mark(ChannelDiagram diagram,
                           const std::vector<std::pair<int, int>>& selections) {
    std::vector<int> seen;
    for (const auto& [basin, j] : selections) {
        if (std::find(seen.begin(), seen.end(), basin) != seen.end())
            throw Error("DoubleMark", "two marked rays share a basin");
        seen.push_back(basin);
        bool found = false;
        for (auto& r : diagram.rays)
            if (r.basin == basin && r.j == j) {
                r.marked = true;
                found = true;
            }
        if (!found) throw Error("DegenerateInput", "no such ray to mark");
    }
    diagram.n_marked = static_cast<int>(selections.size());
    return diagram;
}

} // namespace newtonlab
