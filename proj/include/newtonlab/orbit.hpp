#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "newtonlab/newton.hpp"

namespace newtonlab {

enum class OutcomeType { converged_to, petal, cycle, undecided };

struct OrbitOutcome {
    OutcomeType type = OutcomeType::undecided;
    int index = -1;    // root index or petal direction index
    int period = 0;    // cycle only
    int preperiod = 0; // cycle only
};

struct OrbitRecord {
    cplx start{0, 0};
    bool start_at_infinity = false;
    std::vector<SpherePoint> points;
    OrbitOutcome outcome;
    int steps = 0;
};

struct OrbitOptions {
    int max_steps = 10000;
    double eps_conv = 1e-9;   // spherical convergence radius
    double eps_cycle = 1e-9;  // cycle detection tolerance
    double petal_radius = 0.25;
    int petal_confirm = 3;    // consecutive in-petal hits before classifying
};

/// Cached dynamical data for orbit work: root targets (sorted, stable
/// indices), the chart at infinity, and the parabolic germ when deg q >= 1.
struct Dynamics {
    NewtonMapSpec N;
    RatMap chart;
    std::vector<cplx> roots;      // finite fixed points = roots of p
    int nu = 0;                   // petal count (germ order), 0 when q constant
    cplx germ_a{0, 0};            // leading germ coefficient a_nu
    std::vector<cplx> petal_dirs; // unit attracting directions in the chart
    OrbitOptions opts;
};

/// The n attracting directions v with a_nu v^nu real negative.
inline std::vector<cplx> petal_directions(const NewtonMapSpec& N, double tol = 1e-8) {
    cplx lambda = multiplier_at(N, SpherePoint::infinity());
    if (std::abs(lambda - cplx{1, 0}) > tol)
        throw Error("NotParabolic", "multiplier at infinity is not 1");
    auto [nu, a] = detail::germ_at_infinity(N.map);
    std::vector<cplx> dirs(nu);
    double base = (kPi - std::arg(a));
    for (int j = 0; j < nu; ++j) {
        double ang = (base + 2.0 * kPi * j) / nu;
        dirs[j] = cplx{std::cos(ang), std::sin(ang)};
    }
    return dirs;
}

inline Dynamics make_dynamics(const NewtonMapSpec& N, OrbitOptions opts = {}) {
    Dynamics dyn{N, N.map.chart_at_infinity(), {}, 0, cplx{0, 0}, {}, opts};
    auto fps = fixed_points(N);
    for (const auto& f : fps)
        if (!f.location.at_infinity) dyn.roots.push_back(f.location.z);
    std::sort(dyn.roots.begin(), dyn.roots.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    if (N.n >= 1) {
        auto [nu, a] = detail::germ_at_infinity(N.map);
        dyn.nu = nu;
        dyn.germ_a = a;
        dyn.petal_dirs = petal_directions(N);
    }
    return dyn;
}

/// One application of the map on the sphere; large |z| and infinity are
/// routed through the chart w = 1/z.
inline SpherePoint dyn_step(const Dynamics& dyn, const SpherePoint& pt) {
    if (!pt.at_infinity && std::abs(pt.z) <= 1.0) return dyn.N.map.eval_sphere(pt.z);
    cplx w = pt.at_infinity ? cplx{0, 0} : cplx{1, 0} / pt.z;
    SpherePoint wv = dyn.chart.eval_sphere(w);
    if (wv.at_infinity) return SpherePoint::finite(cplx{0, 0});
    if (wv.z == cplx{0, 0}) return SpherePoint::infinity();
    return SpherePoint::finite(cplx{1, 0} / wv.z);
}

/// Leau-Fatou sector test in the chart; returns the petal index or -1.
inline int petal_sector_index(const Dynamics& dyn, const SpherePoint& pt) {
    if (dyn.nu < 1 || pt.at_infinity) return -1;
    if (std::abs(pt.z) <= 1.0) return -1;
    cplx w = cplx{1, 0} / pt.z;
    if (std::abs(w) >= dyn.opts.petal_radius || w == cplx{0, 0}) return -1;
    cplx s = dyn.germ_a * std::pow(w, dyn.nu);
    if (s.real() >= 0.0) return -1; // arg within pi/2 of pi means Re < 0
    int best = 0;
    double bestd = 1e9;
    for (size_t j = 0; j < dyn.petal_dirs.size(); ++j) {
        double d = std::abs(std::arg(w / dyn.petal_dirs[j]));
        if (d < bestd) {
            bestd = d;
            best = static_cast<int>(j);
        }
    }
    return best;
}

inline OrbitRecord iterate(const Dynamics& dyn, const SpherePoint& z0) {
    OrbitRecord rec;
    rec.start = z0.z;
    rec.start_at_infinity = z0.at_infinity;
    rec.points.push_back(z0);

    int petal_run = 0, petal_j = -1;
    for (int k = 0; k <= dyn.opts.max_steps; ++k) {
        const SpherePoint& cur = rec.points.back();

        // rule 1: root convergence
        if (!cur.at_infinity) {
            for (size_t i = 0; i < dyn.roots.size(); ++i) {
                if (spherical_distance(cur, dyn.roots[i]) < dyn.opts.eps_conv) {
                    rec.outcome = {OutcomeType::converged_to, static_cast<int>(i), 0, 0};
                    rec.steps = static_cast<int>(rec.points.size()) - 1;
                    return rec;
                }
            }
        }
        // rule 2: petal convergence (consecutive confirms guard stray passes)
        int j = petal_sector_index(dyn, cur);
        if (j >= 0 && (petal_j == j || petal_run == 0)) {
            petal_j = j;
            if (++petal_run >= dyn.opts.petal_confirm) {
                rec.outcome = {OutcomeType::petal, j, 0, 0};
                rec.steps = static_cast<int>(rec.points.size()) - 1;
                return rec;
            }
        } else {
            petal_run = 0;
            petal_j = -1;
        }

        if (k == dyn.opts.max_steps) break;
        SpherePoint next = dyn_step(dyn, cur);
        rec.points.push_back(next);
        // stationary orbit: stop early, the cycle scan below classifies it
        if (spherical_distance(next, cur) < 1e-14 && k >= 1) break;
    }
    rec.steps = static_cast<int>(rec.points.size()) - 1;

    // rule 3: cycle detection (tortoise-hare over the stored orbit)
    const auto& pts = rec.points;
    int half = static_cast<int>(pts.size() - 1) / 2;
    for (int k = 1; k <= half; ++k) {
        if (spherical_distance(pts[k], pts[2 * k]) < dyn.opts.eps_cycle) {
            int period = 0;
            for (int lam = 1; lam <= k; ++lam)
                if (spherical_distance(pts[k], pts[k + lam]) < dyn.opts.eps_cycle) {
                    period = lam;
                    break;
                }
            if (period == 0) continue;
            int pre = 0;
            while (pre + period < static_cast<int>(pts.size()) &&
                   spherical_distance(pts[pre], pts[pre + period]) >= dyn.opts.eps_cycle)
                ++pre;
            rec.outcome = {OutcomeType::cycle, -1, period, pre};
            return rec;
        }
    }
    rec.outcome = {OutcomeType::undecided, -1, 0, 0};
    return rec;
}

inline OrbitRecord iterate(const NewtonMapSpec& N, cplx z0, int max_steps = 10000,
                           double eps_conv = 1e-9) {
    OrbitOptions opts;
    opts.max_steps = max_steps;
    opts.eps_conv = eps_conv;
    return iterate(make_dynamics(N, opts), SpherePoint::finite(z0));
}

/// Immediate-basin membership surrogate for root basins: the orbit converges
/// to the root and an 8-point straight-segment probe to the root does too.
inline bool member_root_basin(const Dynamics& dyn, cplx z, int root_index) {
    OrbitRecord rec = iterate(dyn, SpherePoint::finite(z));
    if (rec.outcome.type != OutcomeType::converged_to || rec.outcome.index != root_index)
        return false;
    cplx xi = dyn.roots[root_index];
    for (int s = 1; s <= 8; ++s) {
        cplx probe = z + (xi - z) * (double(s) / 9.0);
        OrbitRecord pr = iterate(dyn, SpherePoint::finite(probe));
        if (pr.outcome.type != OutcomeType::converged_to || pr.outcome.index != root_index)
            return false;
    }
    return true;
}

/// Immediate-basin membership surrogate for petals: probe along the chart
/// segment from w(z) to a deep petal point in direction v_j.
inline bool member_petal_basin(const Dynamics& dyn, cplx z, int petal_index) {
    if (dyn.nu < 1 || petal_index < 0 || petal_index >= dyn.nu) return false;
    OrbitRecord rec = iterate(dyn, SpherePoint::finite(z));
    if (rec.outcome.type != OutcomeType::petal || rec.outcome.index != petal_index)
        return false;
    if (z == cplx{0, 0}) return false;
    cplx w0 = cplx{1, 0} / z;
    cplx w1 = dyn.petal_dirs[petal_index] * (dyn.opts.petal_radius * 0.5);
    for (int s = 1; s <= 8; ++s) {
        cplx w = w0 + (w1 - w0) * (double(s) / 9.0);
        if (w == cplx{0, 0}) continue;
        OrbitRecord pr = iterate(dyn, SpherePoint::finite(cplx{1, 0} / w));
        if (pr.outcome.type != OutcomeType::petal || pr.outcome.index != petal_index)
            return false;
    }
    return true;
}

/// Smallest k with basin_test(points[k]); no qualifying k is Inconclusive.
inline std::optional<int> entry_time(const OrbitRecord& orbit,
                                     const std::function<bool(const SpherePoint&)>& basin_test) {
    if (orbit.outcome.type != OutcomeType::converged_to &&
        orbit.outcome.type != OutcomeType::petal)
        return std::nullopt;
    for (size_t k = 0; k < orbit.points.size(); ++k)
        if (basin_test(orbit.points[k])) return static_cast<int>(k);
    return std::nullopt;
}

struct CriticalOrbit {
    cplx critical_point{0, 0};
    int multiplicity = 1;
    OrbitRecord orbit;
    std::optional<std::pair<cplx, int>> lands_on_critical; // (target, entry iterate)
};

inline std::vector<CriticalOrbit> postcritical_analysis(const Dynamics& dyn) {
    std::vector<CriticalOrbit> out;
    auto crits = critical_points(dyn.N);
    for (const auto& c : crits) {
        if (c.location.at_infinity) continue; // infinity is fixed, orbit trivial
        CriticalOrbit co;
        co.critical_point = c.location.z;
        co.multiplicity = c.multiplicity;
        co.orbit = iterate(dyn, c.location);
        for (size_t k = 1; k < co.orbit.points.size(); ++k) {
            if (co.orbit.points[k].at_infinity) continue;
            bool hit = false;
            for (const auto& other : crits) {
                if (other.location.at_infinity) continue;
                if (spherical_distance(co.orbit.points[k], other.location.z) <
                    dyn.opts.eps_conv) {
                    co.lands_on_critical = {other.location.z, static_cast<int>(k)};
                    hit = true;
                    break;
                }
            }
            if (hit) break;
        }
        out.push_back(std::move(co));
    }
    return out;
}

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct RelationVerdict {
    cplx critical_point;
    cplx target;
    int entry = -1;   // basin entry time m (-1: unknown)
    int landing = -1; // iterate where the orbit reaches the target critical point
    Verdict verdict = Verdict::inconclusive;
};

/// Minimal critical orbit relations: a captured critical point must land on
/// the immediate-basin critical point exactly at its basin entry time.
inline std::vector<RelationVerdict> check_minimal_relations(
    const Dynamics& dyn, const std::vector<CriticalOrbit>& orbits) {
    // collect immediate-basin critical points (petal centers)
    std::vector<std::pair<cplx, int>> petal_crits; // (point, petal index)
    for (const auto& co : orbits)
        for (int j = 0; j < dyn.nu; ++j)
            if (member_petal_basin(dyn, co.critical_point, j))
                petal_crits.push_back({co.critical_point, j});

    std::vector<RelationVerdict> out;
    for (const auto& co : orbits) {
        bool is_immediate = false;
        for (const auto& [pt, j] : petal_crits)
            if (std::abs(pt - co.critical_point) < 1e-12) is_immediate = true;
        if (is_immediate) {
            out.push_back({co.critical_point, co.critical_point, 0, 0, Verdict::pass});
            continue;
        }
        if (co.orbit.outcome.type != OutcomeType::petal) continue; // not a parabolic capture
        if (!co.lands_on_critical) {
            out.push_back({co.critical_point, cplx{0, 0}, -1, -1, Verdict::inconclusive});
            continue;
        }
        auto [target, landing] = *co.lands_on_critical;
        int target_petal = -1;
        for (const auto& [pt, j] : petal_crits)
            if (std::abs(pt - target) < 1e-9) target_petal = j;
        if (target_petal < 0) {
            out.push_back({co.critical_point, target, -1, landing, Verdict::inconclusive});
            continue;
        }
        auto m = entry_time(co.orbit, [&](const SpherePoint& p) {
            return !p.at_infinity && member_petal_basin(dyn, p.z, target_petal);
        });
        if (!m) {
            out.push_back({co.critical_point, target, -1, landing, Verdict::inconclusive});
            continue;
        }
        Verdict v;
        if (landing == *m)
            v = Verdict::pass;
        else if (landing > *m)
            v = Verdict::fail;
        else
            v = Verdict::inconclusive;
        out.push_back({co.critical_point, target, *m, landing, v});
    }
    return out;
}

struct CriticalOrbitClass {
    cplx critical_point;
    int multiplicity = 1;
    OrbitOutcome outcome;
    bool finite = false; // lands or is eventually periodic within the budget
};

struct PCMReport {
    std::vector<int> petal_distinct_criticals; // distinct critical points per petal
    std::vector<CriticalOrbitClass> orbit_classes;
    std::vector<RelationVerdict> relations;
    int finite_orbits = 0;
    int inconclusive_orbits = 0;
    Verdict overall = Verdict::inconclusive;
    std::vector<std::string> reasons;
};

/// Heuristic postcritical-minimality certificate; three-valued on purpose.
inline PCMReport pcm_report(const NewtonMapSpec& N, OrbitOptions opts = {}) {
    if (N.n < 1)
        throw Error("DegenerateInput", "pcm_report requires deg q >= 1");
    Dynamics dyn = make_dynamics(N, opts);
    PCMReport rep;
    auto orbits = postcritical_analysis(dyn);

    // clause (b) first half: exactly one critical point per immediate basin of infinity
    rep.petal_distinct_criticals.assign(dyn.nu, 0);
    for (int j = 0; j < dyn.nu; ++j) {
        for (const auto& co : orbits)
            if (member_petal_basin(dyn, co.critical_point, j))
                rep.petal_distinct_criticals[j] += 1;
    }
    bool petal_ok = true;
    for (int j = 0; j < dyn.nu; ++j) {
        if (rep.petal_distinct_criticals[j] != 1) {
            petal_ok = false;
            rep.reasons.push_back("petal " + std::to_string(j) + " holds " +
                                  std::to_string(rep.petal_distinct_criticals[j]) +
                                  " distinct critical points (want 1)");
        }
    }

    // clause (a): orbits in the Julia set / superattracting basins must be
    // finite. Numerically: eventually periodic, or landing on a root EXACTLY.
    // Exact landings drop from far away to machine distance in one step;
    // plain (quadratic) convergence cannot jump past [1e-13, 1e-5] like that.
    bool any_inconclusive = false;
    const double eps_land = 1e-13, gap_land = 1e-5;
    for (const auto& co : orbits) {
        const auto& o = co.orbit;
        CriticalOrbitClass cls{co.critical_point, co.multiplicity, o.outcome, false};
        if (o.outcome.type == OutcomeType::petal) { // parabolic side handled in (b)
            rep.orbit_classes.push_back(cls);
            continue;
        }
        if (o.outcome.type == OutcomeType::cycle) {
            cls.finite = true;
            rep.finite_orbits += 1;
            rep.orbit_classes.push_back(cls);
            continue;
        }
        if (o.outcome.type == OutcomeType::converged_to) {
            cplx root = dyn.roots[o.outcome.index];
            for (size_t k = 0; k < o.points.size(); ++k) {
                if (spherical_distance(o.points[k], root) >= eps_land) continue;
                if (k == 0 || spherical_distance(o.points[k - 1], root) > gap_land) {
                    cls.finite = true;
                    break;
                }
            }
            if (cls.finite) {
                rep.finite_orbits += 1;
            } else {
                any_inconclusive = true;
                rep.inconclusive_orbits += 1;
                rep.reasons.push_back(
                    "critical orbit converges without numerically-exact landing");
            }
            rep.orbit_classes.push_back(cls);
            continue;
        }
        any_inconclusive = true;
        rep.inconclusive_orbits += 1;
        rep.reasons.push_back("critical orbit undecided within step budget");
        rep.orbit_classes.push_back(cls);
    }

    // clause (b) second half
    rep.relations = check_minimal_relations(dyn, orbits);
    bool any_fail = !petal_ok;
    for (const auto& r : rep.relations) {
        if (r.verdict == Verdict::fail) {
            any_fail = true;
            rep.reasons.push_back("minimal critical orbit relation violated");
        }
        if (r.verdict == Verdict::inconclusive) any_inconclusive = true;
    }

    rep.overall = any_fail ? Verdict::fail
                           : (any_inconclusive ? Verdict::inconclusive : Verdict::pass);
    return rep;
}

struct CenterResult {
    cplx center;
    int preperiod = 0;
};

/// Pulls a basin center back `anchors.size()` times; at each step the
/// preimage nearest to the corresponding anchor point is chosen.
/// Equidistant candidates within tol are Ambiguous.
inline cplx pullback_center(const NewtonMapSpec& N, cplx center,
                            const std::vector<cplx>& anchors, double tol = 1e-9) {
    cplx cur = center;
    for (auto it = anchors.rbegin(); it != anchors.rend(); ++it) {
        ComplexPoly pre = N.map.num() - N.map.den().scaled(cur);
        RootResult rr = poly_roots(pre);
        if (rr.roots.empty()) throw Error("DegenerateInput", "no preimage found");
        std::vector<std::pair<double, cplx>> byd;
        for (const auto& r : rr.roots) byd.push_back({std::abs(r.value - *it), r.value});
        std::sort(byd.begin(), byd.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        if (byd.size() >= 2 && byd[1].first - byd[0].first < tol * std::max(1.0, byd[0].first))
            throw Error("Ambiguous", "two preimages equidistant from the component anchor");
        cur = byd[0].second;
    }
    return cur;
}

/// Center of the Fatou component holding `sample`: the root, the petal's
/// unique critical point, or their pullback for strictly preperiodic
/// components (preperiod from the immediate-basin entry time surrogate).
inline CenterResult find_centers(const NewtonMapSpec& N, cplx sample, OrbitOptions opts = {}) {
    Dynamics dyn = make_dynamics(N, opts);
    OrbitRecord rec = iterate(dyn, SpherePoint::finite(sample));

    cplx base_center;
    std::function<bool(const SpherePoint&)> member;
    if (rec.outcome.type == OutcomeType::converged_to) {
        base_center = dyn.roots[rec.outcome.index];
        int idx = rec.outcome.index;
        member = [&dyn, idx](const SpherePoint& p) {
            return !p.at_infinity && member_root_basin(dyn, p.z, idx);
        };
    } else if (rec.outcome.type == OutcomeType::petal) {
        int j = rec.outcome.index;
        auto orbits = postcritical_analysis(dyn);
        std::vector<cplx> in_petal;
        for (const auto& co : orbits)
            if (member_petal_basin(dyn, co.critical_point, j))
                in_petal.push_back(co.critical_point);
        if (in_petal.size() != 1)
            throw Error("Ambiguous", "petal lacks a unique critical point");
        base_center = in_petal[0];
        member = [&dyn, j](const SpherePoint& p) {
            return !p.at_infinity && member_petal_basin(dyn, p.z, j);
        };
    } else {
        throw Error("Inconclusive", "sample point's component is unclassified");
    }

    auto m = entry_time(rec, member);
    if (!m) throw Error("Inconclusive", "no basin entry found within the step budget");
    if (*m == 0) return {base_center, 0};

    std::vector<cplx> anchors;
    for (int k = 0; k < *m; ++k) anchors.push_back(rec.points[k].z);
    return {pullback_center(N, base_center, anchors), *m};
}

} // namespace newtonlab
