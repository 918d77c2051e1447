#pragma once

#include <string>

#include <json.hpp>

#include "newtonlab/blaschke.hpp"
#include "newtonlab/channel.hpp"
#include "newtonlab/raster.hpp"
#include "newtonlab/surgery.hpp"

namespace newtonlab {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

inline json to_json(cplx z) { return json{{"im", z.imag()}, {"re", z.real()}}; }

inline cplx complex_from_json(const json& j) {
    return cplx{j.at("re").get<double>(), j.at("im").get<double>()};
}

inline json to_json(const SpherePoint& p) {
    return json{{"im", p.at_infinity ? 0.0 : p.z.imag()},
                {"inf", p.at_infinity},
                {"re", p.at_infinity ? 0.0 : p.z.real()}};
}

inline SpherePoint sphere_from_json(const json& j) {
    if (j.at("inf").get<bool>()) return SpherePoint::infinity();
    return SpherePoint::finite(cplx{j.at("re").get<double>(), j.at("im").get<double>()});
}

inline json to_json(const FixedPointInfo& f) {
    return json{{"class", to_string(f.kind)},
                {"location", to_json(f.location)},
                {"m", f.root_multiplicity},
                {"multiplier", to_json(f.multiplier)},
                {"petals", f.petals}};
}

inline FixedPointInfo fixed_point_from_json(const json& j) {
    FixedPointInfo f;
    f.location = sphere_from_json(j.at("location"));
    f.multiplier = complex_from_json(j.at("multiplier"));
    f.petals = j.at("petals").get<int>();
    f.root_multiplicity = j.at("m").get<int>();
    std::string k = j.at("class").get<std::string>();
    if (k == "superattracting") f.kind = FixedPointKind::superattracting;
    else if (k == "attracting") f.kind = FixedPointKind::attracting;
    else if (k == "repelling") f.kind = FixedPointKind::repelling;
    else f.kind = FixedPointKind::parabolic;
    return f;
}

/// `newtonlab build` payload.
struct BuildReport {
    std::string p, q, num, den;
    int degree = 0, n = 0;
    bool petals_match_degree = true; // germ order at infinity vs deg q
    std::vector<FixedPointInfo> fixed_points;
    std::vector<CriticalPoint> critical_points;

    bool operator==(const BuildReport& o) const {
        if (p != o.p || q != o.q || num != o.num || den != o.den || degree != o.degree ||
            n != o.n || fixed_points.size() != o.fixed_points.size() ||
            critical_points.size() != o.critical_points.size())
            return false;
        for (size_t i = 0; i < fixed_points.size(); ++i) {
            const auto &a = fixed_points[i], &b = o.fixed_points[i];
            if (a.location.at_infinity != b.location.at_infinity || a.location.z != b.location.z ||
                a.multiplier != b.multiplier || a.kind != b.kind || a.petals != b.petals ||
                a.root_multiplicity != b.root_multiplicity)
                return false;
        }
        for (size_t i = 0; i < critical_points.size(); ++i) {
            const auto &a = critical_points[i], &b = o.critical_points[i];
            if (a.location.at_infinity != b.location.at_infinity || a.location.z != b.location.z ||
                a.multiplicity != b.multiplicity)
                return false;
        }
        return true;
    }
};

inline BuildReport make_build_report(const NewtonMapSpec& N, double tol = 1e-10) {
    BuildReport rep;
    rep.p = N.p.to_string();
    rep.q = N.q.to_string();
    rep.num = N.map.num().to_string();
    rep.den = N.map.den().to_string();
    rep.degree = N.d;
    rep.n = N.n;
    rep.fixed_points = fixed_points(N, tol);
    if (N.n >= 1) {
        for (const auto& f : rep.fixed_points)
            if (f.location.at_infinity && f.petals != N.n) rep.petals_match_degree = false;
    }
    if (N.d >= 2) rep.critical_points = critical_points(N, tol);
    return rep;
}

inline json to_json(const BuildReport& rep) {
    json fps = json::array(), crits = json::array();
    for (const auto& f : rep.fixed_points) fps.push_back(to_json(f));
    for (const auto& c : rep.critical_points)
        crits.push_back(json{{"multiplicity", c.multiplicity}, {"point", to_json(c.location)}});
    return json{{"critical_points", crits},
                {"degree", rep.degree},
                {"den", rep.den},
                {"fixed_points", fps},
                {"n", rep.n},
                {"num", rep.num},
                {"p", rep.p},
                {"petals_match_degree", rep.petals_match_degree},
                {"q", rep.q},
                {"version", kVersion}};
}

inline BuildReport build_report_from_json(const json& j) {
    BuildReport rep;
    rep.p = j.at("p").get<std::string>();
    rep.q = j.at("q").get<std::string>();
    rep.num = j.at("num").get<std::string>();
    rep.den = j.at("den").get<std::string>();
    rep.degree = j.at("degree").get<int>();
    rep.n = j.at("n").get<int>();
    rep.petals_match_degree = j.at("petals_match_degree").get<bool>();
    for (const auto& f : j.at("fixed_points")) rep.fixed_points.push_back(fixed_point_from_json(f));
    for (const auto& c : j.at("critical_points"))
        rep.critical_points.push_back({sphere_from_json(c.at("point")),
                                       c.at("multiplicity").get<int>()});
    return rep;
}

inline json to_json(const OrbitOutcome& o) {
    json j{{"type", ""}};
    switch (o.type) {
        case OutcomeType::converged_to:
            j["type"] = "converged_to";
            j["index"] = o.index;
            break;
        case OutcomeType::petal:
            j["type"] = "petal";
            j["index"] = o.index;
            break;
        case OutcomeType::cycle:
            j["type"] = "cycle";
            j["period"] = o.period;
            j["preperiod"] = o.preperiod;
            break;
        case OutcomeType::undecided: j["type"] = "undecided"; break;
    }
    return j;
}

inline json to_json(const OrbitRecord& rec, size_t max_points = 256) {
    json pts = json::array();
    size_t stride = rec.points.size() > max_points ? rec.points.size() / max_points : 1;
    for (size_t i = 0; i < rec.points.size(); i += stride) pts.push_back(to_json(rec.points[i]));
    SpherePoint start = rec.start_at_infinity ? SpherePoint::infinity()
                                              : SpherePoint::finite(rec.start);
    return json{{"outcome", to_json(rec.outcome)},
                {"points", pts},
                {"start", to_json(start)},
                {"steps", rec.steps},
                {"version", kVersion}};
}

inline json to_json(const PCMReport& rep) {
    json relations = json::array();
    for (const auto& r : rep.relations)
        relations.push_back(json{{"critical_point", to_json(r.critical_point)},
                                 {"entry", r.entry},
                                 {"landing", r.landing},
                                 {"target", to_json(r.target)},
                                 {"verdict", to_string(r.verdict)}});
    json classes = json::array();
    for (const auto& c : rep.orbit_classes)
        classes.push_back(json{{"critical_point", to_json(c.critical_point)},
                               {"finite", c.finite},
                               {"multiplicity", c.multiplicity},
                               {"outcome", to_json(c.outcome)}});
    return json{{"critical_orbits", classes},
                {"finite_orbits", rep.finite_orbits},
                {"inconclusive_orbits", rep.inconclusive_orbits},
                {"overall", to_string(rep.overall)},
                {"petal_critical_counts", rep.petal_distinct_criticals},
                {"reasons", rep.reasons},
                {"relations", relations},
                {"version", kVersion}};
}

struct BlaschkeReport {
    int k = 2;
    double b = 0, alpha = 0, multiplier = 0;
    TripleRootReport triple_root;

    bool operator==(const BlaschkeReport& o) const {
        return k == o.k && b == o.b && alpha == o.alpha && multiplier == o.multiplier &&
               triple_root.pass == o.triple_root.pass &&
               triple_root.remainder_norm == o.triple_root.remainder_norm;
    }
};

inline json to_json(const BlaschkeReport& rep) {
    return json{{"alpha", rep.alpha},
                {"b", rep.b},
                {"k", rep.k},
                {"multiplier", rep.multiplier},
                {"triple_root_check",
                 json{{"pass", rep.triple_root.pass},
                      {"remainder_norm", rep.triple_root.remainder_norm},
                      {"second_derivative_residual", rep.triple_root.second_derivative_residual}}},
                {"version", kVersion}};
}

inline BlaschkeReport blaschke_report_from_json(const json& j) {
    BlaschkeReport rep;
    rep.k = j.at("k").get<int>();
    rep.b = j.at("b").get<double>();
    rep.alpha = j.at("alpha").get<double>();
    rep.multiplier = j.at("multiplier").get<double>();
    rep.triple_root.pass = j.at("triple_root_check").at("pass").get<bool>();
    rep.triple_root.remainder_norm =
        j.at("triple_root_check").at("remainder_norm").get<double>();
    rep.triple_root.second_derivative_residual =
        j.at("triple_root_check").at("second_derivative_residual").get<double>();
    return rep;
}

inline json to_json(const TailFit& fit) {
    return json{{"exponential", fit.exponential},
                {"intercept", fit.intercept},
                {"pow_r2", fit.pow_r2},
                {"pow_slope", fit.pow_slope},
                {"r2", fit.r2},
                {"slope", fit.slope}};
}

inline json to_json(const AreaTailReport& rep) {
    json entries = json::array();
    for (const auto& e : rep.entries)
        entries.push_back(json{{"K0", e.K0}, {"area", e.area}, {"cells", e.cells}});
    return json{{"entries", entries}, {"fit", to_json(rep.fit)}};
}

inline json to_json(const ContinuityReport& rep) {
    return json{{"fixed_point_residual", rep.fixed_point_residual},
                {"inner_jump", rep.inner_jump},
                {"max_annulus_K", rep.max_annulus_K},
                {"max_holomorphic_K", rep.max_holomorphic_K},
                {"outer_jump", rep.outer_jump}};
}

inline json to_json(const NewtonAreaReport& rep) {
    json sectors = json::array();
    for (const auto& s : rep.sectors)
        sectors.push_back(json{{"area", s.area},
                               {"branches", s.branches},
                               {"degree_flag", s.degree_flag},
                               {"generation", s.generation},
                               {"local_degree", s.local_degree},
                               {"vertex", to_json(s.vertex)}});
    return json{{"fit", to_json(rep.fit)},
                {"generation_area", rep.generation_area},
                {"generation_decay", rep.generation_decay},
                {"growth_constant", rep.growth_constant},
                {"m_values", rep.m_values},
                {"rho", rep.rho},
                {"sectors", sectors},
                {"slope_per_m", rep.slope_per_m},
                {"tail_areas", rep.tail_areas},
                {"total_area", rep.total_area}};
}

inline json to_json(const SurgeryPipelineReport& rep) {
    json basins = json::array();
    for (const auto& b : rep.basins)
        basins.push_back(json{{"access_count", b.access_count},
                              {"alpha", b.alpha},
                              {"b", b.b},
                              {"chi_tail", to_json(b.chi_tail)},
                              {"conjugacy_residual", b.conjugacy_residual},
                              {"continuity", to_json(b.continuity)},
                              {"k", b.k},
                              {"pass", b.pass},
                              {"profile_monotone", b.profile_monotone},
                              {"profile_ratio", b.profile_ratio},
                              {"r", b.r},
                              {"root", to_json(b.root)},
                              {"root_index", b.root_index}});
    return json{{"area_condition", to_json(rep.area)},
                {"basins", basins},
                {"david_integration", rep.david_integration},
                {"markings", rep.markings},
                {"pass", rep.pass},
                {"pcf_plausible", rep.pcf_plausible},
                {"version", kVersion}};
}

inline json to_json(const ChannelDiagram& diagram, const std::vector<AccessReport>& accesses) {
    json rays = json::array();
    for (const auto& r : diagram.rays) {
        json poly = json::array();
        for (cplx z : r.polyline) poly.push_back(to_json(z));
        rays.push_back(
            json{{"basin", r.basin}, {"j", r.j}, {"marked", r.marked}, {"polyline", poly}});
    }
    json acc = json::array();
    for (const auto& a : accesses)
        acc.push_back(json{{"count", a.count},
                           {"dynamical_index", a.dynamical_index},
                           {"petal_basin", a.petal_basin}});
    return json{{"access_counts", acc}, {"n_marked", diagram.n_marked}, {"rays", rays},
                {"version", kVersion}};
}

inline json to_json(const BasinRaster& raster, int n_roots, int n_petals) {
    std::vector<long> root_hist(std::max(1, n_roots), 0);
    std::vector<long> petal_hist(std::max(1, n_petals), 0);
    long cycles = 0, undecided = 0;
    for (int32_t label : raster.labels) {
        switch (BasinRaster::kind_of(label)) {
            case PixelKind::root: root_hist[BasinRaster::index_of(label) % root_hist.size()] += 1; break;
            case PixelKind::petal:
                petal_hist[BasinRaster::index_of(label) % petal_hist.size()] += 1;
                break;
            case PixelKind::cycle: ++cycles; break;
            case PixelKind::undecided: ++undecided; break;
        }
    }
    return json{{"cycle_pixels", cycles},
                {"height", raster.height},
                {"petal_pixels", petal_hist},
                {"root_pixels", root_hist},
                {"undecided_pixels", undecided},
                {"version", kVersion},
                {"viewport", json{{"x0", raster.viewport.x0},
                                  {"x1", raster.viewport.x1},
                                  {"y0", raster.viewport.y0},
                                  {"y1", raster.viewport.y1}}},
                {"width", raster.width}};
}

inline std::string serialize(const json& j) { return j.dump(2) + "\n"; }

} // namespace newtonlab
