#include <catch2/catch.hpp>

#include <random>

#include "newtonlab/surgery.hpp"

using namespace newtonlab;

namespace {

NewtonMapSpec cubic_unity() {
    return build_newton_map(ComplexPoly{{cplx{-1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{1, 0}}},
                            ComplexPoly::zero());
}

} // namespace

TEST_CASE("interpolation boundary values are exact") {
    // b = 0: h is the identity everywhere on the annulus
    AnnulusInterpolation h0 = interpolate_h(2, 0.0, 0.8);
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> urad(0.64, 0.8), uang(0.0, 2 * kPi);
    for (int i = 0; i < 50; ++i) {
        double t = uang(rng);
        cplx z = urad(rng) * cplx{std::cos(t), std::sin(t)};
        REQUIRE(std::abs(h0.apply(z) - z) < 1e-13);
    }

    AnnulusInterpolation h = interpolate_h(2, 0.2, 0.8);
    MoebiusTransform mb = moebius_mb(0.2);
    double worst_out = 0, worst_in = 0;
    for (int j = 0; j < 4096; ++j) {
        double th = 2.0 * kPi * j / 4096;
        cplx dir{std::cos(th), std::sin(th)};
        worst_out = std::max(worst_out, std::abs(h.apply(0.8 * dir) - 0.8 * dir));
        worst_in = std::max(worst_in, std::abs(h.apply(0.64 * dir) - mb.apply(0.64 * dir)));
    }
    REQUIRE(worst_out < 1e-12); // boundary sampling oracle
    REQUIRE(worst_in < 1e-12);

    REQUIRE_THROWS_AS(interpolate_h(2, 0.2, 0.25), Error); // r <= alpha
    REQUIRE_THROWS_AS(interpolate_h(2, 0.2, 1.1), Error);
}

TEST_CASE("model map g: gluing, fixed point, holomorphic regions") {
    // the canonical parameters
    DiskSurgeryModel g = build_model_g(2, 0.2, 0.8);
    REQUIRE(std::abs(g.apply(cplx{0.9, 0}) - cplx{0.81, 0}) < 1e-15); // z^k outside D_r

    cplx fp = g.fixed_point();
    double alpha = 2.0 - std::sqrt(3.0);
    REQUIRE(std::abs(fp - cplx{alpha * alpha, 0}) < 1e-12); // M_b^{-1}(alpha) = alpha^2
    REQUIRE(std::abs(g.apply(fp) - fp) < 1e-10);

    ContinuityReport rep = model_continuity(g);
    REQUIRE(rep.outer_jump < 1e-9);
    REQUIRE(rep.inner_jump < 1e-9);
    REQUIRE(rep.fixed_point_residual < 1e-10);
    REQUIRE(rep.max_holomorphic_K - 1.0 < 1e-6);
    REQUIRE(std::isfinite(rep.max_annulus_K));
    REQUIRE(rep.max_annulus_K >= 1.0);

    // critical point at -b with local degree k (b < r^k here)
    cplx cb{-0.2, 0};
    cplx gcb = g.apply(cb);
    for (double eps : {1e-4, 1e-5}) {
        // local degree 2: values at cb + eps and cb - eps agree to O(eps^2)
        cplx vp = g.apply(cb + cplx{eps, 0}), vm = g.apply(cb - cplx{eps, 0});
        REQUIRE(std::abs(vp - vm) < 10 * eps * eps);
        REQUIRE(std::abs(vp - gcb) > eps * eps / 10); // but not constant
    }
}

TEST_CASE("g-continuity across the full parameter matrix") {
    for (int k : {2, 3, 4}) {
        BlaschkeModel bm = solve_b_for_multiplier(k, 0.5);
        for (double r : {0.7, 0.8, 0.9}) {
            DiskSurgeryModel g = build_model_g(k, bm.b, r);
            ContinuityReport rep = model_continuity(g);
            REQUIRE(rep.outer_jump < 1e-9);
            REQUIRE(rep.inner_jump < 1e-9);
            REQUIRE(rep.fixed_point_residual < 1e-10);
            REQUIRE(rep.max_holomorphic_K - 1.0 < 1e-6);
        }
    }
}

TEST_CASE("numerical dilatation") {
    auto square = [](cplx z) { return z * z; };
    REQUIRE(std::abs(numerical_dilatation(square, cplx{0.5, 0.3}, 1e-5) - 1.0) < 1e-8);

    auto stretch = [](cplx z) { return cplx{2 * z.real(), z.imag()}; };
    REQUIRE(std::abs(numerical_dilatation(stretch, cplx{0.1, -0.4}, 1e-5) - 2.0) < 1e-8);

    // h mid-annulus: finite K > 1, stable under delta halving to 1%
    AnnulusInterpolation h = interpolate_h(2, 0.2, 0.8);
    auto hf = [&h](cplx z) { return h.apply(z); };
    cplx mid = 0.72 * cplx{std::cos(1.3), std::sin(1.3)};
    double K1 = numerical_dilatation(hf, mid, 1e-5 * 0.72);
    double K2 = numerical_dilatation(hf, mid, 0.5e-5 * 0.72);
    REQUIRE(K1 > 1.0);
    REQUIRE(std::abs(K1 - K2) / K1 < 0.01); // Richardson-style refinement oracle

    // orientation-reversing input is rejected
    auto mirror = [](cplx z) { return std::conj(z); };
    REQUIRE_THROWS_AS(numerical_dilatation(mirror, cplx{0.2, 0.2}, 1e-5), Error);
}

TEST_CASE("omega map and the parabolic model") {
    // algebraic identity omega(f(z)) = g(omega(z))
    cplx w = omega_map(2.0, cplx{0.1, 0});
    REQUIRE(std::abs(w - cplx{-0.3010299957, 0}) < 1e-9);
    cplx gw = parabolic_model(w);
    REQUIRE(std::abs(gw - omega_map(2.0, cplx{0.2, 0})) < 1e-14);
    REQUIRE(std::abs(gw - cplx{-0.4306765581, 0}) < 1e-9);

    // conjugacy on sector-complement samples
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> um(1.0, 20.0), ua(-0.7, 0.7);
    for (double lambda : {1.5, 2.0, 3.0}) {
        double worst = 0;
        for (int i = 0; i < 1000; ++i) {
            double ang = ua(rng) * (kPi / 4.0); // inside the cusp complement
            cplx z = std::pow(lambda, -um(rng)) * cplx{std::cos(ang), std::sin(ang)};
            worst = std::max(worst,
                             std::abs(omega_map(lambda, lambda * z) -
                                      parabolic_model(omega_map(lambda, z))));
        }
        REQUIRE(worst < 1e-12);
    }

    // |omega| blows up toward |z| = 1 (vertex behavior)
    double prev_mag = 0;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        double mag = std::abs(omega_map(2.0, cplx{1.0 - eps, eps / 10}));
        REQUIRE(mag > prev_mag);
        prev_mag = mag;
    }
    REQUIRE(prev_mag > 1e3);

    // r_m = |omega(lambda^-m e^(i theta))| tracks 1/m
    for (int m : {10, 50, 200}) {
        double rm = std::abs(
            omega_map(2.0, std::pow(2.0, -m) * cplx{std::cos(kPi / 4), std::sin(kPi / 4)}));
        REQUIRE(m * rm > 0.9);
        REQUIRE(m * rm < 1.1);
    }

    REQUIRE_THROWS_AS(omega_map(2.0, cplx{0, 0}), Error);
    REQUIRE_THROWS_AS(omega_map(2.0, cplx{1, 0}), Error);
    REQUIRE_THROWS_AS(omega_map(2.0, cplx{1.7, 0}), Error);
}

TEST_CASE("annulus dilatation has no m-growth (contrast case)") {
    // the g-model annulus carries a bounded K, unlike the chi sector whose
    // K grows linearly with the quadrilateral index
    AnnulusInterpolation h = interpolate_h(2, 0.2, 0.8);
    auto hf = [&h](cplx z) { return h.apply(z); };
    double lo = 1e300, hi = 0;
    for (int band = 0; band < 4; ++band) {
        double r = 0.65 + 0.03 * band; // radial bands of A0 = [0.64, 0.8]
        double band_max = 0;
        for (int j = 0; j < 32; ++j) {
            double th = 2.0 * kPi * (j + 0.5) / 32;
            band_max = std::max(band_max,
                                numerical_dilatation(hf, r * cplx{std::cos(th), std::sin(th)},
                                                     1e-5 * r));
        }
        lo = std::min(lo, band_max);
        hi = std::max(hi, band_max);
    }
    REQUIRE(hi / lo < 3.0);
    REQUIRE(hi < 50.0);
}

TEST_CASE("chi extension: boundary agreement and dilatation growth") {
    SectorModel sec{2.0, kPi / 4.0, 5};

    // exact agreement with omega on the arg = theta ray
    for (int i = 1; i <= 40; ++i) {
        double rho = std::pow(2.0, -(5.0 + 0.5 * i));
        cplx z = rho * cplx{std::cos(sec.theta), std::sin(sec.theta)};
        REQUIRE(std::abs(chi_extension(sec, z) - omega_map(2.0, z)) < 1e-13);
    }

    // midline value: modulus of the boundary values, circular-midpoint angle
    cplx zm = std::pow(2.0, -8) * cplx{std::cos(kPi), std::sin(kPi)};
    cplx cm = chi_extension(sec, zm);
    double s = std::log(std::abs(zm));
    cplx wp = std::log(2.0) / cplx{s, sec.theta};
    REQUIRE(std::isfinite(std::abs(cm)));
    REQUIRE(std::abs(std::abs(cm) - std::abs(wp)) < 1e-14);
    REQUIRE(std::abs(std::arg(cm)) < 1e-12); // halfway between the two boundary args

    REQUIRE_THROWS_AS(chi_extension(sec, cplx{0.01, 0.001}), Error); // outside angles

    // K on Q_2m / K on Q_m tracks the linear growth
    auto prof = dilatation_profile(sec, 5, 160);
    double prev = 0, lo = 1e300, hi = 0;
    for (const auto& e : prof) {
        REQUIRE(e.max_K >= prev); // monotone nondecreasing
        prev = e.max_K;
        if (e.m <= 100) {
            lo = std::min(lo, e.max_K / e.m);
            hi = std::max(hi, e.max_K / e.m);
        }
    }
    REQUIRE(hi / lo <= 10.0);
    auto K_at = [&](int m) {
        for (const auto& e : prof)
            if (e.m == m) return e.max_K;
        return 0.0;
    };
    for (int m : {20, 40, 80}) {
        double ratio = K_at(2 * m) / K_at(m);
        REQUIRE(ratio > 1.5);
        REQUIRE(ratio < 2.5);
    }
}

TEST_CASE("area tail: chi field decays exponentially, control field does not") {
    SectorModel sec{2.0, kPi / 4.0, 5};
    DilatationField field = make_chi_field(sec, 512);

    auto prof = dilatation_profile(sec, 5, 20);
    double c = 0;
    for (const auto& e : prof) c += e.median_K / e.m;
    c /= prof.size();

    std::vector<double> thr;
    for (int m = 6; m <= 12; ++m) thr.push_back(c * m);
    AreaTailReport rep = area_tail(field, thr);
    REQUIRE(rep.fit.slope < 0);
    REQUIRE(rep.fit.r2 >= 0.9);
    REQUIRE(rep.fit.exponential);
    // slope per m has magnitude near 2 ln(lambda)
    double slope_m = rep.fit.slope * c;
    REQUIRE(std::abs(slope_m) > std::log(2.0));
    REQUIRE(std::abs(slope_m) < 3.0 * std::log(2.0));

    // synthetic polynomial-tail control: K = 1/(1-|z|) on the unit disk
    auto Ks = [](cplx z) -> double {
        double a = std::abs(z);
        if (a >= 1.0) throw Error("OutOfDomain", "outside disk");
        return 1.0 / (1.0 - a);
    };
    DilatationField control = make_dilatation_field(Ks, -1, 1, -1, 1, 1024);
    std::vector<double> thr2;
    for (int m = 2; m <= 58; m += 4) thr2.push_back(m);
    AreaTailReport ctrl = area_tail(control, thr2);
    // closed-form oracle: Area{K > K0} = pi (2 K0 - 1) / K0^2
    for (const auto& e : ctrl.entries) {
        double exact = kPi * (2 * e.K0 - 1) / (e.K0 * e.K0);
        REQUIRE(std::abs(e.area - exact) < 0.02 * exact);
    }
    REQUIRE_FALSE(ctrl.fit.exponential); // discriminative test

    // an identically-1 field has an empty tail
    auto K1 = [](cplx) -> double { return 1.0; };
    DilatationField flat = make_dilatation_field(K1, 0, 1, 0, 1, 32);
    REQUIRE_THROWS_AS(area_tail(flat, {1.5, 2.0}), Error);
}

TEST_CASE("pullback invariance of K along preimage sectors") {
    // holomorphic pullback preserves |mu|: measure the dilatation of the
    // composed field map chi o kappa o (1/z) o N^k at a pulled-back point and
    // compare with chi's dilatation at the image point
    NewtonMapSpec N = cubic_unity();
    KoenigsChart kc(N.map.chart_at_infinity());
    SectorModel sec{kc.rho(), kPi / 4.0, 5};

    cplx zeta = std::pow(kc.rho(), -7.3) * cplx{std::cos(2.5), std::sin(2.5)};
    double K_img = numerical_dilatation(
        [&sec](cplx w) { return chi_extension(sec, w); }, zeta, 1e-5 * std::abs(zeta));

    cplx z_plane = cplx{1, 0} / kc.kappa_inverse(zeta);
    auto cand = detail::branch_candidates(N.map, z_plane, cplx{0, 0}, 2);
    cplx x = cand[0];
    auto field_map = [&](cplx y) {
        cplx img = N.map.eval(y);               // one pullback step: N(y) near infinity
        cplx w = cplx{1, 0} / img;              // chart
        return chi_extension(sec, kc.kappa(w)); // model coordinate
    };
    double K_pre = numerical_dilatation(field_map, x, 1e-6 * std::abs(x));
    REQUIRE(std::abs(K_pre - K_img) < 1e-4 * K_img);
}

TEST_CASE("newton area condition on the cubic") {
    NewtonMapSpec N = cubic_unity();

    NewtonAreaOptions d0;
    d0.depth = 0;
    NewtonAreaReport rep0 = newton_area_condition(N, d0);
    REQUIRE(rep0.rho == Approx(1.5).margin(1e-12));
    REQUIRE(rep0.sectors.size() == 1);
    REQUIRE(rep0.fit.exponential);
    // depth-0 decay rate magnitude near 2 ln rho
    REQUIRE(std::abs(rep0.slope_per_m) > std::log(1.5));
    REQUIRE(std::abs(rep0.slope_per_m) < 3.0 * std::log(1.5));

    NewtonAreaOptions d2;
    d2.depth = 2;
    NewtonAreaReport rep2 = newton_area_condition(N, d2);
    // pole enumeration oracle: den = 3z^2 has the double pole 0, so two
    // branches there; each of the three preimages of the pole carries two
    REQUIRE(rep2.sectors.size() == 1 + 2 + 6);
    int gen1 = 0, gen2 = 0;
    for (const auto& s : rep2.sectors) {
        if (s.generation == 1) {
            ++gen1;
            REQUIRE(std::abs(s.vertex) < 1e-9);
        }
        if (s.generation == 2) ++gen2;
    }
    REQUIRE(gen1 == 2);
    REQUIRE(gen2 == 6);
    REQUIRE(rep2.fit.exponential);
    REQUIRE(rep2.fit.slope < 0);
    REQUIRE(rep2.fit.r2 >= 0.9);
    // local degree 2 exceeds d-2 = 1 on this map; flagged, not silently accepted
    REQUIRE(rep2.flagged_degrees > 0);
    // union area finite, deeper generations decay geometrically
    REQUIRE(rep2.total_area < 10.0);
    REQUIRE(rep2.generation_decay);

    REQUIRE_THROWS_AS(
        newton_area_condition(build_newton_map(ComplexPoly::identity(), ComplexPoly::identity())),
        Error);
}

TEST_CASE("surgery pipeline on the cubic") {
    NewtonMapSpec N = cubic_unity();

    SurgeryPipelineReport empty = surgery_pipeline_report(N, {});
    REQUIRE(empty.pass);
    REQUIRE(empty.basins.empty());

    PipelineOptions opt;
    opt.chi_grid = 384; // desk-scale grid for the unit suite
    SurgeryPipelineReport rep = surgery_pipeline_report(N, {0}, opt);
    REQUIRE(rep.pcf_plausible);
    REQUIRE(rep.basins.size() == 1);
    REQUIRE(rep.basins[0].k == 2);
    REQUIRE(rep.basins[0].b == Approx(0.2).margin(1e-9));
    REQUIRE(rep.basins[0].pass);
    REQUIRE(rep.pass);
    REQUIRE(rep.david_integration == "not performed (out of scope)");

    // all d basins marked: d disk models, n = d consistent with 1 <= n <= d
    SurgeryPipelineReport all = surgery_pipeline_report(N, {0, 1, 2}, opt);
    REQUIRE(all.basins.size() == 3);
    for (const auto& b : all.basins) REQUIRE(b.k == 2);

    REQUIRE_THROWS_AS(surgery_pipeline_report(N, {0, 1, 2, 3}), Error);
}
