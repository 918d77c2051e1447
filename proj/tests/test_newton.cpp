#include <catch2/catch.hpp>

#include <random>

#include "newtonlab/newton.hpp"

using namespace newtonlab;

namespace {

std::vector<cplx> separated_roots(std::mt19937& rng, int count, double min_sep = 0.35) {
    std::uniform_real_distribution<double> u(-1.6, 1.6);
    std::vector<cplx> roots;
    while (static_cast<int>(roots.size()) < count) {
        cplx cand{u(rng), u(rng)};
        bool ok = true;
        for (cplx r : roots)
            if (std::abs(cand - r) < min_sep) ok = false;
        if (ok) roots.push_back(cand);
    }
    return roots;
}

ComplexPoly random_q(std::mt19937& rng, int deg) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cplx> c(deg + 1);
    for (auto& a : c) a = cplx{u(rng), u(rng)};
    if (std::abs(c.back()) < 0.25) c.back() += cplx{0.8, 0.4};
    return ComplexPoly(std::move(c));
}

const ComplexPoly kZ = ComplexPoly::identity();

} // namespace

TEST_CASE("closed-form Newton maps") {
    // p = z^2-1, q = 0: N = (z^2+1)/(2z)
    NewtonMapSpec n1 = build_newton_map(ComplexPoly{{cplx{-1, 0}, cplx{0, 0}, cplx{1, 0}}},
                                        ComplexPoly::zero());
    REQUIRE(n1.d == 2);
    REQUIRE(n1.n == 0);
    REQUIRE(approx_equal(n1.map,
                         RatMap(ComplexPoly{{cplx{1, 0}, cplx{0, 0}, cplx{1, 0}}},
                                ComplexPoly{{cplx{0, 0}, cplx{2, 0}}}),
                         1e-12));

    // p = z, q = z: N = z^2/(1+z)
    NewtonMapSpec n2 = build_newton_map(kZ, kZ);
    REQUIRE(n2.d == 2);
    REQUIRE(n2.n == 1);
    REQUIRE(approx_equal(n2.map,
                         RatMap(ComplexPoly{{cplx{0, 0}, cplx{0, 0}, cplx{1, 0}}},
                                ComplexPoly{{cplx{1, 0}, cplx{1, 0}}}),
                         1e-12));

    REQUIRE_THROWS_AS(build_newton_map(ComplexPoly::zero(), kZ), Error);
}

TEST_CASE("degree of a generic map is deg p + deg q") {
    std::mt19937 rng(31);
    NewtonMapSpec n = build_newton_map(ComplexPoly::from_roots(separated_roots(rng, 3)),
                                       random_q(rng, 2));
    REQUIRE(n.d == 5);
    REQUIRE(n.map.num().degree() == 5);
    REQUIRE(n.map.num().degree() > n.map.den().degree());
}

TEST_CASE("fixed points of the classical quadratic") {
    NewtonMapSpec n = build_newton_map(ComplexPoly{{cplx{-1, 0}, cplx{0, 0}, cplx{1, 0}}},
                                       ComplexPoly::zero());
    auto fps = fixed_points(n);
    REQUIRE(fps.size() == 3);
    int supers = 0;
    for (const auto& f : fps) {
        if (f.location.at_infinity) {
            REQUIRE(f.kind == FixedPointKind::repelling);
            // rho = N'(infinity) = d/(d-1) = 2
            REQUIRE(std::abs(f.multiplier - cplx{2, 0}) < 1e-12);
        } else {
            REQUIRE(std::abs(f.multiplier) < 1e-12);
            REQUIRE(f.root_multiplicity == 1);
            ++supers;
        }
    }
    REQUIRE(supers == 2);
}

TEST_CASE("parabolic point at infinity for p=z, q=z") {
    NewtonMapSpec n = build_newton_map(kZ, kZ);
    auto fps = fixed_points(n);
    REQUIRE(fps.size() == 2);
    for (const auto& f : fps) {
        if (f.location.at_infinity) {
            REQUIRE(f.kind == FixedPointKind::parabolic);
            REQUIRE(std::abs(f.multiplier - cplx{1, 0}) < 1e-13);
            REQUIRE(f.petals == 1);
        } else {
            REQUIRE(std::abs(f.location.z) < 1e-12);
            REQUIRE(std::abs(f.multiplier) < 1e-12);
        }
    }
}

TEST_CASE("double root gives multiplier one half") {
    NewtonMapSpec n = build_newton_map(ComplexPoly{{cplx{0, 0}, cplx{0, 0}, cplx{1, 0}}},
                                       ComplexPoly::zero()); // p = z^2, N = z/2
    auto fps = fixed_points(n);
    bool found = false;
    for (const auto& f : fps)
        if (!f.location.at_infinity) {
            REQUIRE(std::abs(f.multiplier - cplx{0.5, 0}) < 1e-12);
            REQUIRE(f.root_multiplicity == 2);
            found = true;
        }
    REQUIRE(found);
}

TEST_CASE("multiplier_at the three example points") {
    NewtonMapSpec n1 = build_newton_map(ComplexPoly{{cplx{-1, 0}, cplx{0, 0}, cplx{1, 0}}},
                                        ComplexPoly::zero());
    REQUIRE(std::abs(multiplier_at(n1, SpherePoint::finite(cplx{1, 0}))) < 1e-13);

    // p = z^3: N = 2z/3, multiplier (3-1)/3 at 0
    NewtonMapSpec n2 = build_newton_map(
        ComplexPoly{{cplx{0, 0}, cplx{0, 0}, cplx{0, 0}, cplx{1, 0}}}, ComplexPoly::zero());
    REQUIRE(std::abs(multiplier_at(n2, SpherePoint::finite(cplx{0, 0})) - cplx{2.0 / 3.0, 0}) <
            1e-13);

    NewtonMapSpec n3 = build_newton_map(kZ, kZ);
    REQUIRE(std::abs(multiplier_at(n3, SpherePoint::infinity()) - cplx{1, 0}) < 1e-13);

    REQUIRE_THROWS_AS(multiplier_at(n1, SpherePoint::finite(cplx{5, 5})), Error);
}

TEST_CASE("critical points and the 2d-2 count") {
    NewtonMapSpec n1 = build_newton_map(ComplexPoly{{cplx{-1, 0}, cplx{0, 0}, cplx{1, 0}}},
                                        ComplexPoly::zero());
    auto c1 = critical_points(n1);
    int total = 0;
    for (const auto& c : c1) total += c.multiplicity;
    REQUIRE(total == 2);

    // p = z^3 - 1: roots plus the free critical point at 0
    NewtonMapSpec n2 = build_newton_map(
        ComplexPoly{{cplx{-1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{1, 0}}}, ComplexPoly::zero());
    auto c2 = critical_points(n2);
    total = 0;
    bool zero_found = false;
    for (const auto& c : c2) {
        total += c.multiplicity;
        if (!c.location.at_infinity && std::abs(c.location.z) < 1e-9) zero_found = true;
    }
    REQUIRE(total == 4);
    REQUIRE(zero_found);

    // p = z, q = z: critical set of z^2/(1+z) is {0, -2}
    NewtonMapSpec n3 = build_newton_map(kZ, kZ);
    auto c3 = critical_points(n3);
    REQUIRE(c3.size() == 2);
    bool has0 = false, hasm2 = false;
    for (const auto& c : c3) {
        if (std::abs(c.location.z) < 1e-10) has0 = true;
        if (std::abs(c.location.z + cplx{2, 0}) < 1e-10) hasm2 = true;
    }
    REQUIRE((has0 && hasm2));
}

TEST_CASE("newton character certificate") {
    // N of z^5 - 1: all residuals ~0 with m = 1 (build-then-verify round trip)
    std::vector<cplx> coef(6, cplx{0, 0});
    coef[0] = cplx{-1, 0};
    coef[5] = cplx{1, 0};
    NewtonMapSpec n = build_newton_map(ComplexPoly(coef), ComplexPoly::zero());
    CharacterReport rep = verify_newton_character(n.map, 1e-8);
    REQUIRE(rep.pass);
    REQUIRE(rep.max_residual < 1e-10);
    for (const auto& e : rep.entries) REQUIRE(e.m == 1);

    // z^2 is not a Newton map: multiplier 2 at the fixed point 1
    CharacterReport bad = verify_newton_character(
        RatMap(ComplexPoly{{cplx{0, 0}, cplx{0, 0}, cplx{1, 0}}},
               ComplexPoly::constant(cplx{1, 0})),
        1e-8);
    REQUIRE_FALSE(bad.pass);

    // p = z^2 (z-1): m = 2 at 0 and m = 1 at 1 (direct differentiation oracle)
    NewtonMapSpec n2 = build_newton_map(
        ComplexPoly{{cplx{0, 0}, cplx{0, 0}, cplx{-1, 0}, cplx{1, 0}}}, ComplexPoly::zero());
    CharacterReport rep2 = verify_newton_character(n2.map, 1e-6);
    REQUIRE(rep2.pass);
    bool m2at0 = false, m1at1 = false;
    for (const auto& e : rep2.entries) {
        if (std::abs(e.location) < 1e-6 && e.m == 2) m2at0 = true;
        if (std::abs(e.location - cplx{1, 0}) < 1e-6 && e.m == 1) m1at1 = true;
    }
    REQUIRE((m2at0 && m1at1));
}

TEST_CASE("round trip: fixed points coincide with roots of p") {
    std::mt19937 rng(77);
    for (int rep = 0; rep < 12; ++rep) {
        int dp = 2 + rep % 7; // deg p up to 8
        int dq = rep % 5;     // deg q up to 4
        auto roots = separated_roots(rng, dp);
        ComplexPoly p = ComplexPoly::from_roots(roots);
        ComplexPoly q = dq == 0 ? ComplexPoly::zero() : random_q(rng, dq);
        NewtonMapSpec n = build_newton_map(p, q);
        auto fps = fixed_points(n);
        int finite = 0;
        for (const auto& f : fps) {
            if (f.location.at_infinity) continue;
            ++finite;
            double best = 1e9;
            for (cplx r : roots) best = std::min(best, std::abs(f.location.z - r));
            REQUIRE(best < 1e-8);
        }
        REQUIRE(finite == dp); // every root of p is a fixed point
    }
}

TEST_CASE("multiple root of p together with nonconstant q") {
    // reduction deflates the shared root of p and p' + p q'; the residue must
    // not spawn spurious fixed points at the cancelled top degrees
    std::mt19937 rng(4242);
    for (int rep = 0; rep < 6; ++rep) {
        auto base = separated_roots(rng, 3);
        std::vector<cplx> roots{base[0], base[0], base[1], base[2]}; // one double root
        NewtonMapSpec N = build_newton_map(ComplexPoly::from_roots(roots, cplx{1.7, -0.6}),
                                           random_q(rng, 1 + rep % 3));
        auto fps = fixed_points(N);
        int finite = 0;
        for (const auto& f : fps) {
            if (f.location.at_infinity) continue;
            ++finite;
            double best = 1e300;
            for (cplx r : roots) best = std::min(best, std::abs(f.location.z - r));
            REQUIRE(best < 1e-5);
            if (std::abs(f.location.z - base[0]) < 1e-4) REQUIRE(f.root_multiplicity == 2);
        }
        REQUIRE(finite == 3); // three distinct roots
    }
}

TEST_CASE("multiplier law at constructed multiple roots") {
    std::mt19937 rng(13);
    for (int m = 2; m <= 4; ++m) {
        auto base = separated_roots(rng, 3);
        std::vector<cplx> roots;
        for (int i = 0; i < m; ++i) roots.push_back(base[0]);
        roots.push_back(base[1]);
        roots.push_back(base[2]);
        NewtonMapSpec n = build_newton_map(ComplexPoly::from_roots(roots), ComplexPoly::zero());
        auto fps = fixed_points(n);
        bool checked = false;
        for (const auto& f : fps) {
            if (f.location.at_infinity) continue;
            if (std::abs(f.location.z - base[0]) < 1e-4) {
                REQUIRE(std::abs(f.multiplier - cplx{double(m - 1) / m, 0}) < 1e-6);
                REQUIRE(f.root_multiplicity == m);
                checked = true;
            }
        }
        REQUIRE(checked);
    }
}

TEST_CASE("degree and infinity laws on random families") {
    std::mt19937 rng(123);
    for (int rep = 0; rep < 20; ++rep) {
        int dp = 2 + rep % 5, dq = 1 + rep % 4;
        NewtonMapSpec n = build_newton_map(ComplexPoly::from_roots(separated_roots(rng, dp)),
                                           random_q(rng, dq));
        REQUIRE(n.d == dp + dq);
        cplx lam = multiplier_at(n, SpherePoint::infinity());
        REQUIRE(std::abs(lam - cplx{1, 0}) < 1e-9);

        NewtonMapSpec npoly = build_newton_map(ComplexPoly::from_roots(separated_roots(rng, dp)),
                                               ComplexPoly::zero());
        cplx rho = multiplier_at(npoly, SpherePoint::infinity());
        REQUIRE(std::abs(rho - cplx{double(dp) / (dp - 1), 0}) < 1e-9);

        auto crit = critical_points(n);
        int total = 0;
        for (const auto& c : crit) total += c.multiplicity;
        REQUIRE(total == 2 * n.d - 2);
    }
}
