#include <catch2/catch.hpp>

#include <algorithm>
#include <random>

#include "newtonlab/roots.hpp"

using namespace newtonlab;

TEST_CASE("simple quadratic roots") {
    ComplexPoly p{{cplx{-1, 0}, cplx{0, 0}, cplx{1, 0}}}; // z^2 - 1
    RootResult rr = poly_roots(p);
    REQUIRE(rr.converged);
    REQUIRE(rr.roots.size() == 2);
    REQUIRE(rr.roots[0].multiplicity == 1);
    REQUIRE(rr.roots[1].multiplicity == 1);
    REQUIRE(std::abs(rr.roots[0].value - cplx{-1, 0}) < 1e-12);
    REQUIRE(std::abs(rr.roots[1].value - cplx{1, 0}) < 1e-12);
}

TEST_CASE("triple root at the origin") {
    ComplexPoly p{{cplx{0, 0}, cplx{0, 0}, cplx{0, 0}, cplx{1, 0}}}; // z^3
    RootResult rr = poly_roots(p);
    REQUIRE(rr.roots.size() == 1);
    REQUIRE(rr.roots[0].multiplicity == 3);
    REQUIRE(std::abs(rr.roots[0].value) < 1e-10);
}

TEST_CASE("clustered multiple root away from origin") {
    // (z - (1+i))^3 (z + 2)
    cplx r{1, 1};
    ComplexPoly p = ComplexPoly::from_roots({r, r, r, cplx{-2, 0}});
    RootResult rr = poly_roots(p);
    REQUIRE(rr.total_multiplicity() == 4);
    bool found = false;
    for (const auto& c : rr.roots)
        if (c.multiplicity == 3 && std::abs(c.value - r) < 1e-8) found = true;
    REQUIRE(found);
}

TEST_CASE("constructed degree-6 roots are recovered") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<cplx> roots;
        while (roots.size() < 6) {
            cplx cand{u(rng), u(rng)};
            bool ok = true;
            for (cplx r : roots)
                if (std::abs(cand - r) < 0.3) ok = false; // keep roots simple
            if (ok) roots.push_back(cand);
        }
        ComplexPoly p = ComplexPoly::from_roots(roots, cplx{1.3, -0.4});
        RootResult rr = poly_roots(p);
        REQUIRE(rr.roots.size() == 6);
        for (cplx r : roots) {
            double best = 1e9;
            for (const auto& c : rr.roots) best = std::min(best, std::abs(c.value - r));
            REQUIRE(best < 1e-9); // build-then-recover oracle
        }
    }
}

TEST_CASE("root count equals degree with multiplicity") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int deg = 1; deg <= 9; ++deg) {
        std::vector<cplx> c(deg + 1);
        for (auto& a : c) a = cplx{u(rng), u(rng)};
        c.back() += cplx{2.0, 0};
        RootResult rr = poly_roots(ComplexPoly(std::move(c)));
        REQUIRE(rr.total_multiplicity() == deg);
    }
}

TEST_CASE("zero polynomial is rejected") {
    REQUIRE_THROWS_AS(poly_roots(ComplexPoly::zero()), Error);
}
