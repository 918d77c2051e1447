#include <catch2/catch.hpp>

#include <random>

#include "newtonlab/rat_map.hpp"

using namespace newtonlab;

TEST_CASE("reduce cancels a shared linear factor") {
    ComplexPoly num{{cplx{-1, 0}, cplx{0, 0}, cplx{1, 0}}}; // z^2-1
    ComplexPoly den{{cplx{-1, 0}, cplx{1, 0}}};             // z-1
    RatMap r = RatMap(num, den).reduced();
    REQUIRE(r.num().degree() == 1);
    REQUIRE(r.den().degree() == 0);
    REQUIRE(approx_equal(r, RatMap(ComplexPoly{{cplx{1, 0}, cplx{1, 0}}},
                                   ComplexPoly::constant(cplx{1, 0})),
                         1e-10));
}

TEST_CASE("coprime map is unchanged by reduce") {
    RatMap r(ComplexPoly{{cplx{1, 0}, cplx{0, 0}, cplx{1, 0}}},
             ComplexPoly{{cplx{0, 0}, cplx{2, 0}}});
    RatMap s = r.reduced();
    REQUIRE(approx_equal(r, s, 1e-12));
}

TEST_CASE("construct-then-reduce recovers the coprime pair") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int rep = 0; rep < 8; ++rep) {
        cplx a{u(rng), u(rng)};
        std::vector<cplx> nr, dr;
        for (int i = 0; i < 3; ++i) nr.push_back(cplx{u(rng), u(rng)});
        for (int i = 0; i < 2; ++i) dr.push_back(cplx{u(rng) + 3.0, u(rng)}); // keep coprime
        ComplexPoly n = ComplexPoly::from_roots(nr, cplx{1.1, 0.3});
        ComplexPoly d = ComplexPoly::from_roots(dr, cplx{0.9, -0.2});
        ComplexPoly shared{{-a, cplx{1, 0}}};
        RatMap built(shared * n, shared * d);
        RatMap red = built.reduced(1e-10);
        REQUIRE(approx_equal(red, RatMap(n, d), 1e-10));
    }
}

TEST_CASE("reduce is idempotent") {
    ComplexPoly shared{{cplx{-0.5, 0.25}, cplx{1, 0}}};
    RatMap r(shared * ComplexPoly{{cplx{1, 0}, cplx{1, 0}}},
             shared * ComplexPoly{{cplx{2, 0}, cplx{0, 0}, cplx{1, 0}}});
    RatMap once = r.reduced();
    RatMap twice = once.reduced();
    REQUIRE(approx_equal(once, twice, 1e-12));
}

TEST_CASE("quotient rule example") {
    // d/dz (z^2+1)/(2z) = (z^2-1)/(2z^2)
    RatMap r(ComplexPoly{{cplx{1, 0}, cplx{0, 0}, cplx{1, 0}}},
             ComplexPoly{{cplx{0, 0}, cplx{2, 0}}});
    RatMap d = r.derivative();
    RatMap expect(ComplexPoly{{cplx{-1, 0}, cplx{0, 0}, cplx{1, 0}}},
                  ComplexPoly{{cplx{0, 0}, cplx{0, 0}, cplx{2, 0}}});
    REQUIRE(approx_equal(d, expect, 1e-9));
}

TEST_CASE("derivative of a constant map is zero") {
    RatMap r(ComplexPoly::constant(cplx{3, 1}), ComplexPoly::constant(cplx{1, 0}));
    REQUIRE(r.wronskian().is_zero());
}

TEST_CASE("derivative matches central differences away from poles") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RatMap r(ComplexPoly{{cplx{0.3, 0.1}, cplx{-1, 0}, cplx{0, 0}, cplx{1, 0}}},
             ComplexPoly{{cplx{2, 0}, cplx{0.5, 0}, cplx{1, 0}}});
    int checked = 0;
    while (checked < 5) {
        cplx z{u(rng), u(rng)};
        if (std::abs(r.den().eval(z)) < 0.3) continue;
        double h = 1e-5;
        cplx fd = (r.eval(z + cplx{h, 0}) - r.eval(z - cplx{h, 0})) / (2 * h); // central-difference oracle
        REQUIRE(std::abs(r.derivative_at(z) - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
        ++checked;
    }
}

TEST_CASE("chart at infinity reverses coefficients") {
    // N = (z^2+1)/(2z): chart map is 2w/(1+w^2), derivative 2 at 0
    RatMap n(ComplexPoly{{cplx{1, 0}, cplx{0, 0}, cplx{1, 0}}},
             ComplexPoly{{cplx{0, 0}, cplx{2, 0}}});
    RatMap chart = n.chart_at_infinity();
    REQUIRE(std::abs(chart.eval(cplx{0, 0})) < 1e-15);
    REQUIRE(std::abs(chart.derivative_at(cplx{0, 0}) - cplx{2, 0}) < 1e-14);
    // consistency with the map itself: chart(w) == 1/N(1/w)
    cplx w{0.2, 0.1};
    REQUIRE(std::abs(chart.eval(w) - cplx{1, 0} / n.eval(cplx{1, 0} / w)) < 1e-13);
}
