#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rescon/dynamics.hpp"
#include "rescon/melnikov.hpp"

using namespace rescon;

namespace {

std::mt19937 rng(11);

SynodicDelaunay random_delaunay() {
    std::uniform_real_distribution<double> Ld(0.9, 1.3);
    std::uniform_real_distribution<double> ed(0.1, 0.8);
    std::uniform_real_distribution<double> ang(0.0, kTwoPi);
    const double L = Ld(rng), e = ed(rng);
    return {L, L * std::sqrt(1.0 - e * e), ang(rng), ang(rng)};
}

}  // namespace

TEST_CASE("resonance spec validation and derived quantities") {
    CHECK_THROWS_AS(ResonanceSpec(2, 4, 0.3), DomainError);   // not coprime
    CHECK_THROWS_AS(ResonanceSpec(3, 4, 0.01), DomainError);  // e out of range
    CHECK_THROWS_AS(ResonanceSpec(-3, 4, 0.3), DomainError);

    const ResonanceSpec r34(3, 4, 0.5);
    CHECK(r34.semimajor_axis() == Catch::Approx(std::pow(4.0 / 3.0, 2.0 / 3.0)));
    // mean motion a^(-3/2) should equal n/m
    CHECK(std::pow(r34.semimajor_axis(), -1.5) == Catch::Approx(3.0 / 4.0));
    CHECK(r34.period() == Catch::Approx(8.0 * std::numbers::pi));
    CHECK(r34.L() == Catch::Approx(std::sqrt(r34.semimajor_axis())));
    CHECK(r34.G() == Catch::Approx(r34.L() * std::sqrt(0.75)));
}

TEST_CASE("Kepler solver satisfies the defining equation") {
    std::uniform_real_distribution<double> ed(0.05, 0.95);
    std::uniform_real_distribution<double> ld(-10.0, 10.0);
    for (int rep = 0; rep < 200; ++rep) {
        const double e = ed(rng), ell = ld(rng);
        const double E = solve_kepler(ell, e);
        CHECK(std::abs(E - e * std::sin(E) - wrap_angle(ell)) < 1e-13);
    }
    CHECK(solve_kepler(0.0, 0.5) == Catch::Approx(0.0).margin(1e-14));
    CHECK(solve_kepler(std::numbers::pi, 0.9) == Catch::Approx(std::numbers::pi));
    CHECK_THROWS_AS(solve_kepler(1.0, 1.5), DomainError);
}

TEST_CASE("Delaunay to cartesian and back is the identity") {
    for (int rep = 0; rep < 100; ++rep) {
        const SynodicDelaunay sd = random_delaunay();
        const State s = delaunay_to_cartesian(sd);
        const SynodicDelaunay back = cartesian_to_delaunay(s);
        CHECK(back.L == Catch::Approx(sd.L).epsilon(1e-10));
        CHECK(back.G == Catch::Approx(sd.G).epsilon(1e-10));
        CHECK(std::abs(wrap_angle(back.ell - sd.ell + std::numbers::pi) -
                       std::numbers::pi) < 1e-8);
        CHECK(std::abs(wrap_angle(back.g - sd.g + std::numbers::pi) -
                       std::numbers::pi) < 1e-8);
    }
}

TEST_CASE("mu = 0 Jacobi constant equals the Tisserand expression 1/a + 2G") {
    const MassRatio mu0(0.0);
    for (int rep = 0; rep < 50; ++rep) {
        const SynodicDelaunay sd = random_delaunay();
        const State s = delaunay_to_cartesian(sd);
        const double a = sd.L * sd.L;
        CHECK(jacobi_constant(s, mu0) == Catch::Approx(1.0 / a + 2.0 * sd.G).epsilon(1e-12));
    }
}

TEST_CASE("periapsis and apoapsis geometry") {
    const double L = 1.1, e = 0.4;
    const double a = L * L, G = L * std::sqrt(1.0 - e * e);

    const State peri = delaunay_to_cartesian({L, G, 0.0, 0.0});
    CHECK(peri.x == Catch::Approx(a * (1.0 - e)).epsilon(1e-13));
    CHECK(peri.y == Catch::Approx(0.0).margin(1e-13));
    CHECK(peri.vx == Catch::Approx(0.0).margin(1e-13));  // radial velocity vanishes

    // ell = pi with g = 0 puts the apoapsis on the negative x-axis.
    const State apo = delaunay_to_cartesian({L, G, std::numbers::pi, 0.0});
    CHECK(apo.x == Catch::Approx(-a * (1.0 + e)).epsilon(1e-13));
    CHECK(apo.y == Catch::Approx(0.0).margin(1e-12));
    CHECK(apo.vx == Catch::Approx(0.0).margin(1e-12));
    CHECK(apo.vy > 0.0);
}

TEST_CASE("H1 matches its direct cartesian evaluation") {
    for (int rep = 0; rep < 100; ++rep) {
        const SynodicDelaunay sd = random_delaunay();
        const State s = delaunay_to_cartesian(sd);
        const double rho2 = std::hypot(s.x - 1.0, s.y);
        const double direct = s.x - 1.0 / rho2;  // r1 cos(g+f) is just x
        CHECK(perturbation_H1(sd) == Catch::Approx(direct).epsilon(1e-11).margin(1e-12));
    }
}

TEST_CASE("H1 is even and dH1/dell odd under (ell, g) -> (-ell, -g)") {
    for (int rep = 0; rep < 50; ++rep) {
        const SynodicDelaunay sd = random_delaunay();
        const SynodicDelaunay mir{sd.L, sd.G, -sd.ell, -sd.g};
        CHECK(perturbation_H1(sd) == Catch::Approx(perturbation_H1(mir)).epsilon(1e-12));
        CHECK(perturbation_H1_dell(sd) ==
              Catch::Approx(-perturbation_H1_dell(mir)).margin(1e-8));
    }
}

TEST_CASE("analytic dH1/dell matches the finite difference") {
    for (int rep = 0; rep < 100; ++rep) {
        const SynodicDelaunay sd = random_delaunay();
        CHECK(perturbation_H1_dell_analytic(sd) ==
              Catch::Approx(perturbation_H1_dell(sd)).epsilon(1e-8).margin(1e-8));
    }
}

TEST_CASE("finite-difference dH1/dell agrees with a Richardson refinement") {
    const SynodicDelaunay sd{1.2, 1.0, 0.7, 1.3};
    const double d1 = perturbation_H1_dell(sd, 1e-4);
    const double d2 = perturbation_H1_dell(sd, 5e-5);
    const double richardson = (4.0 * d2 - d1) / 3.0;
    CHECK(perturbation_H1_dell(sd) == Catch::Approx(richardson).margin(1e-8));
}

TEST_CASE("Melnikov function is odd, periodic, and vanishes at 0") {
    const ResonanceSpec spec(3, 4, 0.5);
    CHECK(std::abs(melnikov_M(spec, 0.0)) < 1e-8);
    for (double g : {0.3, 0.9, 1.7}) {
        const double Mg = melnikov_M(spec, g);
        CHECK(std::abs(Mg + melnikov_M(spec, -g)) < 1e-8);
        CHECK(melnikov_M(spec, g + kTwoPi / spec.n) == Catch::Approx(Mg).margin(1e-8));
    }
    CHECK_THROWS_AS(melnikov_M(spec, 0.0, 100), DomainError);
}

TEST_CASE("Melnikov values are converged in the quadrature resolution") {
    const ResonanceSpec spec(5, 6, 0.4);
    for (double g : {0.2, 0.45}) {
        const double coarse = melnikov_M(spec, g, 2048);
        const double fine = melnikov_M(spec, g, 8192);
        CHECK(coarse == Catch::Approx(fine).margin(1e-9));
    }
}

TEST_CASE("zeros of M sit at 0 and pi/n") {
    struct Case {
        int n, m;
        double e;
    };
    for (const Case c : {Case{3, 4, 0.5}, Case{5, 6, 0.4}}) {
        const ResonanceSpec spec(c.n, c.m, c.e);
        const auto zeros = find_melnikov_zeros(spec, 360, 2048);
        REQUIRE(zeros.size() == 2);
        CHECK(std::abs(zeros[0].g) < 1e-6);
        CHECK(std::abs(zeros[1].g - std::numbers::pi / c.n) < 1e-6);
        for (const auto& z : zeros) CHECK(z.simple);
    }
}
