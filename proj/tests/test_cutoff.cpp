#include <doctest.h>

#include <cmath>

#include "kpz/cutoff.hpp"

using namespace kpz;

TEST_CASE("smootherstep profile") {
    const Cutoff chi = Cutoff::smootherstep();
    CHECK(chi(0.0) == 1.0);
    CHECK(chi(1.0) == 1.0);
    CHECK(chi(2.0) == 0.0);
    CHECK(chi(5.0) == 0.0);
    CHECK(chi(1.5) == doctest::Approx(0.5));
    // 1 - S(0.25) with S(x) = 6x^5 - 15x^4 + 10x^3
    CHECK(chi(1.25) == doctest::Approx(1.0 - (6 * std::pow(0.25, 5) - 15 * std::pow(0.25, 4) + 10 * std::pow(0.25, 3))));
    double prev = 1.0;
    for (double s = 0.0; s <= 2.5; s += 1.0 / 64) {
        CHECK(chi(s) <= prev);
        prev = chi(s);
    }
    // sup |chi| + sup |chi'|, the latter 15/8 at the midpoint
    CHECK(chi.c1_norm() == doctest::Approx(1.0 + 15.0 / 8.0).epsilon(1e-6));
    CHECK(chi.derivative(1.5) == doctest::Approx(-15.0 / 8.0));
}

TEST_CASE("narrow cutoff ends at 1.5") {
    const Cutoff chi = Cutoff::smootherstep_narrow();
    CHECK(chi.transition_end() == 1.5);
    CHECK(chi(1.25) == doctest::Approx(0.5));
    CHECK(chi(1.5) == 0.0);
    CHECK(Cutoff::by_name("smootherstep-narrow").id() == chi.id());
    CHECK_THROWS(Cutoff::by_name("tophat"));
}

TEST_CASE("derivative matches finite differences") {
    for (const Cutoff& chi : {Cutoff::smootherstep(), Cutoff::smootherstep_narrow()})
        for (double s = 1.05; s < chi.transition_end(); s += 0.07) {
            const double h = 1e-6;
            CHECK(chi.derivative(s) == doctest::Approx((chi(s + h) - chi(s - h)) / (2 * h)).epsilon(1e-6));
        }
}

TEST_CASE("tabulated cutoff interpolates monotonically") {
    const Cutoff chi = Cutoff::from_samples({1.0, 1.25, 1.5, 1.75, 2.0}, {1.0, 0.9, 0.4, 0.1, 0.0});
    CHECK(chi(1.0) == 1.0);
    CHECK(chi(1.5) == doctest::Approx(0.4));
    CHECK(chi(2.0) == 0.0);
    double prev = 1.0;
    for (double s = 1.0; s <= 2.0; s += 0.01) {
        CHECK(chi(s) <= prev + 1e-15);
        prev = chi(s);
    }
}

TEST_CASE("chi_m") {
    const Cutoff chi = Cutoff::smootherstep();
    for (double s : {0.0, 0.3, 1.2, 3.0}) CHECK(chi_m(chi, 0, 2.0, s) == 0.0);
    for (int m = 0; m < 4; ++m)
        for (double s : {2.0, 2.5, 10.0}) CHECK(chi_m(chi, m, 2.0, s) == 0.0);
    for (int m = 1; m < 5; ++m) {
        const double lo = 2.0 * std::pow(2.0, -2 * m);
        for (int i = 0; i <= 10; ++i) CHECK(chi_m(chi, m, 2.0, lo + (1.0 - lo) * i / 10.0) == 1.0);
        CHECK(chi_m(chi, m, 2.0, 0.99 * std::pow(2.0, -2 * m)) == 0.0);
    }
    // chi_eps reduces to chi_m at eps = L^-m
    for (double s : {0.01, 0.1, 0.2, 1.3, 1.9})
        CHECK(chi_eps(chi, 0.25, s) == doctest::Approx(chi_m(chi, 2, 2.0, s)));
}
