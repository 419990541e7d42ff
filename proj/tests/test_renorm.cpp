#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kpz/kernels.hpp"
#include "kpz/renorm.hpp"

using namespace kpz;

namespace {

const double kPref = 1.0 / (std::pow(2.0, 3.5) * std::sqrt(std::numbers::pi));

// Composite Simpson on [1, b] plus the closed-form tail 2/sqrt(b).
double wick_oracle(const Cutoff& chi, double (*w)(double)) {
    const double b = chi.transition_end();
    const int n = 20000;
    const double h = (b - 1.0) / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = 1.0 + i * h;
        const double f = std::pow(x, -1.5) * w(chi(x));
        s += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    return kPref * (s * h / 3.0 + 2.0 / std::sqrt(b));
}

std::array<Mat3, 3> sample_tensor() {
    std::array<Mat3, 3> m{};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = b; c < 3; ++c) m[a][b][c] = m[a][c][b] = 0.1 * (a + 1) - 0.07 * b * c + 0.3 * (b == c);
    return m;
}

}  // namespace

TEST_CASE("m1 scalar against Simpson and the analytic bracket") {
    for (const Cutoff& chi : {Cutoff::smootherstep(), Cutoff::smootherstep_narrow()}) {
        const double sq = m1_scalar(chi).value;
        const double lit = m1_scalar_literal(chi).value;
        CHECK(sq == doctest::Approx(wick_oracle(chi, [](double c) { return (1 - c) * (1 - c); })).epsilon(1e-10));
        CHECK(lit == doctest::Approx(wick_oracle(chi, [](double c) { return 1 - c * c; })).epsilon(1e-10));
        for (double v : {sq, lit}) {
            CHECK(v >= kPref * std::sqrt(2.0));
            CHECK(v <= kPref * 2.0);
        }
    }
}

TEST_CASE("m1 is linear in the trace vector") {
    const Cutoff chi = Cutoff::smootherstep();
    const Vec3 z = compute_m1(chi, CouplingTensor::zero());
    for (double v : z) CHECK(v == 0.0);
    const CouplingTensor M(sample_tensor());
    const Vec3 a = compute_m1(chi, M), b = compute_m1(chi, M.scaled(3.0));
    const Vec3 tr = contract(M).trace_vector;
    for (int c = 0; c < 3; ++c) {
        CHECK(b[c] == doctest::Approx(3.0 * a[c]).epsilon(1e-14));
        CHECK(a[c] == doctest::Approx(tr[c] * m1_scalar(chi).value).epsilon(1e-14));
    }
    for (double v : compute_m1(chi, CouplingTensor::identity())) CHECK(v > 0.0);
}

TEST_CASE("m2 closed form") {
    for (double v : compute_m2(CouplingTensor::all_ones())) CHECK(v == 0.0);
    for (double v : compute_m2(CouplingTensor::identity())) CHECK(v == doctest::Approx(6.0 * std::numbers::pi / std::sqrt(3.0)));
    CHECK(compute_m2(CouplingTensor::identity())[0] == doctest::Approx(10.8828).epsilon(1e-5));
    const CouplingTensor M(sample_tensor());
    const Vec3 a = compute_m2(M), b = compute_m2(M.scaled(-1.5));
    for (int c = 0; c < 3; ++c) CHECK(b[c] == doctest::Approx(-3.375 * a[c]).epsilon(1e-13));
}

TEST_CASE("Wick remainder stays in a band and cutoff differences shrink") {
    const Cutoff chi = Cutoff::smootherstep(), chi_p = Cutoff::smootherstep_narrow();
    const CouplingTensor M = CouplingTensor::identity();
    double lo = 1e300, hi = -1e300;
    for (int d = 1; d <= 4; ++d) {
        const double v = wick_remainder(2, 2 + d, 2.0, chi, M)[0];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(hi * lo > 0.0);
    CHECK(hi / lo < 2.0);
    // the remainder at identity M is the constant trace * (C(0,0) - L^{N-n} c_chi)
    const double direct = 3.0 * (covariance_C(2, 5, 2.0, chi, 0.0, 0.0).value - 8.0 * m1_scalar(chi).value);
    CHECK(wick_remainder(2, 5, 2.0, chi, M)[0] == doctest::Approx(direct).epsilon(1e-12));
    const double d2 = std::abs(wick_remainder(0, 2, 2.0, chi, M)[0] - wick_remainder(0, 2, 2.0, chi_p, M)[0]);
    const double d4 = std::abs(wick_remainder(0, 4, 2.0, chi, M)[0] - wick_remainder(0, 4, 2.0, chi_p, M)[0]);
    CHECK(d4 <= d2);
}

TEST_CASE("mu_eps is positive and its cutoff dependence does not grow") {
    const Cutoff chi = Cutoff::smootherstep(), chi_p = Cutoff::smootherstep_narrow();
    std::vector<double> diff;
    for (double eps : {1.0 / 8, 1.0 / 32, 1.0 / 128}) {
        const double a = compute_mu_eps(chi, eps).value, b = compute_mu_eps(chi_p, eps).value;
        CHECK(a > 0.0);
        CHECK(b > 0.0);
        diff.push_back(std::abs(a - b));
    }
    // no log growth: a log(1/eps) drift would add about 1.4 x slope per step
    CHECK(diff[2] - diff[1] <= diff[1] - diff[0] + 1e-3);
    CHECK(diff[2] < 0.5);
}

TEST_CASE("m3 extrapolation on synthetic tables") {
    std::vector<NuEntry> t;
    for (double eps : {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        NuEntry e;
        e.eps = eps;
        const double x = 1.0 / std::log(1.0 / eps);
        e.nu = {2.0 + 3.0 * x, -1.0 - 0.5 * x, 0.25};
        t.push_back(e);
    }
    const M3Result r = m3_from_table(t);
    CHECK(r.m3[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.m3[1] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(r.m3[2] == doctest::Approx(0.25).epsilon(1e-12));

    // growing differences are not Cauchy: the raw table travels with the error
    auto bad = t;
    for (std::size_t i = 0; i < bad.size(); ++i) bad[i].nu[0] = std::pow(2.0, double(i));
    try {
        m3_from_table(bad);
        FAIL("expected NonCauchyError");
    } catch (const NonCauchyError& e) {
        CHECK(e.table().size() == bad.size());
    }
    CHECK_THROWS_AS(m3_from_table({t[0], t[1]}), std::invalid_argument);
    CHECK_THROWS_AS(m3_from_table({t[1], t[0], t[2]}), std::invalid_argument);
}

TEST_CASE("zero coupling has zero m3") {
    const M3Result r = compute_m3(Cutoff::smootherstep(), CouplingTensor::zero(), {0.25, 0.125, 0.0625});
    for (double v : r.m3) CHECK(v == 0.0);
}

TEST_CASE("nu is bounded for a totally symmetric coupling") {
    const Cutoff chi = Cutoff::smootherstep();
    std::vector<double> nu;
    for (double eps : {1.0 / 16, 1.0 / 32, 1.0 / 64}) nu.push_back(compute_nu(chi, CouplingTensor::all_ones(), eps).nu[0]);
    CHECK(std::abs(nu[2] - nu[1]) < std::abs(nu[1] - nu[0]));
    CHECK(std::abs(nu[2] / nu[0] - 1.0) < 0.2);
}

TEST_CASE("counterterm algebra") {
    RenormConstants rc;
    rc.chi_id = Cutoff::smootherstep().id();
    rc.m1 = {0.3, 0.2, 0.1};
    rc.m2 = {1.0, -2.0, 0.0};
    rc.m3 = {0.5, 0.25, -4.0};
    const Vec3 c1 = counterterm(rc, 1.0);
    for (int a = 0; a < 3; ++a) CHECK(c1[a] == doctest::Approx(rc.m1[a] + kTwoLoopFactor * rc.m3[a]));
    for (double eps : {0.5, 0.1, 1.0 / 64}) {
        const Vec3 a = counterterm(rc, eps), b = counterterm(rc, eps / 2);
        for (int c = 0; c < 3; ++c)
            CHECK(b[c] - a[c] == doctest::Approx(rc.m1[c] / eps + kTwoLoopFactor * rc.m2[c] * std::log(2.0)));
    }
    for (double v : counterterm(RenormConstants{}, 0.125)) CHECK(v == 0.0);
    CHECK_THROWS(counterterm(rc, 0.0));
    CHECK_THROWS(counterterm(rc, 1.5));
    CHECK_NOTHROW(counterterm(rc, 0.5, Cutoff::smootherstep()));
    CHECK_THROWS(counterterm(rc, 0.5, Cutoff::smootherstep_narrow()));
}
