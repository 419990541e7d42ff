#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kpz/kernels.hpp"
#include "kpz/solver.hpp"

using namespace kpz;

namespace {

const Cutoff kChi = Cutoff::smootherstep();

cplx mode(const SpectralField& s, int a, int k) { return s.c[a][k] / double(s.nx); }

}  // namespace

TEST_CASE("default resolution") {
    const Resolution r = default_resolution(0.125);
    CHECK(r.nx == 32);
    CHECK(r.dt == 0.125 * 0.125 / 8);
    CHECK(default_resolution(0.1).nx == 64);
}

TEST_CASE("linear equation: stationary mode variance matches the multiplier quadrature") {
    const double eps = 0.25, T = 0.5;
    const Resolution res = default_resolution(eps);
    const int steps = static_cast<int>(std::lround(T / res.dt)), seeds = 300;
    std::array<std::vector<double>, 3> v;
    for (int s = 1; s <= seeds; ++s) {
        const NoiseRealization w = sample_white_noise(s, {res.nx / 2 - 1, res.dt, steps});
        const Trajectory tr = solve_with_noise(eps, T, CouplingTensor::zero(), {0, 0, 0}, kChi, res, &w,
                                               Field3(res.nx), steps);
        const SpectralField& last = tr.snapshots.back();
        for (int k = 1; k <= 3; ++k) {
            double acc = 0.0;
            for (int a = 0; a < 3; ++a) acc += std::norm(mode(last, a, k));
            v[k - 1].push_back(acc / 3.0);
        }
    }
    for (int k = 1; k <= 3; ++k) {
        const double p = 2.0 * std::numbers::pi * k;
        const double ref = integrate(
                               [&](double s) {
                                   const double g = std::exp(-s * p * p) * (1.0 - kChi(s / (eps * eps)));
                                   return g * g;
                               },
                               0.0, 4.0, std::vector<double>{eps * eps, 2 * eps * eps})
                               .value;
        double m = 0.0, m2 = 0.0;
        for (double x : v[k - 1]) {
            m += x;
            m2 += x * x;
        }
        m /= seeds;
        const double se = std::sqrt((m2 / seeds - m * m) / (seeds - 1));
        CHECK(std::abs(m - ref) < 4.0 * se);
    }
}

TEST_CASE("constant source: zero-mode growth and first-step support") {
    const double eps = 0.25, c = 1.5, T = 0.5;
    const Resolution res = default_resolution(eps);
    const Trajectory tr = solve_with_noise(eps, T, CouplingTensor::zero(), {c, c, c}, kChi, res, nullptr,
                                           Field3(res.nx), 1);
    for (const auto& s : tr.snapshots) {
        const double t = s.time;
        const auto ref = integrate([&](double x) { return 1.0 - kChi(x / (eps * eps)); }, 0.0, std::max(t, 1e-12),
                                   std::vector<double>{eps * eps, 2 * eps * eps});
        const Field3 u = to_physical(s);
        for (int a = 0; a < 3; ++a)
            for (int i = 0; i < res.nx; ++i) CHECK(u.c[a][i] == doctest::Approx(u.c[a][0]).epsilon(1e-12));
        if (t <= eps * eps) CHECK(u.c[0][0] == 0.0);
        CHECK(std::abs(u.c[0][0] - c * ref.value) <= c * res.dt);
    }
    // late times grow linearly with slope c
    const double late = mode(tr.snapshots.back(), 0, 0).real() - mode(tr.snapshots[tr.snapshots.size() - 9], 0, 0).real();
    CHECK(late == doctest::Approx(c * 8 * res.dt).epsilon(1e-10));
}

TEST_CASE("heat decay without noise or nonlinearity") {
    const double eps = 0.25;
    const Resolution res = default_resolution(eps);
    const Field3 u0 = initial_field(sample_initial_condition(4, res.nx / 2 - 1), res.nx);
    const SpectralField s0 = to_spectral(u0);
    const Trajectory tr = solve_with_noise(eps, 0.1, CouplingTensor::zero(), {0, 0, 0}, kChi, res, nullptr, u0, 4);
    for (const auto& s : tr.snapshots)
        for (int a = 0; a < 3; ++a)
            for (int k = 1; k < res.nx / 2; ++k) {
                const double p = 2.0 * std::numbers::pi * k;
                const cplx ref = std::exp(-s.time * p * p) * s0.c[a][k];
                CHECK(std::abs(s.c[a][k] - ref) <= 1e-10 * std::abs(s0.c[a][k]) + 1e-14);
            }
}

TEST_CASE("dealiased product has no energy above the two-thirds cutoff") {
    const int nx = 32;
    Field3 a(nx), b(nx);
    for (int i = 0; i < nx; ++i)
        for (int c = 0; c < 3; ++c) {
            a.c[c][i] = std::sin(2 * std::numbers::pi * 9 * i / nx + c) + 0.5 * std::cos(2 * std::numbers::pi * 14 * i / nx);
            b.c[c][i] = std::cos(2 * std::numbers::pi * 10 * i / nx) - 0.2 * c;
        }
    const SpectralField p = to_spectral(dealiased_product(CouplingTensor::identity(), a, b));
    // the product comes back in physical space, so "zero" means DFT round-off
    const int K = dealias_cutoff(nx);
    double low = 0.0;
    for (int c = 0; c < 3; ++c)
        for (int k = 0; k <= K; ++k) low = std::max(low, std::abs(p.c[c][k]));
    REQUIRE(low > 1.0);
    for (int c = 0; c < 3; ++c)
        for (int k = K + 1; k <= nx / 2; ++k) CHECK(std::abs(p.c[c][k]) < 1e-14 * low);
}

TEST_CASE("solve is deterministic and real") {
    RenormConstants rc;
    rc.chi_id = kChi.id();
    rc.m1 = compute_m1(kChi, CouplingTensor::identity());
    rc.m2 = compute_m2(CouplingTensor::identity());
    const Resolution res = default_resolution(0.25);
    SolveOptions opt;
    opt.snapshot_every = 8;
    const Trajectory a = solve(0.25, 0.25, 11, CouplingTensor::identity(), rc, kChi, res, opt);
    const Trajectory b = solve(0.25, 0.25, 11, CouplingTensor::identity(), rc, kChi, res, opt);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    CHECK_FALSE(a.blowup);
    for (std::size_t i = 0; i < a.snapshots.size(); ++i)
        for (int c = 0; c < 3; ++c) {
            CHECK(a.snapshots[i].c[c] == b.snapshots[i].c[c]);
            CHECK(a.snapshots[i].c[c][0].imag() == 0.0);
            if (i) CHECK(a.snapshots[i].time > a.snapshots[i - 1].time);
        }
    const Trajectory other = solve(0.25, 0.25, 12, CouplingTensor::identity(), rc, kChi, res, opt);
    CHECK(other.snapshots.back().c[0] != a.snapshots.back().c[0]);
}

TEST_CASE("M = 0 solve is heat flow of u0 plus the stochastic convolution") {
    const double eps = 0.25;
    const Resolution res = default_resolution(eps);
    const int steps = 32;
    SolveOptions opt;
    opt.mode = CountertermMode::Off;
    const Trajectory full = solve(eps, steps * res.dt, 8, CouplingTensor::zero(), RenormConstants{}, kChi, res, opt);
    const NoiseRealization w = sample_white_noise(8, {res.nx / 2 - 1, res.dt, steps});
    const Field3 u0 = initial_field(sample_initial_condition(8, res.nx / 2 - 1), res.nx);
    const Trajectory heat = solve_with_noise(eps, steps * res.dt, CouplingTensor::zero(), {0, 0, 0}, kChi, res, nullptr, u0, 1);
    const Trajectory conv = solve_with_noise(eps, steps * res.dt, CouplingTensor::zero(), {0, 0, 0}, kChi, res, &w, Field3(res.nx), 1);
    const auto& f = full.snapshots.back();
    for (int c = 0; c < 3; ++c)
        for (int k = 0; k <= res.nx / 2; ++k)
            CHECK(std::abs(f.c[c][k] - heat.snapshots.back().c[c][k] - conv.snapshots.back().c[c][k]) < 1e-12);
}

TEST_CASE("blow-up is flagged, not fatal") {
    // a huge constant source crosses the sup-norm threshold after a few steps
    const double eps = 0.25;
    const Resolution res = default_resolution(eps);
    const Trajectory tr =
        solve_with_noise(eps, 1.0, CouplingTensor::zero(), {1e9, 0, 0}, kChi, res, nullptr, Field3(res.nx), 1);
    CHECK(tr.blowup);
    CHECK(tr.blowup_time > eps * eps);
    CHECK(tr.blowup_time < 0.1);
}

TEST_CASE("resolution and noise preconditions") {
    const Resolution coarse{16, 0.25 * 0.25 / 4};
    CHECK_THROWS(solve_with_noise(0.25, 0.1, CouplingTensor::zero(), {0, 0, 0}, kChi, coarse, nullptr, Field3(16), 1));
    const Resolution res = default_resolution(0.25);
    const NoiseRealization w = sample_white_noise(1, {7, res.dt, 4});
    CHECK_THROWS(solve_with_noise(0.25, 0.1, CouplingTensor::zero(), {0, 0, 0}, kChi, res, &w, Field3(res.nx), 1));
}

TEST_CASE("envelope tail") {
    CHECK(envelope_tail({1.0, 0.5}) == doctest::Approx(0.5));
    CHECK(envelope_tail({4.0, 1.0, 0.25}) == doctest::Approx(0.25 * 0.25 / 0.75));
    CHECK(std::isinf(envelope_tail({1.0, 2.0})));
    CHECK(std::isinf(envelope_tail({1.0})));
    CHECK(envelope_tail({0.0, 0.0}) == 0.0);
}

TEST_CASE("convergence study: shared noise and off-mode drift") {
    RenormConstants rc;
    rc.chi_id = kChi.id();
    rc.m1 = compute_m1(kChi, CouplingTensor::identity());
    const auto rep = convergence_study({0.25, 0.125}, 3, CouplingTensor::identity(), kChi, 0.125, rc,
                                       {CountertermMode::Off, CountertermMode::M1Only});
    REQUIRE(rep.curves.size() == 2);
    for (const auto& c : rep.curves) {
        CHECK(c.eps.size() == 2);
        CHECK(c.diff.size() == 1);
        CHECK(c.diff[0] > 0.0);
    }
    // without the counterterm the Wick drift pushes the mean up as eps shrinks
    const auto& off = rep.curves[0];
    CHECK(off.mean[1][0] > off.mean[0][0]);
}
