#include <doctest.h>

#include <cmath>
#include <sstream>

#include "kpz/kernels.hpp"
#include "kpz/noise.hpp"

using namespace kpz;

namespace {

struct Stats {
    double mean = 0.0, se = 0.0;
};

Stats stats(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= v.size();
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    return {m, std::sqrt(s2 / (v.size() - 1) / v.size())};
}

}  // namespace

TEST_CASE("white noise increments: mean, variance, Hermitian pairing") {
    const NoiseGrid g{8, 1.0 / 64, 500};
    const NoiseRealization w = sample_white_noise(42, g);
    std::vector<double> re, re2, im2;
    for (int j = 0; j < g.n_steps; ++j)
        for (int a = 0; a < 3; ++a)
            for (int k = 1; k <= g.k_max; ++k) {
                const cplx z = w.at(j, a, k);
                CHECK(w.at(j, a, -k) == std::conj(z));
                re.push_back(z.real());
                re2.push_back(z.real() * z.real());
                im2.push_back(z.imag() * z.imag());
            }
    REQUIRE(re.size() >= 10000);
    const Stats m = stats(re), vr = stats(re2), vi = stats(im2);
    CHECK(std::abs(m.mean) < 4 * m.se);
    CHECK(std::abs(vr.mean - g.dt / 2) < 4 * vr.se);
    CHECK(std::abs(vi.mean - g.dt / 2) < 4 * vi.se);
    CHECK(w.at(3, 1, 0) == cplx{});
    CHECK(w.at(3, 1, 9) == cplx{});
}

TEST_CASE("noise is deterministic, seed-sensitive and prefix-stable") {
    const NoiseRealization a = sample_white_noise(7, {6, 0.01, 100}), b = sample_white_noise(7, {6, 0.01, 100});
    CHECK(a.inc == b.inc);
    const NoiseRealization c = sample_white_noise(8, {6, 0.01, 100});
    CHECK(a.inc != c.inc);
    // enlarging the grid does not perturb earlier increments
    const NoiseRealization big = sample_white_noise(7, {10, 0.01, 150});
    for (int j = 0; j < 100; ++j)
        for (int comp = 0; comp < 3; ++comp)
            for (int k = 1; k <= 6; ++k) CHECK(big.at(j, comp, k) == a.at(j, comp, k));
}

TEST_CASE("binary record round trip") {
    const NoiseRealization a = sample_white_noise(3, {4, 0.125, 17});
    std::stringstream ss;
    a.write_binary(ss);
    const NoiseRealization b = NoiseRealization::read_binary(ss);
    CHECK(b.seed == a.seed);
    CHECK(b.k_max == a.k_max);
    CHECK(b.dt == a.dt);
    CHECK(b.n_steps == a.n_steps);
    CHECK(b.inc == a.inc);
    std::stringstream junk("not a record at all");
    CHECK_THROWS(NoiseRealization::read_binary(junk));
}

TEST_CASE("coupled family shares one path") {
    const NoiseGrid g{8, 1.0 / 2048, 64};
    const auto fam = coupled_noise_family(9, {0.125, 0.0625}, g);
    REQUIRE(fam.size() == 2);
    CHECK(fam[0].inc == fam[1].inc);
    CHECK(coupled_noise_family(9, {0.125}, g)[0].inc == sample_white_noise(9, g).inc);
    CHECK(coupled_noise_family(10, {0.125}, g)[0].inc != fam[0].inc);
    CHECK_THROWS(coupled_noise_family(9, {0.03125}, g));
}

TEST_CASE("coarsening sums increments") {
    const NoiseRealization f = sample_white_noise(2, {6, 0.01, 40});
    const NoiseRealization c = coarsen(f, 4, 3);
    CHECK(c.n_steps == 10);
    CHECK(c.dt == doctest::Approx(0.04));
    const cplx s = f.at(4, 2, 3) + f.at(5, 2, 3) + f.at(6, 2, 3) + f.at(7, 2, 3);
    CHECK(std::abs(c.at(1, 2, 3) - s) < 1e-15);
    CHECK(c.at(1, 2, 4) == cplx{});
}

TEST_CASE("initial condition variance matches the partial zeta sum") {
    // closed form of the infinite sum is 1/24
    CHECK(initial_variance_partial_sum(100000) == doctest::Approx(1.0 / 24).epsilon(1e-5));
    const int km = 64, nx = 256, seeds = 600;
    const double ref = initial_variance_partial_sum(km);
    std::vector<double> var, c0, c1;
    const int lag1 = nx / 10;  // about 0.1
    for (int s = 1; s <= seeds; ++s) {
        const Field3 u = initial_field(sample_initial_condition(s, km), nx);
        double v = 0.0, mean = 0.0, a0 = 0.0, a1 = 0.0;
        for (int a = 0; a < 3; ++a)
            for (int i = 0; i < nx; ++i) {
                v += u.c[a][i] * u.c[a][i];
                mean += u.c[a][i];
                // same lag from two different origins
                a0 += u.c[a][i] * u.c[a][(i + lag1) % nx] * (i < nx / 2);
                a1 += u.c[a][i] * u.c[a][(i + lag1) % nx] * (i >= nx / 2);
            }
        CHECK(std::abs(mean) < 1e-12);
        var.push_back(v / (3 * nx));
        c0.push_back(a0 / (3 * nx / 2));
        c1.push_back(a1 / (3 * nx / 2));
    }
    const Stats sv = stats(var);
    CHECK(std::abs(sv.mean - ref) < 4 * sv.se);
    std::vector<double> d(seeds);
    for (int i = 0; i < seeds; ++i) d[i] = c0[i] - c1[i];
    const Stats sd = stats(d);
    CHECK(std::abs(sd.mean) < 4 * sd.se);
}

TEST_CASE("theta variance against the covariance quadrature") {
    const Cutoff chi = Cutoff::smootherstep();
    const double dt = 1.0 / 256;
    const int nx = 16, seeds = 400, lag_max = 512;
    const double ref = covariance_C(0, 2, 2.0, chi, 0.0, 0.0).value;
    std::vector<double> diag, cross, mean;
    for (int s = 1; s <= seeds; ++s) {
        const NoiseRealization w = sample_white_noise(s, {nx / 2 - 1, dt, lag_max + 1});
        const ThetaField th = sample_theta(w, nx, 0, 2, 2.0, chi, {lag_max});
        const Field3& f = th.samples[0];
        double d = 0.0, c = 0.0, m = 0.0;
        for (int i = 0; i < nx; ++i) {
            for (int a = 0; a < 3; ++a) {
                d += f.c[a][i] * f.c[a][i];
                m += f.c[a][i];
            }
            c += f.c[0][i] * f.c[1][i] + f.c[1][i] * f.c[2][i];
        }
        diag.push_back(d / (3 * nx));
        cross.push_back(c / (2 * nx));
        mean.push_back(f.c[0][3]);
    }
    const Stats sd = stats(diag), sc = stats(cross), sm = stats(mean);
    CHECK(std::abs(sd.mean - ref) < 4 * sd.se);
    CHECK(std::abs(sc.mean) < 4 * sc.se);
    CHECK(std::abs(sm.mean) < 4 * sm.se);
}

TEST_CASE("theta rejects coarse grids and short histories") {
    const Cutoff chi = Cutoff::smootherstep();
    const NoiseRealization w = sample_white_noise(1, {7, 1.0 / 64, 300});
    CHECK_THROWS(sample_theta(w, 16, 0, 2, 2.0, chi, {200}));
    const NoiseRealization w2 = sample_white_noise(1, {7, 1.0 / 256, 300});
    CHECK_THROWS(sample_theta(w2, 16, 0, 2, 2.0, chi, {100}));
}
