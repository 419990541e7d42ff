#include <doctest.h>

#include <cmath>
#include <sstream>

#include "kpz/mc.hpp"
#include "kpz/noise.hpp"

using namespace kpz;

namespace {

// Deterministic pseudo-Gaussian pair from a seed (Box-Muller on splitmix output).
std::vector<double> gaussian_sampler(std::uint64_t seed) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    const double u1 = (static_cast<double>(mix(2 * seed) >> 11) + 0.5) / 9007199254740992.0;
    const double u2 = (static_cast<double>(mix(2 * seed + 1) >> 11) + 0.5) / 9007199254740992.0;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(2 * M_PI * u2), 3.0 + r * std::sin(2 * M_PI * u2)};
}

}  // namespace

TEST_CASE("jackknife error of the mean equals s / sqrt(n)") {
    const int n = 10;
    const auto est = mc_estimate("x", [](std::uint64_t s) { return std::vector<double>{double(s * s)}; },
                                 {"sq"}, n, 1, 1);
    double mean = 0.0, var = 0.0;
    for (int i = 1; i <= n; ++i) mean += double(i * i) / n;
    for (int i = 1; i <= n; ++i) var += (i * i - mean) * (i * i - mean) / (n - 1);
    CHECK(est.ensemble == n);
    CHECK(est.mean[0] == doctest::Approx(mean).epsilon(1e-14));
    CHECK(est.std_error[0] == doctest::Approx(std::sqrt(var / n)).epsilon(1e-12));
}

TEST_CASE("estimates do not depend on the thread count") {
    const auto a = mc_estimate("g", gaussian_sampler, {"a", "b"}, 200, 7, 1);
    const auto b = mc_estimate("g", gaussian_sampler, {"a", "b"}, 200, 7, 3);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("standard error scales as 1/sqrt(ensemble)") {
    const auto a = mc_estimate("g", gaussian_sampler, {"a", "b"}, 1000, 1, 1);
    const auto b = mc_estimate("g", gaussian_sampler, {"a", "b"}, 4000, 1, 1);
    for (int i = 0; i < 2; ++i) CHECK(a.std_error[i] / b.std_error[i] == doctest::Approx(2.0).epsilon(0.1));
    CHECK(std::abs(b.mean[1] - 3.0) < 4 * b.std_error[1]);
}

TEST_CASE("theta covariance agrees with the quadrature reference") {
    const Cutoff chi = Cutoff::smootherstep();
    const ThetaSetup s = default_theta_setup(1, 2, 2.0, 0.25);
    const auto est = theta_covariance_mc(s, chi, {{0.0, 0.0}, {0.0625, 0.125}}, 100, 1, 1);
    REQUIRE(est.reference.size() == 2);
    for (int i = 0; i < 2; ++i) {
        CHECK(est.std_error[i] > 0.0);
        CHECK(std::abs(est.mean[i] - est.reference[i]) < 4 * est.std_error[i]);
    }
    std::ostringstream os;
    est.write_csv(os);
    CHECK(os.str().rfind("field,label,mean,std_error,reference,ensemble\n", 0) == 0);
}

TEST_CASE("theta grid follows the resolution rules") {
    const ThetaSetup s = default_theta_setup(1, 3, 2.0, 1.0);
    CHECK(s.dt_frame == 1.0 / 256);
    CHECK(2.0 / s.nx <= 1.0 / 16);
    CHECK(s.nt * s.dt_frame >= 1.0);
    CHECK_THROWS(default_theta_setup(3, 3, 2.0, 1.0));
}
