#include <doctest.h>

#include <cmath>
#include <sstream>

#include "kpz/norms.hpp"
#include "kpz/rgflow.hpp"
#include "kpz/solver.hpp"

using namespace kpz;

namespace {

const Cutoff kChi = Cutoff::smootherstep();

RGConfig small_config(int m = 0) {
    RGConfig cfg;
    cfg.N = 2;
    cfg.m = m;
    cfg.nx = 16;
    cfg.dt = 1.0 / 128;
    cfg.nt = 32;
    return cfg;
}

CouplingTensor generic() {
    std::array<Mat3, 3> m{};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) m[a][b][c] = 0.3 + 0.2 * ((a + b + c) % 3) + 0.5 * (b == c);
    return CouplingTensor(m);
}

SpaceTimeField smooth_field(int nt, int nx, double amp, int shift) {
    SpaceTimeField f(nt, nx);
    for (int a = 0; a < 3; ++a)
        for (int it = 0; it < nt; ++it)
            for (int ix = 0; ix < nx; ++ix)
                f.at(a, it, ix) = amp * std::sin(2.0 * M_PI * (ix + shift + a) / nx) *
                                  std::cos(M_PI * it / nt + a);
    return f;
}

double max_abs_diff(const SpaceTimeField& a, const SpaceTimeField& b) { return (a - b).sup(); }

bool is_constant(const SpaceTimeField& f, const Vec3& v, double tol) {
    for (int a = 0; a < 3; ++a)
        for (double x : f.c[a])
            if (std::abs(x - v[a]) > tol) return false;
    return true;
}

}  // namespace

TEST_CASE("scale_S acts on monomials by L^{3/2 - k/2}") {
    const SpaceTimeField phi = smooth_field(4, 8, 0.75, 1);
    for (double L : {2.0, 3.0})
        for (int k = 0; k <= 3; ++k) {
            const SpaceTimeField got = scale_S(monomial_evaluator(k), L)(phi);
            const SpaceTimeField ref = std::pow(L, 1.5 - 0.5 * k) * monomial_evaluator(k)(phi);
            CHECK(max_abs_diff(got, ref) <= 1e-14 * std::max(1.0, ref.sup()));
        }
    CHECK_THROWS(monomial_evaluator(-1));
}

TEST_CASE("scale_field and unscale_field are inverse") {
    const RGConfig cfg = small_config();
    const RGTower tower(cfg, kChi, CouplingTensor::identity(), Vec3{}, nullptr);
    const FrameField phi{tower.frame(1), smooth_field(cfg.nt, cfg.nx, 1.3, 2)};
    const FrameField up = scale_field(phi);
    CHECK(up.frame.n == 2);
    const FrameField back = unscale_field(up);
    CHECK(back.frame.n == 1);
    CHECK(max_abs_diff(back.v, phi.v) <= 1e-15 * phi.v.sup());
    CHECK_THROWS(scale_field(up));
    CHECK_THROWS(unscale_field(FrameField{tower.frame(0), phi.v}));
}

TEST_CASE("frame validation") {
    ScaleFrame f{2, 2, 0, 2.0, 16, 32, 1.0 / 128};
    CHECK_NOTHROW(f.validate());
    f.dt = 1.0 / 64;
    CHECK_THROWS(f.validate());
    f.dt = 1.0 / 128;
    f.nx = 2;
    CHECK_THROWS(f.validate());
    f.nx = 16;
    f.L = 2.5;
    CHECK_THROWS(f.validate());
    CHECK(ScaleFrame{1, 2, 0, 2.0, 16, 32, 1.0 / 128}.period() == doctest::Approx(2.0));
}

TEST_CASE("constants flow with eigenvalue L^{3/2}") {
    const RGConfig cfg = small_config();
    const Vec3 C{1.0, -2.0, 0.5};
    const RGTower tower(cfg, kChi, CouplingTensor::zero(), C, nullptr);
    for (int n = cfg.N; n >= 0; --n) {
        const double s = std::pow(cfg.L, -1.5 * n);
        CHECK(is_constant(tower.w(n, tower.zero()), Vec3{-s * C[0], -s * C[1], -s * C[2]}, 1e-12));
    }
    // Constants are all of w_n, so the perturbative remainder vanishes.
    const auto rows = flow_report(tower, Vec3{}, C);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) CHECK(r.r <= 1e-12);
}

TEST_CASE("without feedback one step is the scaled finest nonlinearity") {
    RGConfig cfg = small_config();
    cfg.feedback = false;
    const CouplingTensor M = generic();
    const Vec3 C{0.2, 0.1, -0.3};
    const NoiseRealization noise = sample_white_noise(3, {cfg.nx / 2 - 1, cfg.dt, cfg.nt + 8});
    const RGTower tower(cfg, kChi, M, C, &noise);
    const int n = cfg.N - 1;
    const SpaceTimeField A = smooth_field(cfg.nt, cfg.nx, 0.4, 0);
    const double L = cfg.L;
    const SpaceTimeField psi = (1.0 / std::sqrt(L)) * (A + tower.upsilon_xi(n));
    SpaceTimeField ref = std::pow(L, -0.5 * cfg.N) * dealiased_product(M, psi, psi);
    for (int a = 0; a < 3; ++a)
        for (double& x : ref.c[a]) x -= std::pow(L, -1.5 * cfg.N) * C[a];
    ref *= L * std::sqrt(L);
    CHECK(max_abs_diff(tower.w(n, A), ref) <= 1e-12 * std::max(1.0, ref.sup()));
}

TEST_CASE("Picard fixed point satisfies the step equation") {
    const RGConfig cfg = small_config();
    const NoiseRealization noise = sample_white_noise(7, {cfg.nx / 2 - 1, cfg.dt, cfg.nt + 8});
    const RGTower tower(cfg, kChi, generic(), Vec3{0.1, 0.1, 0.1}, &noise);
    for (int n = cfg.N - 1; n >= cfg.m; --n) {
        const StepCheck sc = tower.check_step(n, tower.test_fields(n, 3, 11 + n));
        REQUIRE(sc.residuals.size() == 3);
        for (double r : sc.residuals) CHECK(r < 2 * cfg.tol);
        const SpaceTimeField A = tower.test_fields(n, 2, 5)[1];
        CHECK(tower.one_shot_defect(n, A, tower.w(n, A)) < 1e-6);
    }
}

TEST_CASE("test fields: zero first, sup norm amp R_n") {
    const RGConfig cfg = small_config();
    const RGTower tower(cfg, kChi, generic(), Vec3{}, nullptr);
    const auto fs = tower.test_fields(1, 4, 9, 0.5);
    REQUIRE(fs.size() == 4);
    CHECK(fs[0].sup() == 0.0);
    const double R = std::pow(cfg.L, 2 * cfg.gamma);
    for (std::size_t i = 1; i < fs.size(); ++i) CHECK(fs[i].sup() == doctest::Approx(0.5 * R));
}

TEST_CASE("perturbative pieces") {
    const RGConfig cfg = small_config();
    const NoiseRealization noise = sample_white_noise(2, {cfg.nx / 2 - 1, cfg.dt, cfg.nt + 8});
    const CouplingTensor M = generic();
    const Vec3 m1{0.3, 0.3, 0.3}, c3{0.2, -0.1, 0.4};
    const int n = 1;

    SUBCASE("u1 is quadratic") {
        const RGTower tower(cfg, kChi, M, Vec3{}, &noise);
        const SpaceTimeField phi = smooth_field(cfg.nt, cfg.nx, 0.3, 3);
        auto u = [&](double s) { return tower.u1(n, s * phi, m1); };
        const SpaceTimeField d1 = u(2) - 2.0 * u(1) + u(0);
        const SpaceTimeField d2 = u(3) - 2.0 * u(2) + u(1);
        CHECK(max_abs_diff(d1, d2) <= 1e-12 * std::max(1.0, d1.sup()));
    }
    SUBCASE("no noise and m1 = 0: u2 and its derivative vanish at zero") {
        const RGTower tower(cfg, kChi, M, Vec3{}, nullptr);
        CHECK(tower.u2(n, tower.zero(), Vec3{}).sup() == 0.0);
        CHECK(tower.Du2_zero(n, smooth_field(cfg.nt, cfg.nx, 1.0, 1), Vec3{}).sup() == 0.0);
    }
    SUBCASE("M = 0: u1 and u3 are the counterterm constants") {
        const RGTower tower(cfg, kChi, CouplingTensor::zero(), Vec3{}, &noise);
        const SpaceTimeField phi = smooth_field(cfg.nt, cfg.nx, 0.5, 0);
        const double L = cfg.L, a = std::pow(L, -0.5 * n + cfg.N - n), b = std::pow(L, -1.5 * n);
        CHECK(is_constant(tower.u1(n, phi, m1), Vec3{-a * m1[0], -a * m1[1], -a * m1[2]}, 1e-14));
        CHECK(is_constant(tower.u3(n, phi, m1, c3), Vec3{-b * c3[0], -b * c3[1], -b * c3[2]}, 1e-14));
    }
    SUBCASE("parts add up to w") {
        const RGTower tower(cfg, kChi, M, Vec3{0.1, 0.2, 0.3}, &noise);
        const PerturbativeParts p = tower.parts(n, m1, c3);
        const SpaceTimeField sum = p.u1 + p.u2 + p.u3 + p.r;
        CHECK(max_abs_diff(sum, p.w) <= 1e-12 * std::max(1.0, p.w.sup()));
    }
}

TEST_CASE("reconstruction matches the direct solve") {
    const RGConfig cfg = small_config(1);
    const CouplingTensor M = generic();
    const Vec3 C{0.4, 0.2, -0.1};
    const NoiseRealization noise = sample_white_noise(4, {cfg.nx / 2 - 1, cfg.dt, cfg.nt + 8});
    const RGTower tower(cfg, kChi, M, C, &noise);
    const SpaceTimeField f = tower.reconstruct();
    const double eps = std::pow(cfg.L, -cfg.N);
    const Trajectory tr = solve_with_noise(eps, cfg.nt * cfg.dt, M, C, kChi, {cfg.nx, cfg.dt}, &noise,
                                           Field3(cfg.nx), 1);
    const SpaceTimeField g = std::pow(cfg.L, -0.5 * cfg.m) * trajectory_gradient(tr.snapshots, cfg.nt);
    const ScaleFrame fr = tower.frame(cfg.m);
    const double d = vn_norm(f - g, fr.frame_dt(), fr.period()).value;
    const double s = vn_norm(g, fr.frame_dt(), fr.period()).value;
    CHECK(d <= 1e-6 * s);

    const auto amps = tower.reconstruction_amplitudes();
    CHECK(amps.size() == static_cast<std::size_t>(cfg.N - cfg.m + 1));
    for (double a : amps) CHECK(std::isfinite(a));
}

TEST_CASE("flow report CSV") {
    const RGConfig cfg = small_config();
    const RGTower tower(cfg, kChi, CouplingTensor::identity(), Vec3{}, nullptr);
    std::ostringstream os;
    write_flow_csv(flow_report(tower, Vec3{}, Vec3{}), os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "n,u1_norm,u2_norm,u3_norm,r_norm,picard_iterations,residual");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == cfg.N - cfg.m + 1);
}
