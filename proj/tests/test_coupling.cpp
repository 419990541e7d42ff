#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "kpz/coupling.hpp"

using namespace kpz;

namespace {

// Independent oracle: walk all 81 tuples (b1..b4) by decoding a flat index.
struct Brute {
    Vec3 M1{}, M2{}, tr{};
    Mat3 m{};
};

Brute brute(const CouplingTensor& M) {
    Brute r;
    for (int a = 0; a < 3; ++a) {
        for (int idx = 0; idx < 81; ++idx) {
            const int b1 = idx % 3, b2 = idx / 3 % 3, b3 = idx / 9 % 3, b4 = idx / 27;
            r.M1[a] += M(a, b1, b2) * M(b2, b3, b4) * M(b4, b1, b3);
            r.M2[a] += M(a, b1, b2) * M(b2, b3, b4) * M(b1, b3, b4);
        }
        for (int idx = 0; idx < 27; ++idx) {
            const int b = idx % 3, g = idx / 3 % 3, d = idx / 9;
            r.m[a][b] += M(a, g, d) * M(d, g, b);
        }
        for (int b = 0; b < 3; ++b) r.tr[a] += M(a, b, b);
    }
    return r;
}

std::array<Mat3, 3> random_symmetric(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::array<Mat3, 3> m{};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = b; c < 3; ++c) m[a][b][c] = m[a][c][b] = u(rng);
    return m;
}

void check_against_brute(const CouplingTensor& M) {
    const ContractionSet cs = contract(M);
    const Brute b = brute(M);
    for (int a = 0; a < 3; ++a) {
        CHECK(cs.calM1[a] == doctest::Approx(b.M1[a]).epsilon(1e-13));
        CHECK(cs.calM2[a] == doctest::Approx(b.M2[a]).epsilon(1e-13));
        CHECK(cs.trace_vector[a] == doctest::Approx(b.tr[a]).epsilon(1e-14));
        for (int c = 0; c < 3; ++c) CHECK(cs.frak_m[a][c] == doctest::Approx(b.m[a][c]).epsilon(1e-13));
    }
}

}  // namespace

TEST_CASE("contractions of the identity coupling") {
    const ContractionSet cs = contract(CouplingTensor::identity());
    for (int a = 0; a < 3; ++a) {
        CHECK(cs.calM1[a] == 3.0);
        CHECK(cs.calM2[a] == 9.0);
        CHECK(cs.trace_vector[a] == 3.0);
        for (int b = 0; b < 3; ++b) CHECK(cs.frak_m[a][b] == 1.0);
    }
    check_against_brute(CouplingTensor::identity());
}

TEST_CASE("contractions of the all-ones coupling") {
    const ContractionSet cs = contract(CouplingTensor::all_ones());
    for (int a = 0; a < 3; ++a) {
        CHECK(cs.calM1[a] == 81.0);
        CHECK(cs.calM2[a] == 81.0);
    }
}

TEST_CASE("zero coupling contracts to zero") {
    const ContractionSet cs = contract(CouplingTensor::zero());
    for (int a = 0; a < 3; ++a) {
        CHECK(cs.calM1[a] == 0.0);
        CHECK(cs.calM2[a] == 0.0);
        CHECK(cs.trace_vector[a] == 0.0);
        for (int b = 0; b < 3; ++b) CHECK(cs.frak_m[a][b] == 0.0);
    }
}

TEST_CASE("contract matches brute force on random tensors and sums") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const CouplingTensor A(random_symmetric(rng)), B(random_symmetric(rng));
        check_against_brute(A);
        check_against_brute(A + B);
        // trace and frak_m are linear / quadratic in M
        const ContractionSet ca = contract(A), c2 = contract(A.scaled(2.0));
        for (int a = 0; a < 3; ++a) {
            CHECK(c2.trace_vector[a] == doctest::Approx(2.0 * ca.trace_vector[a]));
            CHECK(c2.calM1[a] == doctest::Approx(8.0 * ca.calM1[a]));
        }
    }
}

TEST_CASE("total symmetry") {
    CHECK(is_totally_symmetric(CouplingTensor::all_ones()));
    CHECK_FALSE(is_totally_symmetric(CouplingTensor::identity()));
    std::array<Mat3, 3> m{};
    m[0][1][2] = m[0][2][1] = 1.0;
    CHECK_FALSE(is_totally_symmetric(CouplingTensor(m)));

    // symmetrizing a random tensor over all permutations gives calM1 == calM2 exactly
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double raw[3][3][3];
    for (auto& x : raw)
        for (auto& y : x)
            for (auto& z : y) z = u(rng);
    std::array<Mat3, 3> s{};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                s[a][b][c] = raw[a][b][c] + raw[a][c][b] + raw[b][a][c] + raw[b][c][a] + raw[c][a][b] + raw[c][b][a];
    const CouplingTensor S(s);
    REQUIRE(is_totally_symmetric(S));
    const ContractionSet cs = contract(S);
    for (int a = 0; a < 3; ++a) CHECK(cs.calM1[a] == doctest::Approx(cs.calM2[a]).epsilon(1e-14));
}

TEST_CASE("constructor rejects asymmetric or non-finite entries") {
    std::array<Mat3, 3> m{};
    m[1][0][2] = 1.0;
    CHECK_THROWS_AS(CouplingTensor{m}, std::invalid_argument);
    m[1][2][0] = 1.0;
    CHECK_NOTHROW(CouplingTensor{m});
    m[2][2][2] = std::nan("");
    CHECK_THROWS_AS(CouplingTensor{m}, std::invalid_argument);
}

TEST_CASE("parse_matrix") {
    const Mat3 m = CouplingTensor::parse_matrix("1 2 3; 2 5 6; 3 6 9");
    CHECK(m[1][2] == 6.0);
    CHECK(m[2][0] == 3.0);
    CHECK_THROWS(CouplingTensor::parse_matrix("1 2; 3 4"));
    CHECK_THROWS(CouplingTensor::parse_matrix("1 2 3; 4 5 6"));
}

TEST_CASE("apply_nonlinearity") {
    const CouplingTensor I = CouplingTensor::identity();
    const Vec3 e1 = apply_nonlinearity(I, {1.0, 0.0, 0.0});
    for (double v : e1) CHECK(v == 1.0);
    const Vec3 z = apply_nonlinearity(I, {0.0, 0.0, 0.0});
    for (double v : z) CHECK(v == 0.0);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const CouplingTensor M(random_symmetric(rng));
        const Vec3 phi{u(rng), u(rng), u(rng)};
        const Vec3 a = apply_nonlinearity(M, phi), b = apply_nonlinearity(M, {2 * phi[0], 2 * phi[1], 2 * phi[2]});
        const Vec3 bil = apply_bilinear(M, phi, phi);
        for (int c = 0; c < 3; ++c) {
            CHECK(b[c] == doctest::Approx(4.0 * a[c]));
            CHECK(bil[c] == doctest::Approx(a[c]));
        }
    }

    // array form agrees with the pointwise form
    const CouplingTensor M(random_symmetric(rng));
    std::array<std::vector<double>, 3> in, out;
    for (int a = 0; a < 3; ++a) {
        in[a] = {0.5, -1.0, 2.0, 0.25};
        out[a].assign(4, 0.0);
        in[a][a] += 1.0;
    }
    apply_nonlinearity(M, {in[0].data(), in[1].data(), in[2].data()}, {out[0].data(), out[1].data(), out[2].data()}, 4);
    for (int i = 0; i < 4; ++i) {
        const Vec3 ref = apply_nonlinearity(M, {in[0][i], in[1][i], in[2][i]});
        for (int a = 0; a < 3; ++a) CHECK(out[a][i] == doctest::Approx(ref[a]));
    }
}
