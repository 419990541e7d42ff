#pragma once

#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "kpz/coupling.hpp"
#include "kpz/cutoff.hpp"
#include "kpz/quadrature.hpp"

namespace kpz {

/// c_chi = (2^{7/2} sqrt(pi))^{-1} int_0^inf s^{-3/2} (1 - chi(s))^2 ds, the
/// coefficient of L^{N-n} in the Wick constant C_n^{(N)}(0,0).
QuadResult m1_scalar(const Cutoff& chi);

/// Same prefactor with the integrand 1 - chi(s)^2. Kept as a diagnostic: this
/// form does not cancel the linear divergence of C_n^{(N)}(0,0).
QuadResult m1_scalar_literal(const Cutoff& chi);

Vec3 compute_m1(const Cutoff& chi, const CouplingTensor& M);

/// (pi / sqrt 3)(calM2 - calM1).
Vec3 compute_m2(const CouplingTensor& M);

/// Line value of C_n^{(N)}(0,0) with L^{2m} = lambda:
/// (2^{7/2} sqrt(pi))^{-1} int s^{-3/2} (chi(s) - chi(lambda s))^2 ds.
QuadResult wick_constant_line(const Cutoff& chi, int m, double L);

/// C_n^{(N)}(0,0) trace_vector - L^{N-n} m1.
Vec3 wick_remainder(int n, int N, double L, const Cutoff& chi, const CouplingTensor& M);

/// The two third-order integrals in the scaled Fourier variables:
/// I1 = int (Y * theta C^2) Y, I2 = int (Y * theta J) C.
struct ThirdOrder {
    double I1 = 0.0;
    double I2 = 0.0;
    double err1 = 0.0;
    double err2 = 0.0;
};

ThirdOrder third_order_integrals(const Cutoff& chi, double eps, bool with_I2 = true);

/// mu_eps = I1.
QuadResult compute_mu_eps(const Cutoff& chi, double eps);

/// nu_eps = 4 calM2 I1 + 8 calM1 I2 - m2 log(1/eps), per component.
struct NuEntry {
    double eps = 0.0;
    Vec3 nu{};
    double I1 = 0.0;
    double I2 = 0.0;
    double error = 0.0;
};

NuEntry compute_nu(const Cutoff& chi, const CouplingTensor& M, double eps);

class NonCauchyError : public std::runtime_error {
public:
    NonCauchyError(const std::string& what, std::vector<NuEntry> table)
        : std::runtime_error(what), table_(std::move(table)) {}
    const std::vector<NuEntry>& table() const { return table_; }

private:
    std::vector<NuEntry> table_;
};

struct M3Result {
    Vec3 m3{};
    double residual = 0.0;
    std::vector<NuEntry> table;
};

/// Least-squares line through the last three (1/log(1/eps), nu) points;
/// the intercept is m3. Throws NonCauchyError when the consecutive
/// differences of nu do not decrease.
M3Result compute_m3(const Cutoff& chi, const CouplingTensor& M, const std::vector<double>& eps_seq);
M3Result m3_from_table(std::vector<NuEntry> table);

struct RenormConstants {
    Vec3 m1{};
    Vec3 m2{};
    Vec3 m3{};
    std::string chi_id;
    double quadrature_error = 0.0;
    double m3_extrapolation_residual = 0.0;
    std::vector<NuEntry> nu_table;
};

/// eps = 2^-5 .. 2^-8, the sequence used for m3 unless configured otherwise.
std::vector<double> default_m3_eps();

RenormConstants compute_constants(const Cutoff& chi, const CouplingTensor& M,
                                  const std::vector<double>& eps_seq);

/// m2 and m3 come out of momentum integrals written without the 1/(2 pi)
/// per loop; the equation on the unit torus sees them divided by (2 pi)^2.
inline constexpr double kTwoLoopFactor = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi);

/// (m2 log_term + m3) in solver normalization.
Vec3 log_constant(const RenormConstants& rc, double log_term);

/// m1/eps + kTwoLoopFactor (m2 log(1/eps) + m3); eps in (0,1].
Vec3 counterterm(const RenormConstants& rc, double eps);

/// Same, rejecting constants computed for another cutoff.
Vec3 counterterm(const RenormConstants& rc, double eps, const Cutoff& chi);

}  // namespace kpz
