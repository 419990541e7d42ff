#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "kpz/cutoff.hpp"
#include "kpz/quadrature.hpp"

namespace kpz {

constexpr double kImageTol = 1e-14;

/// H, dH/dx, d2H/dx2 of the heat kernel on a torus of the given period.
struct HeatDerivs {
    double h = 0.0;
    double hx = 0.0;
    double hxx = 0.0;
};

HeatDerivs heat_torus_derivs(double period, double t, double x, double tol = kImageTol);

/// H_n(t,x) on the torus of circumference L^n. Throws for t <= 0.
double heat_kernel_torus(int n, double L, double t, double x, double tol = kImageTol);

/// Y_n^{(N)}(t,x) = dH_n/dx(t,x) chi_{N-n}(t); zero for t <= 0.
double Y_kernel(int n, int N, double L, const Cutoff& chi, double t, double x);

/// C_n^{(N)}(t,x) = -Lap int H_n(t+2tau,x) chi_{N-n}(t+tau) chi'_{N-n}(tau) dtau,
/// chi'_{N-n}(s) = chi(s) - chi_low(L^{2(N-n)} s). Uses |t|.
QuadResult covariance_C(int n, int N, double L, const Cutoff& chi, const Cutoff& chi_low,
                        double t, double x, const QuadOptions& opt = {});
QuadResult covariance_C(int n, int N, double L, const Cutoff& chi, double t, double x,
                        const QuadOptions& opt = {});

/// Same integral with the lower cutoff removed (the N -> infinity limit).
QuadResult covariance_C_limit(int n, double L, const Cutoff& chi, double t, double x,
                              const QuadOptions& opt = {});

/// Gamma(t,x) = H_n(t,x)(chi(t) - chi(L^2 t)) and its x-derivative Upsilon.
double Gamma_kernel(int n, double L, const Cutoff& chi, double t, double x);
double Upsilon_kernel(int n, double L, const Cutoff& chi, double t, double x);

/// Fourier multiplier of G_eps: e^{-t p^2}(1 - chi(t/eps^2)), zero for t < 0.
double G_eps_multiplier(double eps, const Cutoff& chi, double t, double p);

/// K(t,x) = K1(t) K2(x), K1 = e^{-|t|}/2, K2 its periodization with period L^n.
double K_smoothing(int n, double L, double t, double x);
double K1(double t);
double K2(double period, double x);

/// h_eps(t,p) = p^2 int_0^inf e^{-2 sigma p^2} chi_eps((1+sigma)t) chi_eps(sigma t) dsigma.
QuadResult h_eps(double eps, const Cutoff& chi, double t, double p, const QuadOptions& opt = {});

/// Fixed-rule evaluation of h_eps used inside nested integrals.
double h_eps_fast(double eps, const Cutoff& chi, double t, double p);

/// J = Y C, its line decomposition J = dW/dx + j, and W itself.
struct JDecomposition {
    double J = 0.0;
    double W = 0.0;
    double dW = 0.0;
    double j = 0.0;
    double error = 0.0;
};

/// Profile of W_eps(t, .) at fixed t, built from the Fourier representation
/// W_eps(t,x) = t^{-1} cal W(t, x/sqrt t) by trapezoidal inversion.
class WProfile {
public:
    WProfile(double eps, const Cutoff& chi, double t, double r_max = 12.0, double dr = 0.05);
    double W(double x) const;
    double dW(double x) const;
    /// Transform hat cal W(t, r) (with the 1/2pi of the product rule included).
    double hat(double r) const;
    double t() const { return t_; }

private:
    double eps_, t_, dr_;
    std::vector<double> r_, hat_;
    const Cutoff* chi_;
};

JDecomposition J_decomposition(int n, int N, double L, const Cutoff& chi, double t, double x);

enum class KernelKind { Heat, Y, C, Gamma, Upsilon, K, J, W, jsmooth };

KernelKind kernel_kind_from_name(const std::string& name);
std::string kernel_name(KernelKind k);

/// Tabulated kernel on a (t, x) lattice, t-major.
struct KernelTable {
    std::string kernel;
    int n = 0;
    int N = 0;
    double L = 2.0;
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> value;
    std::vector<double> error;
    double quadrature_error = 0.0;

    double at(std::size_t it, std::size_t ix) const { return value[it * x.size() + ix]; }
    void write_csv(std::ostream& os) const;
};

KernelTable build_kernel_table(KernelKind kind, int n, int N, double L, const Cutoff& chi,
                               const std::vector<double>& t, const std::vector<double>& x);

}  // namespace kpz
