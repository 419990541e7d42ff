#include "kpz/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kpz {

namespace {

double wrap(double x, double period) {
    double y = std::fmod(x, period);
    if (y < -0.5 * period) y += period;
    if (y >= 0.5 * period) y -= period;
    return y;
}

double Lpow(double L, int n) { return std::pow(L, n); }

}  // namespace

HeatDerivs heat_torus_derivs(double period, double t, double x, double tol) {
    if (!(t > 0.0)) throw std::invalid_argument("heat kernel requires t > 0");
    const double y = wrap(x, period);
    const double pref = 1.0 / std::sqrt(4.0 * std::numbers::pi * t);
    HeatDerivs d;
    if (t > period * period / (4.0 * std::numbers::pi)) {
        // Fourier series converges faster and keeps relative accuracy in the tails
        d.h = 1.0 / period;
        for (int k = 1;; ++k) {
            const double p = 2.0 * std::numbers::pi * k / period;
            const double e = 2.0 / period * std::exp(-t * p * p);
            d.h += e * std::cos(p * y);
            d.hx -= e * p * std::sin(p * y);
            d.hxx -= e * p * p * std::cos(p * y);
            if (e * (1.0 + p + p * p) < tol * 1e-3) break;
        }
        return d;
    }
    auto add = [&](double z) {
        const double g = pref * std::exp(-z * z / (4.0 * t));
        const double a = -z / (2.0 * t);
        d.h += g;
        d.hx += a * g;
        d.hxx += (a * a - 1.0 / (2.0 * t)) * g;
        // magnitude bound including the polynomial factors
        return g * (1.0 + std::abs(a) + a * a + 1.0 / (2.0 * t));
    };
    add(y);
    for (int i = 1;; ++i) {
        const double mp = add(y + i * period);
        const double mm = add(y - i * period);
        if (std::max(mp, mm) < tol && i * period > std::abs(y) + std::sqrt(2.0 * t)) break;
        if (i > 100000) break;
    }
    return d;
}

double heat_kernel_torus(int n, double L, double t, double x, double tol) {
    return heat_torus_derivs(Lpow(L, n), t, x, tol).h;
}

double Y_kernel(int n, int N, double L, const Cutoff& chi, double t, double x) {
    if (t <= 0.0) return 0.0;
    const double c = chi_m(chi, N - n, L, t);
    if (c == 0.0) return 0.0;
    return heat_torus_derivs(Lpow(L, n), t, x).hx * c;
}

namespace {

QuadResult covariance_impl(double period, const std::function<double(double)>& upper,
                           const std::function<double(double)>& lower, double lo_scale,
                           double lo_end, double hi_end, double t, double x,
                           const QuadOptions& opt) {
    t = std::abs(t);
    // tau support: lower(tau) != 0 needs tau > lo_scale, upper(t+tau) != 0 needs t+tau < hi_end
    const double a = lo_scale, b = hi_end - t;
    if (!(b > a)) return {};
    auto f = [&](double tau) {
        const double w = upper(t + tau) * lower(tau);
        if (w == 0.0) return 0.0;
        return -heat_torus_derivs(period, t + 2.0 * tau, x).hxx * w;
    };
    std::vector<double> br = {lo_scale, lo_end, 1.0, hi_end, lo_scale - t, lo_end - t, 1.0 - t};
    return integrate(f, a, b, br, opt);
}

}  // namespace

QuadResult covariance_C(int n, int N, double L, const Cutoff& chi, const Cutoff& chi_low,
                        double t, double x, const QuadOptions& opt) {
    if (N < n) throw std::invalid_argument("covariance_C requires N >= n");
    const int m = N - n;
    if (m == 0) return {};
    const double s = Lpow(L, 2 * m);
    auto upper = [&](double u) { return chi_m(chi, m, L, u); };
    auto lower = [&](double u) { return chi(u) - chi_low(s * u); };
    return covariance_impl(Lpow(L, n), upper, lower, 1.0 / s, chi_low.transition_end() / s,
                           chi.transition_end(), t, x, opt);
}

QuadResult covariance_C(int n, int N, double L, const Cutoff& chi, double t, double x,
                        const QuadOptions& opt) {
    return covariance_C(n, N, L, chi, chi, t, x, opt);
}

QuadResult covariance_C_limit(int n, double L, const Cutoff& chi, double t, double x,
                              const QuadOptions& opt) {
    const double period = Lpow(L, n), ta = std::abs(t);
    if (ta == 0.0 && wrap(x, period) == 0.0)
        throw std::domain_error("covariance_C_limit diverges at the origin");
    const double b = chi.transition_end() - ta;
    if (!(b > 0.0)) return {};
    auto f = [&](double tau) {
        const double w = chi(ta + tau) * chi(tau);
        if (w == 0.0) return 0.0;
        return -heat_torus_derivs(period, ta + 2.0 * tau, x).hxx * w;
    };
    // dyadic breaks toward tau = 0, where the kernel concentrates for small t
    std::vector<double> br = {1.0 - ta, 1.0, chi.transition_end()};
    for (double s = 0.5; s > 1e-14; s *= 0.25) br.push_back(s);
    // hxx changes sign near 2 tau + t = x^2
    const double xw = wrap(x, period), x2 = xw * xw;
    for (double s = x2 / 64; s < 16 * x2; s *= 2) br.push_back(s);
    return integrate(f, 0.0, b, br, opt);
}

double Gamma_kernel(int n, double L, const Cutoff& chi, double t, double x) {
    if (t <= 0.0) return 0.0;
    const double c = chi(t) - chi(L * L * t);
    if (c == 0.0) return 0.0;
    return heat_torus_derivs(Lpow(L, n), t, x).h * c;
}

double Upsilon_kernel(int n, double L, const Cutoff& chi, double t, double x) {
    if (t <= 0.0) return 0.0;
    const double c = chi(t) - chi(L * L * t);
    if (c == 0.0) return 0.0;
    return heat_torus_derivs(Lpow(L, n), t, x).hx * c;
}

double G_eps_multiplier(double eps, const Cutoff& chi, double t, double p) {
    if (t <= 0.0) return 0.0;
    const double c = 1.0 - chi(t / (eps * eps));
    if (c == 0.0) return 0.0;
    return std::exp(-t * p * p) * c;
}

double K1(double t) { return 0.5 * std::exp(-std::abs(t)); }

double K2(double period, double x) {
    const double y = wrap(x, period);
    double s = K1(y);
    for (int i = 1;; ++i) {
        const double a = K1(y + i * period), b = K1(y - i * period);
        s += a + b;
        if (std::max(a, b) < kImageTol) break;
    }
    return s;
}

double K_smoothing(int n, double L, double t, double x) { return K1(t) * K2(Lpow(L, n), x); }

namespace {

// Support of sigma -> chi_eps((1+sigma)t) chi_eps(sigma t), written in x = sigma t.
std::vector<double> h_breaks(double eps, const Cutoff& chi, double t) {
    const double e2 = eps * eps, b = chi.transition_end();
    return {e2, b * e2, 1.0, b, e2 - t, b * e2 - t, 1.0 - t, b - t};
}

}  // namespace

QuadResult h_eps(double eps, const Cutoff& chi, double t, double p, const QuadOptions& opt) {
    if (!(t > 0.0)) throw std::invalid_argument("h_eps requires t > 0");
    const double b = chi.transition_end();
    const double lo = eps * eps, hi = b - t;
    if (p == 0.0 || !(hi > lo)) return {};
    const double beta = 2.0 * p * p / t;
    auto f = [&](double x) {
        return std::exp(-beta * x) * chi_eps(chi, eps, t + x) * chi_eps(chi, eps, x);
    };
    std::vector<double> br = h_breaks(eps, chi, t);
    // resolve the exponential decay scale
    for (double k = 1.0; k < 64.0 && lo + k / beta < hi; k *= 2.0) br.push_back(lo + k / beta);
    QuadResult r = integrate(f, lo, hi, br, opt);
    const double s = p * p / t;
    return {r.value * s, r.error * s};
}

double h_eps_fast(double eps, const Cutoff& chi, double t, double p) {
    if (p == 0.0 || !(t > 0.0)) return 0.0;
    const double b = chi.transition_end(), e2 = eps * eps;
    const double lo = e2, hi = b - t;
    if (!(hi > lo)) return 0.0;
    const double beta = 2.0 * p * p / t;
    const std::vector<double> br = clip_breaks(lo, hi, h_breaks(eps, chi, t));
    const GLRule& rule = gauss_legendre(15);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        const double a = br[i], c = br[i + 1];
        if (!(c > a)) continue;
        const double ea = std::exp(-beta * a);
        if (ea < 1e-300) break;
        const double m = 0.5 * (a + c);
        const bool flat = m >= b * e2 && m <= 1.0 && t + m >= b * e2 && t + m <= 1.0;
        if (flat) {
            // both cutoff factors equal 1 on this piece
            sum += (ea - std::exp(-beta * c)) / beta;
            continue;
        }
        const int nsub = std::clamp(static_cast<int>(std::ceil(beta * (c - a) / 8.0)), 1, 256);
        const double h = (c - a) / nsub;
        for (int j = 0; j < nsub; ++j) {
            const double u = a + j * h;
            if (std::exp(-beta * u) < 1e-18 * (sum > 0 ? sum * beta : 1.0)) break;
            sum += gl_integrate(
                [&](double x) {
                    return std::exp(-beta * x) * chi_eps(chi, eps, t + x) * chi_eps(chi, eps, x);
                },
                u, u + h, rule);
        }
    }
    return sum * p * p / t;
}

KernelKind kernel_kind_from_name(const std::string& name) {
    if (name == "H" || name == "heat") return KernelKind::Heat;
    if (name == "Y") return KernelKind::Y;
    if (name == "C") return KernelKind::C;
    if (name == "Gamma") return KernelKind::Gamma;
    if (name == "Upsilon") return KernelKind::Upsilon;
    if (name == "K") return KernelKind::K;
    if (name == "J") return KernelKind::J;
    if (name == "W") return KernelKind::W;
    if (name == "j") return KernelKind::jsmooth;
    throw std::invalid_argument("unknown kernel: " + name);
}

std::string kernel_name(KernelKind k) {
    switch (k) {
        case KernelKind::Heat: return "H";
        case KernelKind::Y: return "Y";
        case KernelKind::C: return "C";
        case KernelKind::Gamma: return "Gamma";
        case KernelKind::Upsilon: return "Upsilon";
        case KernelKind::K: return "K";
        case KernelKind::J: return "J";
        case KernelKind::W: return "W";
        case KernelKind::jsmooth: return "j";
    }
    return "?";
}

}  // namespace kpz
