#include <cmath>
#include <numbers>

#include "kpz/kernels.hpp"

namespace kpz {

namespace {

double wrap_centered(double x, double period) {
    double y = std::fmod(x, period);
    if (y < -0.5 * period) y += period;
    if (y >= 0.5 * period) y -= period;
    return y;
}

}  // namespace

WProfile::WProfile(double eps, const Cutoff& chi, double t, double r_max, double dr)
    : eps_(eps), t_(t), dr_(dr), chi_(&chi) {
    const int nr = static_cast<int>(std::lround(r_max / dr));
    r_.resize(nr);
    hat_.assign(nr, 0.0);
    for (int j = 0; j < nr; ++j) r_[j] = (j + 0.5) * dr;
    if (!(t > 0.0) || chi_eps(chi, eps, t) == 0.0) return;
    for (int j = 0; j < nr; ++j) hat_[j] = hat(r_[j]);
}

double WProfile::hat(double r) const {
    const double ce = chi_eps(*chi_, eps_, t_);
    if (ce == 0.0) return 0.0;
    const double c = -0.5 * r, st = std::sqrt(t_);
    std::vector<double> pts = {c - 7.0, c + 7.0, 0.0};
    for (double f : {0.25, 0.5, 1.0, 2.0}) {
        pts.push_back(f * st);
        pts.push_back(-f * st);
        pts.push_back(f * st / eps_);
        pts.push_back(-f * st / eps_);
    }
    for (double d = -6.0; d <= 6.0; d += 1.0) pts.push_back(c + d);
    const auto br = clip_breaks(c - 7.0, c + 7.0, pts);
    auto f = [&](double q) {
        const double e = std::exp(-((r + q) * (r + q) + q * q));
        return (r + q) * e * h_eps_fast(eps_, *chi_, t_, q);
    };
    const double v = gl_integrate_pieces(f, br, gauss_legendre(15));
    return ce * v / (r * 2.0 * std::numbers::pi);
}

double WProfile::W(double x) const {
    const double y = x / std::sqrt(t_);
    double s = 0.0;
    for (std::size_t j = 0; j < r_.size(); ++j) s += std::cos(r_[j] * y) * hat_[j];
    return s * dr_ / std::numbers::pi / t_;
}

double WProfile::dW(double x) const {
    const double y = x / std::sqrt(t_);
    double s = 0.0;
    for (std::size_t j = 0; j < r_.size(); ++j) s -= r_[j] * std::sin(r_[j] * y) * hat_[j];
    return s * dr_ / std::numbers::pi / (t_ * std::sqrt(t_));
}

JDecomposition J_decomposition(int n, int N, double L, const Cutoff& chi, double t, double x) {
    JDecomposition out;
    const double eps = std::pow(L, -(N - n));
    if (!(t > 0.0) || N == n) return out;
    const double y = Y_kernel(n, N, L, chi, t, x);
    if (y != 0.0) {
        const QuadResult c = covariance_C(n, N, L, chi, t, x);
        out.J = y * c.value;
        out.error = std::abs(y) * c.error;
    }
    const WProfile prof(eps, chi, t);
    const double xw = wrap_centered(x, std::pow(L, n));
    out.W = prof.W(xw);
    out.dW = prof.dW(xw);
    out.j = out.J - out.dW;
    return out;
}

}  // namespace kpz
