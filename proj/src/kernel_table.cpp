#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <optional>

#include "kpz/kernels.hpp"

namespace kpz {

void KernelTable::write_csv(std::ostream& os) const {
    os << "t,x,value,error\n";
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t k = 0; k < x.size(); ++k) {
            const std::size_t idx = i * x.size() + k;
            fmt::print(os, "{:.17g},{:.17g},{:.17g},{:.3e}\n", t[i], x[k], value[idx], error[idx]);
        }
}

KernelTable build_kernel_table(KernelKind kind, int n, int N, double L, const Cutoff& chi,
                               const std::vector<double>& t, const std::vector<double>& x) {
    KernelTable tab;
    tab.kernel = kernel_name(kind);
    tab.n = n;
    tab.N = N;
    tab.L = L;
    tab.t = t;
    tab.x = x;
    tab.value.assign(t.size() * x.size(), 0.0);
    tab.error.assign(t.size() * x.size(), 0.0);
    const double eps = std::pow(L, -(N - n));
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::optional<WProfile> prof;
        const bool needs_w = kind == KernelKind::W || kind == KernelKind::jsmooth;
        if (needs_w && t[i] > 0.0) prof.emplace(eps, chi, t[i]);
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double ti = t[i], xk = x[k];
            double v = 0.0, e = 0.0;
            switch (kind) {
                case KernelKind::Heat: v = heat_kernel_torus(n, L, ti, xk); break;
                case KernelKind::Y: v = Y_kernel(n, N, L, chi, ti, xk); break;
                case KernelKind::C: {
                    const QuadResult r = covariance_C(n, N, L, chi, ti, xk);
                    v = r.value;
                    e = r.error;
                    break;
                }
                case KernelKind::Gamma: v = Gamma_kernel(n, L, chi, ti, xk); break;
                case KernelKind::Upsilon: v = Upsilon_kernel(n, L, chi, ti, xk); break;
                case KernelKind::K: v = K_smoothing(n, L, ti, xk); break;
                case KernelKind::J:
                case KernelKind::jsmooth: {
                    const double y = Y_kernel(n, N, L, chi, ti, xk);
                    if (y != 0.0) {
                        const QuadResult r = covariance_C(n, N, L, chi, ti, xk);
                        v = y * r.value;
                        e = std::abs(y) * r.error;
                    }
                    if (kind == KernelKind::jsmooth && prof) {
                        const double P = std::pow(L, n);
                        double xw = std::fmod(xk, P);
                        if (xw < -0.5 * P) xw += P;
                        if (xw >= 0.5 * P) xw -= P;
                        v -= prof->dW(xw);
                    }
                    break;
                }
                case KernelKind::W:
                    if (prof) v = prof->W(xk);
                    break;
            }
            tab.value[i * x.size() + k] = v;
            tab.error[i * x.size() + k] = e;
            tab.quadrature_error = std::max(tab.quadrature_error, e);
        }
    }
    return tab;
}

}  // namespace kpz
