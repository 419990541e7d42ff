#include "kpz/lp_scan.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <stdexcept>

#include "kpz/field.hpp"
#include "kpz/kernels.hpp"
#include "kpz/quadrature.hpp"

namespace kpz {

namespace {

constexpr double kSupport = 2.0;

/// Fourier coefficient of c_n^{(N)}(t, .) at momentum p (torus normalization
/// c(t,x) = P^{-1} sum_k e^{ipx} c_hat(t,p_k)).
double covariance_hat(const Cutoff& chi, int m, double L, double t, double p) {
    const double lam = std::pow(L, 2 * m), lo = 1.0 / lam;
    if (p == 0.0 || t >= kSupport) return 0.0;
    auto f = [&](double tau) {
        return std::exp(-(t + 2.0 * tau) * p * p) * chi_m(chi, m, L, t + tau) * chi_m(chi, m, L, tau);
    };
    std::vector<double> pts{lo, 2.0 * lo, 1.0, kSupport - t, lo - t, 2.0 * lo - t, 1.0 - t};
    const double w = 0.5 / (p * p);
    for (double s = lo + w; s < kSupport && s < lo + 64.0 * w; s = lo + 2.0 * (s - lo)) pts.push_back(s);
    const std::vector<double> br = clip_breaks(lo, kSupport - t, pts);
    return p * p * gl_integrate_pieces(f, br, gauss_legendre(10));
}

using Kernel2 = std::function<double(double, double)>;

struct Node {
    double t, x, w;
};

std::vector<double> geometric_to_zero(double b, int levels) {
    std::vector<double> v{0.0};
    for (int k = levels; k >= 0; --k) v.push_back(b * std::pow(0.5, k));
    return v;
}

std::vector<double> geometric_from(double a, double b) {
    std::vector<double> v{a};
    while (v.back() * 2.0 < b * (1.0 - 1e-12)) v.push_back(v.back() * 2.0);
    v.push_back(b);
    return v;
}

std::vector<double> uniform(double a, double b, int k) {
    std::vector<double> v;
    for (int i = 0; i <= k; ++i) v.push_back(a + (b - a) * i / k);
    return v;
}

void tensor_nodes(const std::vector<double>& tb, const std::vector<double>& xb, std::vector<Node>& out) {
    const GLRule& g = gauss_legendre(10);
    for (std::size_t i = 0; i + 1 < tb.size(); ++i)
        for (std::size_t j = 0; j + 1 < xb.size(); ++j) {
            const double ht = 0.5 * (tb[i + 1] - tb[i]), ct = 0.5 * (tb[i + 1] + tb[i]);
            const double hx = 0.5 * (xb[j + 1] - xb[j]), cx = 0.5 * (xb[j + 1] + xb[j]);
            if (ht <= 0.0 || hx <= 0.0) continue;
            for (std::size_t a = 0; a < g.x.size(); ++a)
                for (std::size_t b = 0; b < g.x.size(); ++b)
                    out.push_back({ct + ht * g.x[a], cx + hx * g.x[b], g.w[a] * g.w[b] * ht * hx});
        }
}

int x_pieces(double width) { return std::max(1, static_cast<int>(std::ceil(width / 0.25))); }

/// Quadrature nodes of [0,2] x [0,P/2] minus the box of level 0 (level 0),
/// or of the annulus between boxes level-1 and level.
std::vector<Node> region_nodes(int level, double half_period, double d0) {
    std::vector<Node> out;
    if (level == 0) {
        const double dt0 = d0 * d0;
        tensor_nodes(geometric_from(dt0, kSupport), uniform(0.0, half_period, x_pieces(half_period)), out);
        tensor_nodes(geometric_to_zero(dt0, 12),
                     uniform(d0, half_period, x_pieces(half_period - d0)), out);
        return out;
    }
    const double d_out = d0 * std::pow(0.25, level - 1), d_in = d_out * 0.25;
    tensor_nodes(geometric_from(d_in * d_in, d_out * d_out), uniform(0.0, d_out, 4), out);
    tensor_nodes(geometric_to_zero(d_in * d_in, 10), geometric_from(d_in, d_out), out);
    return out;
}

LpScanReport excision_scan(const Kernel2& f, double symmetry, const std::vector<double>& p_list,
                           double period, int levels) {
    LpScanReport rep;
    const double half = 0.5 * period, d0 = std::min(0.5, period / 4.0);
    for (double p : p_list) rep.entries.push_back({p, {}, ""});
    std::vector<double> acc(p_list.size(), 0.0);
    for (int lv = 0; lv < levels; ++lv) {
        for (const Node& nd : region_nodes(lv, half, d0)) {
            const double v = std::abs(f(nd.t, nd.x));
            if (v == 0.0) continue;
            for (std::size_t i = 0; i < p_list.size(); ++i) acc[i] += nd.w * std::pow(v, p_list[i]);
        }
        for (std::size_t i = 0; i < p_list.size(); ++i) rep.entries[i].values.push_back(symmetry * acc[i]);
    }
    return rep;
}

LpScanReport z_scan(const Cutoff& chi, const std::vector<double>& p_list, const LpScanOptions& opt) {
    const int m = opt.N - opt.n;
    if (m < 1) throw std::invalid_argument("Z scan needs N > n");
    const double P = std::pow(opt.L, opt.n), lo = std::pow(opt.L, -2 * m);
    LpScanReport rep;
    for (double p : p_list) rep.entries.push_back({p, {}, ""});
    for (int lv = 0; lv < opt.levels; ++lv) {
        const int nx = 32 << lv;
        const double dt = 1.0 / (1024 << (2 * lv));
        const int nt = static_cast<int>(std::lround(2.0 * kSupport / dt));
        const int nk = nx / 2 + 1;
        const int kmax = std::max(nx / 2, static_cast<int>(std::ceil(P * std::sqrt(40.0 / lo) / (2 * std::numbers::pi))));
        // Y and C sampled on the grid from their (aliased) Fourier series, t_i = (i + 1/2) dt
        std::vector<double> Yrow(nx), Crow(nx);
        std::vector<std::vector<cplx>> Jhat(nk, std::vector<cplx>(nt, cplx{}));
        std::vector<cplx> spec;
        for (int i = 0; i < nt; ++i) {
            const double t = (i + 0.5) * dt;
            const double cm = chi_m(chi, m, opt.L, t);
            if (cm == 0.0) continue;
            std::fill(Yrow.begin(), Yrow.end(), 0.0);
            std::fill(Crow.begin(), Crow.end(), 0.0);
            for (int k = 1; k <= kmax; ++k) {
                const double p = 2 * std::numbers::pi * k / P;
                const double yh = p * std::exp(-t * p * p) * cm, ch = covariance_hat(chi, m, opt.L, t, p);
                if (yh < 1e-300 && std::abs(ch) < 1e-300) break;
                for (int j = 0; j < nx; ++j) {
                    const double ph = p * j * P / nx;
                    Yrow[j] += -2.0 * yh * std::sin(ph) / P;
                    Crow[j] += 2.0 * ch * std::cos(ph) / P;
                }
            }
            for (int j = 0; j < nx; ++j) Yrow[j] *= Crow[j];
            rfft(Yrow, spec);
            for (int k = 1; k < nk; ++k) Jhat[k][i] = spec[k] * (P / nx);
        }
        // Z_hat(t_i) = sum_{s <= i} dt Y_hat(t_i - t_s) J_hat(t_s), Y_hat at lag (i-s) dt
        int nfft = 1;
        while (nfft < 2 * nt) nfft *= 2;
        std::vector<std::vector<cplx>> Zhat(nk, std::vector<cplx>(nt, cplx{}));
        for (int k = 1; k < nk; ++k) {
            if (2 * k == nx) continue;
            const double p = 2 * std::numbers::pi * k / P;
            std::vector<cplx> a(nfft, cplx{}), b(nfft, cplx{});
            for (int i = 0; i < nt; ++i) a[i] = Jhat[k][i];
            for (int q = 1; q < nt; ++q) b[q] = cplx(0.0, p) * std::exp(-q * dt * p * p) * chi_m(chi, m, opt.L, q * dt);
            cfft(a, false);
            cfft(b, false);
            for (int f = 0; f < nfft; ++f) a[f] *= b[f];
            cfft(a, true);
            for (int i = 0; i < nt; ++i) Zhat[k][i] = a[i] * (dt / nfft);
        }
        std::vector<double> acc(p_list.size(), 0.0);
        std::vector<cplx> row(nk);
        std::vector<double> z;
        for (int i = 0; i < nt; ++i) {
            for (int k = 0; k < nk; ++k) row[k] = Zhat[k][i] * (static_cast<double>(nx) / P);
            irfft(row, z, nx);
            for (double v : z)
                if (v != 0.0)
                    for (std::size_t q = 0; q < p_list.size(); ++q)
                        acc[q] += std::pow(std::abs(v), p_list[q]) * dt * (P / nx);
        }
        for (std::size_t q = 0; q < p_list.size(); ++q) rep.entries[q].values.push_back(acc[q]);
    }
    return rep;
}

}  // namespace

LpKernel lp_kernel_from_name(const std::string& name) {
    static const std::map<std::string, LpKernel> names{{"C", LpKernel::C},   {"Y", LpKernel::Y},
                                                       {"dC", LpKernel::dC}, {"dY", LpKernel::dY},
                                                       {"W", LpKernel::W},   {"Z", LpKernel::Z}};
    auto it = names.find(name);
    if (it == names.end()) throw std::invalid_argument("unknown L^p kernel '" + name + "'");
    return it->second;
}

std::string lp_kernel_name(LpKernel k) {
    switch (k) {
        case LpKernel::C: return "C";
        case LpKernel::Y: return "Y";
        case LpKernel::dC: return "dC";
        case LpKernel::dY: return "dY";
        case LpKernel::W: return "W";
        case LpKernel::Z: return "Z";
    }
    return "?";
}

std::string classify_lp(const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n < 2) return "undetermined";
    const double a = v[n - 2], b = v[n - 1];
    if (std::abs(b - a) < 0.05 * std::abs(b)) return "stable";
    if (n >= 3) {
        bool grow = true;
        for (std::size_t i = n - 2; i < n; ++i) grow = grow && v[i] > 1.25 * v[i - 1] && v[i - 1] > 0.0;
        if (grow) return "diverging";
    }
    return "undetermined";
}

LpScanReport lp_norm_scan(LpKernel kernel, const std::vector<double>& p_list, const Cutoff& chi,
                          const Cutoff& chi_prime, const LpScanOptions& opt) {
    if (opt.levels < 2) throw std::invalid_argument("scan needs at least two levels");
    for (double p : p_list)
        if (!(p > 0.0)) throw std::invalid_argument("p must be positive");
    const int n = opt.n, N = opt.N;
    const double L = opt.L, P = std::pow(L, n);
    QuadOptions q;
    q.abs_tol = 1e-16;
    LpScanReport rep;
    switch (kernel) {
        case LpKernel::C: {
            auto f = [&](double t, double x) {
                double best = 0.0;
                for (int d = 1; d <= opt.sup_depth; ++d)
                    best = std::max(best, std::abs(covariance_C(n, n + d, L, chi, t, x, q).value));
                return std::max(best, std::abs(covariance_C_limit(n, L, chi, t, x, q).value));
            };
            rep = excision_scan(f, 4.0, p_list, P, opt.levels);
            break;
        }
        case LpKernel::Y: {
            auto f = [&](double t, double x) { return heat_torus_derivs(P, t, x).hx * chi(t); };
            rep = excision_scan(f, 2.0, p_list, P, opt.levels);
            break;
        }
        case LpKernel::dC: {
            auto f = [&](double t, double x) {
                return covariance_C(n, N, L, chi, chi_prime, t, x, q).value - covariance_C(n, N, L, chi, t, x, q).value;
            };
            rep = excision_scan(f, 4.0, p_list, P, opt.levels);
            break;
        }
        case LpKernel::dY: {
            auto f = [&](double t, double x) {
                const double lam = std::pow(L, 2 * (N - n));
                return heat_torus_derivs(P, t, x).hx * (chi_prime(lam * t) - chi(lam * t));
            };
            rep = excision_scan(f, 2.0, p_list, P, opt.levels);
            break;
        }
        case LpKernel::W: {
            const double eps = std::pow(L, -(N - n));
            std::map<double, WProfile> cache;
            auto f = [&](double t, double x) {
                auto it = cache.find(t);
                if (it == cache.end()) it = cache.emplace(t, WProfile(eps, chi, t)).first;
                return it->second.W(x);
            };
            rep = excision_scan(f, 2.0, p_list, P, opt.levels);
            break;
        }
        case LpKernel::Z: rep = z_scan(chi, p_list, opt); break;
    }
    rep.kernel = lp_kernel_name(kernel);
    rep.n = n;
    rep.N = kernel == LpKernel::C || kernel == LpKernel::Y ? -1 : N;
    for (auto& e : rep.entries) e.classification = classify_lp(e.values);
    return rep;
}

void write_lp_csv(const LpScanReport& r, std::ostream& os) {
    os << "kernel,n,N,p,level,value,classification\n";
    for (const auto& e : r.entries)
        for (std::size_t lv = 0; lv < e.values.size(); ++lv)
            fmt::print(os, "{},{},{},{:.6g},{},{:.17g},{}\n", r.kernel, r.n, r.N, e.p, lv, e.values[lv],
                       e.classification);
}

}  // namespace kpz
