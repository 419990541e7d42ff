#include "kpz/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kpz/kernels.hpp"

namespace kpz {

namespace {

const double kWickPrefactor = 1.0 / (std::pow(2.0, 3.5) * std::sqrt(std::numbers::pi));

QuadResult tail_integral(const Cutoff& chi, const std::function<double(double)>& weight) {
    // int_1^b s^{-3/2} weight(chi(s)) ds + int_b^inf s^{-3/2} ds
    const double b = chi.transition_end();
    auto f = [&](double s) { return std::pow(s, -1.5) * weight(chi(s)); };
    QuadResult r = integrate(f, 1.0, b);
    r.value += 2.0 / std::sqrt(b);
    r.value *= kWickPrefactor;
    r.error *= kWickPrefactor;
    return r;
}

void lagrange4(double f, double w[4]) {
    w[0] = -f * (f - 1.0) * (f - 2.0) / 6.0;
    w[1] = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
    w[2] = -(f + 1.0) * f * (f - 2.0) / 2.0;
    w[3] = (f + 1.0) * f * (f - 1.0) / 6.0;
}

// Values on a uniform (u, z) lattice with 4x4 Lagrange interpolation.
struct Grid2 {
    double u0 = 0, du = 1, z0 = 0, dz = 1;
    int nu = 0, nz = 0;
    std::vector<double> v;

    void init(double ua, double ub, double h_u, double za, double zb, double h_z) {
        nu = std::max(4, static_cast<int>(std::ceil((ub - ua) / h_u)) + 1);
        nz = std::max(4, static_cast<int>(std::ceil((zb - za) / h_z)) + 1);
        u0 = ua;
        z0 = za;
        du = (ub - ua) / (nu - 1);
        dz = (zb - za) / (nz - 1);
        v.assign(static_cast<std::size_t>(nu) * nz, 0.0);
    }
    double u(int i) const { return u0 + i * du; }
    double z(int j) const { return z0 + j * dz; }
    double& at(int i, int j) { return v[static_cast<std::size_t>(i) * nz + j]; }

    double operator()(double uu, double zz) const {
        double fu = (uu - u0) / du, fz = (zz - z0) / dz;
        fu = std::clamp(fu, 0.0, nu - 1.0);
        fz = std::clamp(fz, 0.0, nz - 1.0);
        const int iu = std::clamp(static_cast<int>(std::floor(fu)), 1, nu - 3);
        const int iz = std::clamp(static_cast<int>(std::floor(fz)), 1, nz - 3);
        double wu[4], wz[4];
        lagrange4(fu - iu, wu);
        lagrange4(fz - iz, wz);
        double s = 0.0;
        for (int a = 0; a < 4; ++a) {
            const double* row = &v[static_cast<std::size_t>(iu - 1 + a) * nz + (iz - 1)];
            s += wu[a] * (wz[0] * row[0] + wz[1] * row[1] + wz[2] * row[2] + wz[3] * row[3]);
        }
        return s;
    }
};

// h_eps(s, r) tabulated in (log s, log y), y = r / sqrt(s).
class HTable {
public:
    HTable(double eps, const Cutoff& chi) : b_(chi.transition_end()) {
        s_min_ = 1e-6 * eps * eps;
        y_min_ = 1e-3;
        y_max_ = 12.0 / eps;
        g_.init(std::log(s_min_), std::log(b_), 0.1, std::log(y_min_), std::log(y_max_), 0.05);
        for (int i = 0; i < g_.nu; ++i) {
            const double s = std::exp(g_.u(i));
            for (int j = 0; j < g_.nz; ++j) {
                const double y = std::exp(g_.z(j));
                g_.at(i, j) = s < b_ ? h_eps_fast(eps, chi, s, y * std::sqrt(s)) : 0.0;
            }
        }
    }

    double operator()(double s, double r) const {
        if (s >= b_) return 0.0;
        s = std::max(s, s_min_);
        const double y = std::abs(r) / std::sqrt(s);
        if (y >= y_max_) return 0.0;
        const double ls = std::log(s);
        if (y < y_min_) return g_(ls, g_.z0) * (y / y_min_) * (y / y_min_);
        return g_(ls, std::log(y));
    }

    double s_min() const { return s_min_; }

private:
    Grid2 g_;
    double b_, s_min_, y_min_, y_max_;
};

// G(s,a) = int e^{-(w^2+(a+w)^2)} h(s,a+w) h(s,w) dw and
// R(s,a) = a^{-1} int (a+w) e^{-(w^2+(a+w)^2)} h(s,w) dw, in (log s, asinh(a/a0)).
class GRTable {
public:
    static constexpr double a0 = 1e-3;
    static constexpr double a_max = 9.0;

    GRTable(double eps, const HTable& h, double b) : h_(h) {
        g_.init(std::log(h.s_min()), std::log(b), 0.1, 0.0, std::asinh(a_max / a0), 0.05);
        r_ = g_;
        const GLRule& rule = gauss_legendre(10);
        for (int i = 0; i < g_.nu; ++i) {
            const double s = std::exp(g_.u(i)), rs = std::sqrt(s);
            for (int j = 0; j < g_.nz; ++j) {
                const double a = a0 * std::sinh(g_.z(j));
                const double c = -0.5 * a;
                std::vector<double> pts;
                for (double base : {0.0, -a}) {
                    pts.push_back(base);
                    for (double f : {0.25, 0.5, 1.0, 2.0, 4.0}) {
                        pts.push_back(base + f * rs);
                        pts.push_back(base - f * rs);
                    }
                    for (double f : {0.5, 1.0, 2.0}) {
                        pts.push_back(base + f * rs / eps);
                        pts.push_back(base - f * rs / eps);
                    }
                }
                for (int d = -5; d <= 5; ++d) pts.push_back(c + d);
                const auto br = clip_breaks(c - 6.0, c + 6.0, pts);
                double G = 0.0, Q = 0.0;
                for (std::size_t p = 0; p + 1 < br.size(); ++p) {
                    const double lo = br[p], hi = br[p + 1];
                    const double hw = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
                    for (std::size_t q = 0; q < rule.x.size(); ++q) {
                        const double w = mid + hw * rule.x[q];
                        const double e = std::exp(-(w * w + (a + w) * (a + w))) * rule.w[q] * hw;
                        const double hw0 = h_(s, w);
                        G += e * h_(s, a + w) * hw0;
                        Q += (a == 0.0 ? (1.0 - 2.0 * w * w) : (a + w) / a) * e * hw0;
                    }
                }
                g_.at(i, j) = G;
                r_.at(i, j) = Q;
            }
        }
    }

    double G(double s, double a) const { return g_(std::log(std::max(s, h_.s_min())), zeta(a)); }
    double R(double s, double a) const { return r_(std::log(std::max(s, h_.s_min())), zeta(a)); }

private:
    static double zeta(double a) { return std::asinh(std::min(std::abs(a), a_max) / a0); }
    const HTable& h_;
    Grid2 g_, r_;
};

struct Phi {
    double I1 = 0.0;
    double I2 = 0.0;
};

std::vector<double> sqrt_breaks(double t, double eps, bool complement) {
    std::vector<double> out;
    const double e2 = eps * eps;
    for (double c : {e2, 2.0 * e2, 1.0, 2.0}) {
        if (c >= t) continue;
        out.push_back(complement ? std::sqrt(1.0 - c / t) : std::sqrt(c / t));
    }
    return out;
}

Phi phi_at(double t, double eps, const Cutoff& chi, const HTable& H, const GRTable& GR,
           const GLRule& rk, const GLRule& rv, bool with_I2) {
    const double k_max = 8.0, st = std::sqrt(t);
    std::vector<double> kp = {1, 2, 3, 4, 5, 6};
    for (double f : {0.25, 0.5, 1.0, 2.0}) kp.push_back(f * st);
    for (double f : {0.5, 1.0, 2.0}) kp.push_back(f * st / eps);
    const auto kb = clip_breaks(0.0, k_max, kp);

    std::vector<double> vp = sqrt_breaks(t, eps, true);
    for (double v : sqrt_breaks(t, eps, false)) vp.push_back(v);
    for (double f = 0.5; f > 1e-3; f *= 0.25) vp.push_back(eps * f / st);
    const auto vb = clip_breaks(0.0, 1.0, vp);

    // v nodes with their weights and the v-only factors
    struct VNode {
        double v, w, c1, c2;
    };
    std::vector<VNode> vn;
    for (std::size_t p = 0; p + 1 < vb.size(); ++p) {
        const double hw = 0.5 * (vb[p + 1] - vb[p]), mid = 0.5 * (vb[p + 1] + vb[p]);
        for (std::size_t q = 0; q < rv.x.size(); ++q) {
            const double v = mid + hw * rv.x[q];
            const double c1 = chi_eps(chi, eps, t * (1.0 - v * v));
            if (c1 == 0.0) continue;
            vn.push_back({v, rv.w[q] * hw, c1, c1 * chi_eps(chi, eps, t * v * v)});
        }
    }

    Phi out;
    for (std::size_t p = 0; p + 1 < kb.size(); ++p) {
        const double hw = 0.5 * (kb[p + 1] - kb[p]), mid = 0.5 * (kb[p + 1] + kb[p]);
        for (std::size_t q = 0; q < rk.x.size(); ++q) {
            const double k = mid + hw * rk.x[q], wk = rk.w[q] * hw;
            const double k2 = k * k;
            const double hk = with_I2 ? H(t, k) : 0.0;
            double s1 = 0.0, s2 = 0.0;
            for (const VNode& n : vn) {
                const double e = std::exp(-(1.0 - n.v * n.v) * k2) * n.w;
                const double s = t * n.v * n.v;
                s1 += n.c1 * e * GR.G(s, n.v * k);
                if (with_I2 && n.c2 != 0.0) s2 += n.c2 * e * GR.R(s, n.v * k);
            }
            const double ek = std::exp(-k2) * k2 * wk;
            // factor 2 for k < 0 and 2 from ds = 2 t v dv
            out.I1 += 4.0 * ek * s1;
            out.I2 -= 4.0 * ek * hk * s2;
        }
    }
    return out;
}

Phi integrate_tau(double eps, const Cutoff& chi, const HTable& H, const GRTable& GR,
                  const GLRule& rt, const GLRule& rk, const GLRule& rv, bool with_I2) {
    const double e2 = eps * eps, b = chi.transition_end();
    const double lo = std::log(e2), hi = std::log(b);
    std::vector<double> pts = {std::log(b * e2), 0.0};
    for (double x = lo; x < hi; x += 0.5) pts.push_back(x);
    const auto br = clip_breaks(lo, hi, pts);
    Phi total;
    for (std::size_t p = 0; p + 1 < br.size(); ++p) {
        const double hw = 0.5 * (br[p + 1] - br[p]), mid = 0.5 * (br[p + 1] + br[p]);
        for (std::size_t q = 0; q < rt.x.size(); ++q) {
            const double t = std::exp(mid + hw * rt.x[q]);
            const double w = rt.w[q] * hw;
            const Phi ph = phi_at(t, eps, chi, H, GR, rk, rv, with_I2);
            total.I1 += w * chi_eps(chi, eps, t) * ph.I1;
            total.I2 += w * ph.I2;
        }
    }
    return total;
}

}  // namespace

QuadResult m1_scalar(const Cutoff& chi) {
    return tail_integral(chi, [](double c) { return (1.0 - c) * (1.0 - c); });
}

QuadResult m1_scalar_literal(const Cutoff& chi) {
    return tail_integral(chi, [](double c) { return 1.0 - c * c; });
}

Vec3 compute_m1(const Cutoff& chi, const CouplingTensor& M) {
    const double c = m1_scalar(chi).value;
    const Vec3 tr = contract(M).trace_vector;
    return {tr[0] * c, tr[1] * c, tr[2] * c};
}

Vec3 compute_m2(const CouplingTensor& M) {
    const ContractionSet cs = contract(M);
    const double f = std::numbers::pi / std::sqrt(3.0);
    Vec3 out{};
    for (int a = 0; a < 3; ++a) out[a] = f * (cs.calM2[a] - cs.calM1[a]);
    return out;
}

QuadResult wick_constant_line(const Cutoff& chi, int m, double L) {
    const double lam = std::pow(L, 2 * m), b = chi.transition_end();
    auto f = [&](double s) {
        const double d = chi(s) - chi(lam * s);
        return std::pow(s, -1.5) * d * d;
    };
    if (m == 0) return {};
    QuadResult r = integrate(f, 1.0 / lam, b, std::vector<double>{b / lam, 1.0});
    r.value *= kWickPrefactor;
    r.error *= kWickPrefactor;
    return r;
}

Vec3 wick_remainder(int n, int N, double L, const Cutoff& chi, const CouplingTensor& M) {
    const double c = covariance_C(n, N, L, chi, 0.0, 0.0).value;
    const Vec3 tr = contract(M).trace_vector;
    const Vec3 m1 = compute_m1(chi, M);
    const double f = std::pow(L, N - n);
    return {c * tr[0] - f * m1[0], c * tr[1] - f * m1[1], c * tr[2] - f * m1[2]};
}

ThirdOrder third_order_integrals(const Cutoff& chi, double eps, bool with_I2) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("third-order integrals need eps in (0,1)");
    const HTable H(eps, chi);
    const GRTable GR(eps, H, chi.transition_end());
    const Phi fine = integrate_tau(eps, chi, H, GR, gauss_legendre(15), gauss_legendre(15),
                                   gauss_legendre(15), with_I2);
    const Phi coarse = integrate_tau(eps, chi, H, GR, gauss_legendre(10), gauss_legendre(10),
                                     gauss_legendre(10), with_I2);
    ThirdOrder r;
    r.I1 = fine.I1;
    r.I2 = fine.I2;
    r.err1 = std::abs(fine.I1 - coarse.I1);
    r.err2 = std::abs(fine.I2 - coarse.I2);
    if (!std::isfinite(r.I1) || !std::isfinite(r.I2))
        throw QuadratureError("third-order integral not finite", r.err1 + r.err2);
    return r;
}

QuadResult compute_mu_eps(const Cutoff& chi, double eps) {
    const ThirdOrder t = third_order_integrals(chi, eps, false);
    return {t.I1, t.err1};
}

NuEntry compute_nu(const Cutoff& chi, const CouplingTensor& M, double eps) {
    const ContractionSet cs = contract(M);
    const Vec3 m2 = compute_m2(M);
    const ThirdOrder t = third_order_integrals(chi, eps, true);
    NuEntry e;
    e.eps = eps;
    e.I1 = t.I1;
    e.I2 = t.I2;
    e.error = t.err1 + t.err2;
    for (int a = 0; a < 3; ++a)
        e.nu[a] = 4.0 * cs.calM2[a] * t.I1 + 8.0 * cs.calM1[a] * t.I2 - m2[a] * std::log(1.0 / eps);
    return e;
}

M3Result m3_from_table(std::vector<NuEntry> table) {
    const std::size_t n = table.size();
    if (n < 3) throw std::invalid_argument("m3 needs at least three eps values");
    for (std::size_t i = 1; i < n; ++i)
        if (!(table[i].eps < table[i - 1].eps))
            throw std::invalid_argument("eps sequence must be strictly decreasing");
    M3Result r;
    for (int a = 0; a < 3; ++a) {
        double scale = 0.0;
        for (const auto& e : table) scale = std::max(scale, std::abs(e.nu[a]));
        for (std::size_t i = 2; i < n; ++i) {
            const double d0 = std::abs(table[i - 1].nu[a] - table[i - 2].nu[a]);
            const double d1 = std::abs(table[i].nu[a] - table[i - 1].nu[a]);
            if (d1 > d0 * (1.0 + 1e-9) + 1e-12 * scale)
                throw NonCauchyError("nu_eps differences do not decrease", table);
        }
        // least squares nu = m3 + c x over the last three points, x = 1/log(1/eps)
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = n - 3; i < n; ++i) {
            const double x = 1.0 / std::log(1.0 / table[i].eps), y = table[i].nu[a];
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double slope = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);
        r.m3[a] = (sy - slope * sx) / 3.0;
        r.residual = std::max(r.residual, std::abs(table[n - 1].nu[a] - table[n - 2].nu[a]));
    }
    r.table = std::move(table);
    return r;
}

M3Result compute_m3(const Cutoff& chi, const CouplingTensor& M, const std::vector<double>& eps_seq) {
    if (eps_seq.size() < 3) throw std::invalid_argument("m3 needs at least three eps values");
    std::vector<NuEntry> table;
    for (double e : eps_seq) table.push_back(compute_nu(chi, M, e));
    return m3_from_table(std::move(table));
}

std::vector<double> default_m3_eps() { return {1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256}; }

RenormConstants compute_constants(const Cutoff& chi, const CouplingTensor& M,
                                  const std::vector<double>& eps_seq) {
    RenormConstants rc;
    rc.chi_id = chi.id();
    rc.m1 = compute_m1(chi, M);
    rc.m2 = compute_m2(M);
    const M3Result m3 = compute_m3(chi, M, eps_seq);
    rc.m3 = m3.m3;
    rc.m3_extrapolation_residual = m3.residual;
    rc.nu_table = m3.table;
    rc.quadrature_error = m1_scalar(chi).error;
    for (const auto& e : m3.table) rc.quadrature_error = std::max(rc.quadrature_error, e.error);
    return rc;
}

Vec3 log_constant(const RenormConstants& rc, double log_term) {
    Vec3 c{};
    for (int a = 0; a < 3; ++a) c[a] = kTwoLoopFactor * (rc.m2[a] * log_term + rc.m3[a]);
    return c;
}

Vec3 counterterm(const RenormConstants& rc, double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("counterterm needs eps in (0,1]");
    Vec3 c = log_constant(rc, std::log(1.0 / eps));
    for (int a = 0; a < 3; ++a) c[a] += rc.m1[a] / eps;
    return c;
}

Vec3 counterterm(const RenormConstants& rc, double eps, const Cutoff& chi) {
    if (rc.chi_id != chi.id())
        throw std::invalid_argument("renormalization constants were computed for cutoff '" +
                                    rc.chi_id + "', not '" + chi.id() + "'");
    return counterterm(rc, eps);
}

}  // namespace kpz
