#include "kpz/norms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace kpz {

namespace {

void check_grid(const SpaceTimeField& v, double dt, double period) {
    if (v.nx < 2 || v.nt < 1) throw std::invalid_argument("empty field");
    if (dt > 1.0 || period / v.nx > 1.0)
        throw std::invalid_argument("grid coarser than unit cubes");
}

// cube index of a cell; partial seam cube folded into cube 0
int x_cube(int ix, int nx, double period) {
    const int n_full = static_cast<int>(std::floor(period + 1e-9));
    int c = static_cast<int>(std::floor((ix + 0.5) * period / nx));
    if (c >= n_full) c = 0;
    return c;
}

void time_filter(std::vector<double>& f, int nt, int nx, double dt) {
    // g_i = dt/2 sum_j e^{-|i-j| dt} f_j
    const double r = std::exp(-dt);
    std::vector<double> fw(f.size()), bw(f.size());
    for (int ix = 0; ix < nx; ++ix) {
        double acc = 0.0;
        for (int it = 0; it < nt; ++it) {
            acc = f[static_cast<std::size_t>(it) * nx + ix] + r * acc;
            fw[static_cast<std::size_t>(it) * nx + ix] = acc;
        }
        acc = 0.0;
        for (int it = nt - 1; it >= 0; --it) {
            acc = f[static_cast<std::size_t>(it) * nx + ix] + r * acc;
            bw[static_cast<std::size_t>(it) * nx + ix] = acc;
        }
    }
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.5 * dt * (fw[i] + bw[i] - f[i]);
}

void space_filter(std::vector<double>& f, int nt, int nx, double period) {
    std::vector<double> row(nx), out;
    std::vector<cplx> s;
    for (int it = 0; it < nt; ++it) {
        std::copy_n(f.begin() + static_cast<std::ptrdiff_t>(it) * nx, nx, row.begin());
        rfft(row, s);
        for (int k = 0; k <= nx / 2; ++k) {
            const double p = 2.0 * std::numbers::pi * k / period;
            s[k] /= (1.0 + p * p);
        }
        irfft(s, out, nx);
        std::copy_n(out.begin(), nx, f.begin() + static_cast<std::ptrdiff_t>(it) * nx);
    }
}

// squared L^2 mass per unit cube, keyed by (time cube, space cube)
std::map<std::pair<int, int>, double> cube_masses(const SpaceTimeField& g, double dt, double period) {
    std::map<std::pair<int, int>, double> m;
    const double dx = period / g.nx;
    for (int it = 0; it < g.nt; ++it) {
        const int ct = static_cast<int>(std::floor((it + 0.5) * dt));
        for (int ix = 0; ix < g.nx; ++ix) {
            double s = 0.0;
            for (int a = 0; a < 3; ++a) s += g.at(a, it, ix) * g.at(a, it, ix);
            m[{ct, x_cube(ix, g.nx, period)}] += s * dt * dx;
        }
    }
    return m;
}

}  // namespace

SpaceTimeField smooth_K(const SpaceTimeField& v, double dt, double period) {
    SpaceTimeField g = v;
    for (int a = 0; a < 3; ++a) {
        time_filter(g.c[a], g.nt, g.nx, dt);
        space_filter(g.c[a], g.nt, g.nx, period);
    }
    return g;
}

NormReport vn_norm(const SpaceTimeField& v, double dt, double period) {
    check_grid(v, dt, period);
    const SpaceTimeField g = smooth_K(v, dt, period);
    double best = 0.0;
    for (const auto& [key, mass] : cube_masses(g, dt, period)) best = std::max(best, mass);
    return {"V", std::sqrt(best), 0, 0.0};
}

double vn_norm_summed(const SpaceTimeField& v, double dt, double period) {
    check_grid(v, dt, period);
    const SpaceTimeField g = smooth_K(v, dt, period);
    double s = 0.0;
    for (const auto& [key, mass] : cube_masses(g, dt, period)) s += std::sqrt(mass);
    return s;
}

NormReport bilocal_norm(const BilocalField& s, double dt, double period) {
    const int nt = s.nt, nx = s.nx, np = nt * nx;
    if (static_cast<int>(s.v.size()) != np * np) throw std::invalid_argument("bilocal size mismatch");
    if (dt > 1.0 || period / nx > 1.0) throw std::invalid_argument("grid coarser than unit cubes");
    // smooth in the second argument, then in the first (K x K is a tensor product)
    std::vector<double> w = s.v;
    auto smooth_rows = [&](std::vector<double>& data, bool second) {
        SpaceTimeField tmp(nt, nx);
        for (int p = 0; p < np; ++p) {
            for (int q = 0; q < np; ++q)
                tmp.c[0][q] = second ? data[static_cast<std::size_t>(p) * np + q]
                                     : data[static_cast<std::size_t>(q) * np + p];
            time_filter(tmp.c[0], nt, nx, dt);
            space_filter(tmp.c[0], nt, nx, period);
            for (int q = 0; q < np; ++q)
                (second ? data[static_cast<std::size_t>(p) * np + q]
                        : data[static_cast<std::size_t>(q) * np + p]) = tmp.c[0][q];
        }
    };
    smooth_rows(w, true);
    smooth_rows(w, false);
    const double dx = period / nx;
    auto cube_of = [&](int p) {
        const int it = p / nx, ix = p % nx;
        return std::make_pair(static_cast<int>(std::floor((it + 0.5) * dt)), x_cube(ix, nx, period));
    };
    std::map<std::pair<int, int>, std::map<std::pair<int, int>, double>> mass;
    for (int p = 0; p < np; ++p)
        for (int q = 0; q < np; ++q) {
            const double v = w[static_cast<std::size_t>(p) * np + q];
            mass[cube_of(p)][cube_of(q)] += v * v * (dt * dx) * (dt * dx);
        }
    double best = 0.0;
    for (const auto& [ci, row] : mass) {
        std::vector<std::pair<double, double>> terms;  // (distance, norm)
        for (const auto& [cj, m] : row) {
            const double d = std::hypot(ci.first - cj.first, ci.second - cj.second);
            terms.emplace_back(d, std::sqrt(m));
        }
        std::sort(terms.begin(), terms.end());
        double sum = 0.0;
        for (std::size_t k = 0; k < terms.size(); ++k) {
            double rest = 0.0;
            for (std::size_t l = k; l < terms.size(); ++l) rest += terms[l].second;
            if (sum > 0.0 && rest < 1e-12 * sum) break;
            sum += terms[k].second;
        }
        best = std::max(best, sum);
    }
    return {"bilocal", best, 0, 0.0};
}

}  // namespace kpz
