#include "kpz/field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace kpz {

namespace {

struct Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

// FFTW planning is not thread-safe; execution with the new-array interface is.
// FFTW_ESTIMATE keeps the chosen algorithm, hence the rounding, deterministic.
std::mutex& plan_mutex() {
    static std::mutex mu;
    return mu;
}

const Plans& plans_for(int n) {
    std::mutex& mu = plan_mutex();
    static std::map<int, Plans> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> r(n);
    std::vector<fftw_complex> c(n / 2 + 1);
    Plans p;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p.fwd = fftw_plan_dft_r2c_1d(n, r.data(), c.data(), flags);
    p.bwd = fftw_plan_dft_c2r_1d(n, c.data(), r.data(), flags | FFTW_DESTROY_INPUT);
    return cache.emplace(n, p).first->second;
}

fftw_plan complex_plan(int n, bool inverse) {
    std::mutex& mu = plan_mutex();
    static std::map<std::pair<int, bool>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({n, inverse});
    if (it != cache.end()) return it->second;
    std::vector<fftw_complex> a(n), b(n);
    fftw_plan p = fftw_plan_dft_1d(n, a.data(), b.data(), inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    return cache.emplace(std::make_pair(n, inverse), p).first->second;
}

}  // namespace

void cfft(std::vector<cplx>& data, bool inverse) {
    const int n = static_cast<int>(data.size());
    if (n < 1) return;
    std::vector<cplx> out(n);
    fftw_execute_dft(complex_plan(n, inverse), reinterpret_cast<fftw_complex*>(data.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    data.swap(out);
}

void rfft(const std::vector<double>& in, std::vector<cplx>& out) {
    const int n = static_cast<int>(in.size());
    if (n < 2) throw std::invalid_argument("rfft needs at least 2 points");
    out.resize(n / 2 + 1);
    std::vector<double> tmp(in);
    fftw_execute_dft_r2c(plans_for(n).fwd, tmp.data(),
                         reinterpret_cast<fftw_complex*>(out.data()));
}

void irfft(const std::vector<cplx>& in, std::vector<double>& out, int n) {
    if (static_cast<int>(in.size()) != n / 2 + 1) throw std::invalid_argument("irfft size mismatch");
    std::vector<cplx> tmp(in);
    out.resize(n);
    fftw_execute_dft_c2r(plans_for(n).bwd, reinterpret_cast<fftw_complex*>(tmp.data()),
                         out.data());
    const double s = 1.0 / n;
    for (double& v : out) v *= s;
}

Field3& Field3::operator+=(const Field3& o) {
    for (int a = 0; a < 3; ++a)
        for (std::size_t i = 0; i < c[a].size(); ++i) c[a][i] += o.c[a][i];
    return *this;
}

Field3& Field3::operator*=(double s) {
    for (auto& a : c)
        for (double& v : a) v *= s;
    return *this;
}

double Field3::sup() const {
    double m = 0.0;
    for (const auto& a : c)
        for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

Field3 operator+(Field3 a, const Field3& b) { return a += b; }
Field3 operator-(Field3 a, const Field3& b) {
    for (int k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < a.c[k].size(); ++i) a.c[k][i] -= b.c[k][i];
    return a;
}
Field3 operator*(double s, Field3 a) { return a *= s; }

Field3 SpaceTimeField::slice(int it) const {
    Field3 f(nx);
    for (int a = 0; a < 3; ++a)
        std::copy_n(c[a].begin() + static_cast<std::ptrdiff_t>(it) * nx, nx, f.c[a].begin());
    return f;
}

void SpaceTimeField::set_slice(int it, const Field3& f) {
    for (int a = 0; a < 3; ++a)
        std::copy_n(f.c[a].begin(), nx, c[a].begin() + static_cast<std::ptrdiff_t>(it) * nx);
}

SpaceTimeField& SpaceTimeField::operator+=(const SpaceTimeField& o) {
    for (int a = 0; a < 3; ++a)
        for (std::size_t i = 0; i < c[a].size(); ++i) c[a][i] += o.c[a][i];
    return *this;
}

SpaceTimeField& SpaceTimeField::operator*=(double s) {
    for (auto& a : c)
        for (double& v : a) v *= s;
    return *this;
}

double SpaceTimeField::sup() const {
    double m = 0.0;
    for (const auto& a : c)
        for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b) { return a += b; }
SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b) {
    for (int k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < a.c[k].size(); ++i) a.c[k][i] -= b.c[k][i];
    return a;
}
SpaceTimeField operator*(double s, SpaceTimeField a) { return a *= s; }

int dealias_cutoff(int nx) { return (nx - 1) / 3; }

SpectralField to_spectral(const Field3& f) {
    SpectralField s;
    s.nx = f.nx();
    for (int a = 0; a < 3; ++a) rfft(f.c[a], s.c[a]);
    return s;
}

Field3 to_physical(const SpectralField& s) {
    Field3 f;
    for (int a = 0; a < 3; ++a) irfft(s.c[a], f.c[a], s.nx);
    return f;
}

Field3 spectral_derivative(const Field3& f, double period) {
    SpectralField s = to_spectral(f);
    const int n = s.nx;
    for (auto& comp : s.c)
        for (int k = 0; k <= n / 2; ++k) {
            const double p = 2.0 * std::numbers::pi * k / period;
            comp[k] *= (2 * k == n) ? cplx(0.0) : cplx(0.0, p);
        }
    return to_physical(s);
}

}  // namespace kpz
