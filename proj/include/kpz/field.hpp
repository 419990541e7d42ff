#pragma once

#include <array>
#include <complex>
#include <vector>

namespace kpz {

using cplx = std::complex<double>;

/// Forward real DFT, out[k] = sum_j in[j] e^{-2 pi i k j / n}, k = 0..n/2.
void rfft(const std::vector<double>& in, std::vector<cplx>& out);

/// Inverse of rfft including the 1/n factor; `in` has n/2+1 entries.
void irfft(const std::vector<cplx>& in, std::vector<double>& out, int n);

/// In-place complex DFT of any length; `inverse` uses e^{+2 pi i k j / n}
/// and no 1/n factor.
void cfft(std::vector<cplx>& data, bool inverse);

/// Real 3-component field sampled on a uniform grid.
struct Field3 {
    std::array<std::vector<double>, 3> c;

    Field3() = default;
    explicit Field3(int nx, double v = 0.0) {
        for (auto& a : c) a.assign(nx, v);
    }
    int nx() const { return static_cast<int>(c[0].size()); }
    Field3& operator+=(const Field3& o);
    Field3& operator*=(double s);
    double sup() const;
};

Field3 operator+(Field3 a, const Field3& b);
Field3 operator-(Field3 a, const Field3& b);
Field3 operator*(double s, Field3 a);

/// Spectral 3-component field: DFT coefficients k = 0..nx/2.
struct SpectralField {
    std::array<std::vector<cplx>, 3> c;
    int nx = 0;
    double time = 0.0;
};

SpectralField to_spectral(const Field3& f);
Field3 to_physical(const SpectralField& s);

/// 3-component field on a uniform space-time grid, index [it * nx + ix].
struct SpaceTimeField {
    int nt = 0;
    int nx = 0;
    std::array<std::vector<double>, 3> c;

    SpaceTimeField() = default;
    SpaceTimeField(int nt_, int nx_, double v = 0.0) : nt(nt_), nx(nx_) {
        for (auto& a : c) a.assign(static_cast<std::size_t>(nt_) * nx_, v);
    }
    double& at(int a, int it, int ix) { return c[a][static_cast<std::size_t>(it) * nx + ix]; }
    double at(int a, int it, int ix) const { return c[a][static_cast<std::size_t>(it) * nx + ix]; }
    Field3 slice(int it) const;
    void set_slice(int it, const Field3& f);
    SpaceTimeField& operator+=(const SpaceTimeField& o);
    SpaceTimeField& operator*=(double s);
    double sup() const;
};

SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b);
SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b);
SpaceTimeField operator*(double s, SpaceTimeField a);

/// Largest K with 3K < nx: modes |k| > K are removed by the 2/3 rule.
int dealias_cutoff(int nx);

/// d/dx on a torus of length `period` computed spectrally.
Field3 spectral_derivative(const Field3& f, double period);

}  // namespace kpz
