#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <utility>
#include <vector>

#include "kpz/cutoff.hpp"
#include "kpz/field.hpp"

namespace kpz {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Pair of independent standard normals determined by the key (counter-based).
std::pair<double, double> gaussian_pair(std::uint64_t seed, std::uint64_t stream, std::uint64_t a,
                                        std::uint64_t b, std::uint64_t c);

enum : std::uint64_t { kStreamNoise = 1, kStreamInitial = 2, kStreamAux = 3 };

struct NoiseGrid {
    int k_max = 1;
    double dt = 0.0;
    int n_steps = 0;
};

/// Brownian increments db_k over [j dt, (j+1) dt) for k = 1..k_max, three
/// components; db_{-k} = conj(db_k), no zero mode. E|db_k|^2 = dt.
struct NoiseRealization {
    std::uint64_t seed = 0;
    int k_max = 0;
    double dt = 0.0;
    int n_steps = 0;
    std::vector<cplx> inc;

    cplx at(int step, int comp, int k) const;
    double t_max() const { return dt * n_steps; }
    void write_binary(std::ostream& os) const;
    static NoiseRealization read_binary(std::istream& is);
};

NoiseRealization sample_white_noise(std::uint64_t seed, const NoiseGrid& grid);

/// Sums `factor` consecutive increments and keeps modes |k| <= k_max.
NoiseRealization coarsen(const NoiseRealization& fine, int factor, int k_max);

/// One shared path for every eps; throws if dt > eps^2/8 for some eps.
std::vector<NoiseRealization> coupled_noise_family(std::uint64_t seed,
                                                   const std::vector<double>& eps_list,
                                                   const NoiseGrid& grid);

/// Fourier coefficients of u0 on the unit torus, k = 1..k_max.
struct InitialModes {
    int k_max = 0;
    std::array<std::vector<cplx>, 3> c;
};

InitialModes sample_initial_condition(std::uint64_t seed, int k_max);

/// u0 on an nx-point grid of the unit torus (modes beyond nx/2 - 1 dropped).
Field3 initial_field(const InitialModes& u0, int nx);

/// sum_{0<|k|<=k_max} 1/(2 (2 pi k)^2).
double initial_variance_partial_sum(int k_max);

/// theta_n = Y_n^{(N)} * xi_n sampled in the frame-n variables at the given steps.
struct ThetaField {
    int n = 0;
    int N = 0;
    double L = 2.0;
    int nx = 0;
    double dt_frame = 0.0;
    std::vector<int> steps;
    std::vector<Field3> samples;
};

/// The physical increments are read in frame n: time step L^{2n} dt on the
/// torus of length L^n. Left-point rule in time; throws if the frame step
/// exceeds L^{-2(N-n)}/8 or the noise history is shorter than the kernel support.
ThetaField sample_theta(const NoiseRealization& noise, int nx, int n, int N, double L,
                        const Cutoff& chi, const std::vector<int>& out_steps);

}  // namespace kpz
