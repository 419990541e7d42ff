#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kpz/coupling.hpp"
#include "kpz/cutoff.hpp"
#include "kpz/field.hpp"
#include "kpz/noise.hpp"
#include "kpz/renorm.hpp"

namespace kpz {

/// (a, M^{(c)} b) pointwise; inputs and output truncated to |k| <= dealias_cutoff(nx).
Field3 dealiased_product(const CouplingTensor& M, const Field3& a, const Field3& b);

struct Resolution {
    int nx = 0;
    double dt = 0.0;
};

/// nx = smallest power of two with 1/nx <= eps/4, dt = eps^2/8.
Resolution default_resolution(double eps);

enum class CountertermMode { Full, M1Only, Off };

std::string counterterm_mode_name(CountertermMode m);

struct Trajectory {
    double eps = 0.0;
    std::uint64_t seed = 0;
    std::string chi_id;
    Vec3 C{};
    int nx = 0;
    double dt = 0.0;
    std::vector<SpectralField> snapshots;
    bool blowup = false;
    double blowup_time = 0.0;
};

/// Exact left-point Duhamel sum u(t_n) = e^{t_n Lap} u0 + sum_j G_eps(t_n - t_j) S_j,
/// S_j = (V(u(t_j)) + C) dt + dXi_j. Lags >= b eps^2 (b the end of the cutoff
/// transition) go through a recursive exponential accumulator, shorter lags
/// through an explicit window.
class DuhamelIntegrator {
public:
    DuhamelIntegrator(double eps, const Cutoff& chi, const CouplingTensor& M, const Vec3& C_eps,
                      int nx, double dt, const Field3& u0);

    /// Advances to t_{n+1} using the increment of step n (noise may be null).
    const SpectralField& step(const NoiseRealization* noise);

    const SpectralField& state() const { return u_; }
    double time() const { return step_ * dt_; }
    int step_index() const { return step_; }
    /// Spectral x-derivative of the current state, physical values.
    Field3 gradient() const;
    /// Source (V(u) + C) at the current state, physical values.
    Field3 source() const;

private:
    double eps_, dt_;
    CouplingTensor M_;
    Vec3 C_;
    int nx_, nk_, qb_;
    int step_ = 0;
    std::vector<double> p2_, e1_, eb_;
    std::vector<std::vector<double>> window_;  // window_[q][k], q = 1..qb-1
    SpectralField u0_, u_;
    std::array<std::vector<cplx>, 3> acc_;
    std::vector<std::array<std::vector<cplx>, 3>> ring_;  // S_{n-q}
};

/// One step of the integrator; returns u(t_next).
SpectralField duhamel_step(DuhamelIntegrator& integ, const NoiseRealization* noise);

struct SolveOptions {
    int snapshot_every = 1;
    bool zero_initial = false;
    bool zero_noise = false;
    CountertermMode mode = CountertermMode::Full;
};

/// Integrates with the literal constant C added to V (the counterterm enters as -C_eps).
Trajectory solve_with_noise(double eps, double T, const CouplingTensor& M, const Vec3& C,
                            const Cutoff& chi, const Resolution& res,
                            const NoiseRealization* noise, const Field3& u0,
                            int snapshot_every);

/// Samples u0 and the noise from `seed` and subtracts the counterterm per `opt.mode`.
Trajectory solve(double eps, double T, std::uint64_t seed, const CouplingTensor& M,
                 const RenormConstants& rc, const Cutoff& chi, const Resolution& res,
                 const SolveOptions& opt = {});

void write_trajectory_csv(const Trajectory& tr, std::ostream& os);
void write_trajectory_binary(const Trajectory& tr, std::ostream& os);

/// Frame of the coarsest eps: modes |k| < nx_c/2 of `s` on nx_c points,
/// scaled by eps_c^{-1/2}.
Field3 coarse_frame_slice(const SpectralField& s, int nx_c, double eps_c);

struct ConvergenceCurve {
    CountertermMode mode = CountertermMode::Full;
    std::string chi_id;
    std::vector<double> eps;
    std::vector<Vec3> mean;      // spatial mean of u(T)
    std::vector<bool> blowup;
    std::vector<double> diff;    // V-norm of consecutive differences
    SpaceTimeField finest;       // finest-eps field in the coarse frame
};

struct ConvergenceReport {
    double T = 0.0;
    double frame_dt = 0.0;
    double frame_period = 0.0;
    std::vector<ConvergenceCurve> curves;
};

/// Solves for every eps with one shared noise path and dt = min eps^2/8, for
/// each requested counterterm mode.
ConvergenceReport convergence_study(const std::vector<double>& eps_list, std::uint64_t seed,
                                    const CouplingTensor& M, const Cutoff& chi, double T,
                                    const RenormConstants& rc,
                                    const std::vector<CountertermMode>& modes);

/// d_last r / (1 - r), r = d_last / d_prev; infinite unless 0 <= r < 1.
double envelope_tail(const std::vector<double>& diff);

}  // namespace kpz
