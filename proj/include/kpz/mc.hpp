#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "kpz/coupling.hpp"
#include "kpz/cutoff.hpp"
#include "kpz/field.hpp"

namespace kpz {

struct CovarianceEstimate {
    std::string field;
    std::vector<std::string> labels;
    std::vector<double> mean;
    std::vector<double> std_error;
    std::vector<double> reference;  // empty when there is no oracle
    int ensemble = 0;
    void write_csv(std::ostream& os) const;
};

using Sampler = std::function<std::vector<double>(std::uint64_t seed)>;

/// Means of the sampler outputs over seeds seed0 .. seed0+ensemble-1 with
/// jackknife standard errors. Seeds run on `jobs` threads; the reduction is
/// in seed order with compensated summation, so results do not depend on jobs.
CovarianceEstimate mc_estimate(const std::string& field, const Sampler& sampler,
                               std::vector<std::string> labels, int ensemble, std::uint64_t seed0,
                               int jobs);

/// Stationary theta_n = Y_n^{(N)} * xi_n in frame n on nx points, sampled on
/// nt frame steps of length dt_frame after a burn-in covering the kernel support.
struct ThetaSetup {
    int n = 1;
    int N = 3;
    double L = 2.0;
    int nx = 32;
    double dt_frame = 1.0 / 1024;
    int nt = 1;
};

SpaceTimeField sample_theta_window(std::uint64_t seed, const ThetaSetup& s, const Cutoff& chi);

struct Lag {
    double t = 0.0;
    double x = 0.0;
};

/// E theta_a(z) theta_a(z + lag), averaged over x, components and two time
/// origins; reference from the covariance quadrature.
CovarianceEstimate theta_covariance_mc(const ThetaSetup& s, const Cutoff& chi,
                                       const std::vector<Lag>& lags, int ensemble,
                                       std::uint64_t seed0, int jobs);

/// E sigma_{ab}(z, z + lag) / (4 Y(lag)) for all nine (a,b); reference m_ab c(lag).
CovarianceEstimate sigma_mean_mc(const ThetaSetup& s, const Cutoff& chi, const CouplingTensor& M,
                                 const Lag& lag, int ensemble, std::uint64_t seed0, int jobs);

/// E|rho|^2 with rho = K * z1 at the centre of the window, z1 the Wick
/// ordered (theta, M theta), averaged over x; K is truncated to |t| <= half_window.
CovarianceEstimate rho_second_moment_mc(const ThetaSetup& s, const Cutoff& chi,
                                        const CouplingTensor& M, double half_window, int ensemble,
                                        std::uint64_t seed0, int jobs);

/// E|rho - rho'|^2 where rho' is built from the same noise with chi_prime.
CovarianceEstimate rho_cutoff_difference_mc(const ThetaSetup& s, const Cutoff& chi,
                                            const Cutoff& chi_prime, const CouplingTensor& M,
                                            double half_window, int ensemble, std::uint64_t seed0,
                                            int jobs);

/// Grid meeting the resolution rules for theta at (n, N): frame step
/// L^{-2(N-n)}/16, spatial step L^{-(N-n)}/4 rounded to a power of two.
ThetaSetup default_theta_setup(int n, int N, double L, double window);

}  // namespace kpz
