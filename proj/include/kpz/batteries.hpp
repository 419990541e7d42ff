#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "kpz/coupling.hpp"
#include "kpz/cutoff.hpp"

namespace kpz {

struct Check {
    std::string name;
    double value = 0.0;
    double reference = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

struct BatteryReport {
    std::string name;
    std::vector<Check> checks;
    bool pass() const;
    void write_csv(std::ostream& os) const;
};

struct BatteryOptions {
    std::uint64_t seed = 1;
    int jobs = 1;
    /// Smaller ensembles and fewer refinement levels.
    bool quick = false;
};

/// "lemma-greg" | "prop-covariance" | "lemma-deco" | "lemma-heatkernel".
std::vector<std::string> battery_names();
BatteryReport run_battery(const std::string& name, const Cutoff& chi, const Cutoff& chi_prime,
                          const CouplingTensor& M, const BatteryOptions& opt);

/// delta_N = c_n^{(N)}(0,0) tr - L^{N-n} m1 for N - n = 1..depth; the check
/// passes when max/min of every component stays below 2.
Check heatkernel_band(const Cutoff& chi, const CouplingTensor& M, int n, double L, int depth,
                      std::vector<Vec3>* deltas = nullptr);

/// C at p = 2.5 / 3.5 and Y at p = 1.2 / 1.6.
std::vector<Check> greg_thresholds(const Cutoff& chi, int levels);

/// Z at p = 1 stable for N - n = 1..max_depth.
std::vector<Check> z_stability(const Cutoff& chi, int n, int max_depth, int levels);

/// |W|_1 over N - n = 1..max_depth: increments shrink and the last relative
/// change is below 10%.
Check w_bounded(const Cutoff& chi, int n, int max_depth);

struct CovarianceBatteryConfig {
    int theta_ensemble = 1000;
    int rho_ensemble = 100;
    int rho_n = 2;
    double rho_half_window = 2.0;
};

/// theta covariance at five lags (4 sigma), E sigma against 4 m J (4 sigma),
/// and E|rho|^2 at N - n = 2 and 4 (variation under 3 sigma).
std::vector<Check> covariance_checks(const Cutoff& chi, const CouplingTensor& M,
                                     const CovarianceBatteryConfig& cfg, std::uint64_t seed,
                                     int jobs);

/// E|rho' - rho|^2 at N - n = 2 and 3 with rho' from chi_prime: decreasing.
Check cutoff_sensitivity(const Cutoff& chi, const Cutoff& chi_prime, const CouplingTensor& M,
                         const CovarianceBatteryConfig& cfg, std::uint64_t seed, int jobs);

}  // namespace kpz
