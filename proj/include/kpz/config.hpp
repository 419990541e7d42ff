#pragma once

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kpz/coupling.hpp"
#include "kpz/renorm.hpp"

namespace kpz {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One run, read from an INI file:
///
///   [run]         subcommand, seed, jobs
///   [model]       coupling (identity|all-ones|zero|custom), M1..M3 as
///                 "a b c; d e f; g h i", cutoff, cutoff_prime, L
///   [renorm]      eps_list
///   [simulate]    eps, T, nx, dt, snapshot_every, counterterm
///   [convergence] eps_list, T, modes, compare_cutoffs
///   [rg-flow]     N, m, nx, nt, dt, tol, max_iter, gamma, feedback, test_fields
///   [verify]      batteries, quick
///
/// nx = 0 or dt = 0 selects the default resolution.
struct RunConfig {
    std::string subcommand;
    std::uint64_t seed = 1;
    int jobs = 1;

    std::string coupling = "identity";
    CouplingTensor M = CouplingTensor::identity();
    std::string cutoff = "smootherstep";
    std::string cutoff_prime = "smootherstep-narrow";
    double L = 2.0;

    std::vector<double> renorm_eps = default_m3_eps();

    double eps = 0.125;
    double T = 0.25;
    int nx = 0;
    double dt = 0.0;
    int snapshot_every = 8;
    std::string counterterm = "full";

    std::vector<double> conv_eps{0.125, 0.0625, 0.03125};
    double conv_T = 0.25;
    std::vector<std::string> conv_modes{"full", "off"};
    bool compare_cutoffs = true;

    int N = 3;
    int m = 0;
    int rg_nx = 32;
    int rg_nt = 256;
    double rg_dt = 1.0 / 512;
    double tol = 1e-8;
    int max_iter = 50;
    double gamma = 0.05;
    bool feedback = true;
    int test_fields = 3;

    std::vector<std::string> batteries{"lemma-heatkernel"};
    bool quick = false;

    /// Normalized key = value listing of every field, used for the manifest echo.
    std::string echo() const;
};

RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);

/// Checks every field against the preconditions of the target subcommand;
/// throws ConfigError naming the offending key.
void validate(const RunConfig& cfg);

std::vector<std::string> subcommand_names();

}  // namespace kpz
