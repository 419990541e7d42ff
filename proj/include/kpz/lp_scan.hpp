#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "kpz/cutoff.hpp"

namespace kpz {

/// C: sup_N |c_n^{(N)}|; Y: |dH/dx| chi(t); dC, dY: difference between the
/// lower cutoffs chi and chi'; W: |W_n|; Z: |Y_n * J_n|.
enum class LpKernel { C, Y, dC, dY, W, Z };

LpKernel lp_kernel_from_name(const std::string& name);
std::string lp_kernel_name(LpKernel k);

struct LpScanOptions {
    int n = 1;
    /// Cutoff scale for the finite-N kernels (dC, dY, W, Z).
    int N = 3;
    double L = 2.0;
    /// C takes the sup over N - n = 1..sup_depth together with the limit.
    int sup_depth = 6;
    int levels = 7;
};

struct LpScanEntry {
    double p = 0.0;
    std::vector<double> values;  // int |f|^p at each refinement level
    std::string classification;
};

struct LpScanReport {
    std::string kernel;
    int n = 0;
    int N = 0;
    std::vector<LpScanEntry> entries;
};

/// "stable": last two levels differ by < 5%; "diverging": every step of the
/// last three levels grows by > 25%; otherwise "undetermined".
std::string classify_lp(const std::vector<double>& values);

/// Singular kernels are integrated outside a parabolic box |t| < d^2, |x| < d
/// around the origin, d = 4^{-level} min(1/2, L^n/4). Z is computed on a
/// space-time grid refined by 2 in x and 4 in t per level.
LpScanReport lp_norm_scan(LpKernel kernel, const std::vector<double>& p_list, const Cutoff& chi,
                          const Cutoff& chi_prime, const LpScanOptions& opt);

void write_lp_csv(const LpScanReport& r, std::ostream& os);

}  // namespace kpz
