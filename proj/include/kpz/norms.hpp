#pragma once

#include <string>
#include <vector>

#include "kpz/field.hpp"

namespace kpz {

struct NormReport {
    std::string id;
    double value = 0.0;
    int level = 0;
    double error = 0.0;
};

/// K * v on a space-time grid: time convolution with K1 (field zero outside
/// the window, two-pass recursive filter) and the exact torus multiplier
/// 1/(1+p^2) of K2 in space.
SpaceTimeField smooth_K(const SpaceTimeField& v, double dt, double period);

/// sup over unit cubes of the L^2 norm of K * v. Cubes are anchored at
/// integer points; a partial cube at the torus seam is merged with the first.
NormReport vn_norm(const SpaceTimeField& v, double dt, double period);

/// Bi-local field sampled on pairs of space-time points of one grid:
/// sigma(z, z') stored as a dense (nt nx) x (nt nx) matrix for one component pair.
struct BilocalField {
    int nt = 0;
    int nx = 0;
    std::vector<double> v;  // [(it*nx+ix) * (nt*nx) + (jt*nx+jx)]
    double at(int it, int ix, int jt, int jx) const {
        return v[(static_cast<std::size_t>(it) * nx + ix) * static_cast<std::size_t>(nt) * nx +
                 static_cast<std::size_t>(jt) * nx + jx];
    }
};

/// sup_i sum_j ||(K x K) * sigma||_{L^2(c_i x c_j)}; the j-sum stops once the
/// remaining cubes (sorted by distance) add less than 1e-12 of the running sum.
NormReport bilocal_norm(const BilocalField& s, double dt, double period);

/// sum_j ||K * v||_{L^2(c_j)}, the summed companion of vn_norm.
double vn_norm_summed(const SpaceTimeField& v, double dt, double period);

}  // namespace kpz
