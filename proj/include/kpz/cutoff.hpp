#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace kpz {

/// Smooth bump chi: 1 on [0,1], 0 on [b,inf) with b <= 2, monotone in between.
class Cutoff {
public:
    /// 1 - S(s-1) with S(x) = 6x^5 - 15x^4 + 10x^3; transition on [1,2].
    static Cutoff smootherstep();
    /// Same profile compressed onto [1,1.5].
    static Cutoff smootherstep_narrow();
    /// Monotone C^1 interpolant of samples on [1,2] (first value 1, last 0).
    static Cutoff from_samples(const std::vector<double>& s, const std::vector<double>& v,
                               const std::string& id = "table");
    /// "smootherstep" | "smootherstep-narrow".
    static Cutoff by_name(const std::string& name);

    double operator()(double s) const;
    double derivative(double s) const;
    double c1_norm() const { return c1_norm_; }
    const std::string& id() const { return id_; }
    double transition_begin() const { return 1.0; }
    double transition_end() const { return end_; }

private:
    Cutoff() = default;
    std::string id_;
    double end_ = 2.0;
    double c1_norm_ = 0.0;
    std::shared_ptr<const std::function<double(double)>> profile_;     // on [1,end]
    std::shared_ptr<const std::function<double(double)>> dprofile_;
};

/// chi_m(s) = chi(s) - chi(L^{2m} s); smooth indicator of [L^{-2m}, 2].
double chi_m(const Cutoff& chi, int m, double L, double s);

/// chi_eps(s) = chi(s) - chi(s / eps^2); equals chi_m for eps = L^{-m}.
double chi_eps(const Cutoff& chi, double eps, double s);

/// Mixed version with a different lower cutoff: chi(s) - chi_low(s / eps^2).
double chi_eps(const Cutoff& chi, const Cutoff& chi_low, double eps, double s);

}  // namespace kpz
