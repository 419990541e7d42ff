#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpz {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

struct QuadOptions {
    double rel_tol = 1e-9;
    int max_depth = 30;
    double abs_tol = 1e-300;
};

/// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// Adaptive Gauss-Kronrod (7/15) on [a,b]; throws QuadratureError on failure.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opt = {});

/// Same, split at the given breakpoints (clipped to [a,b], any order).
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     std::vector<double> breaks, const QuadOptions& opt = {});

/// Gauss-Legendre rule on [-1,1].
struct GLRule {
    std::vector<double> x;
    std::vector<double> w;
};

/// n in {7, 10, 15, 20, 25, 30}.
const GLRule& gauss_legendre(int n);

template <class F>
double gl_integrate(F&& f, double a, double b, const GLRule& rule) {
    const double h = 0.5 * (b - a), c = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) s += rule.w[i] * f(c + h * rule.x[i]);
    return s * h;
}

/// Composite Gauss-Legendre over consecutive pieces of `breaks` (sorted).
template <class F>
double gl_integrate_pieces(F&& f, const std::vector<double>& breaks, const GLRule& rule) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        if (breaks[i + 1] > breaks[i]) s += gl_integrate(f, breaks[i], breaks[i + 1], rule);
    return s;
}

/// Sorted unique breakpoints of `pts` clipped into [a,b], including a and b.
std::vector<double> clip_breaks(double a, double b, std::vector<double> pts);

}  // namespace kpz
