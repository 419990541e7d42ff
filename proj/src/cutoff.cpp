#include "kpz/cutoff.hpp"

// boost 1.74 pchip calls unqualified isnan
#include <math.h>

#include <boost/math/interpolators/pchip.hpp>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kpz {

namespace {

double smoother(double x) { return x * x * x * (x * (6.0 * x - 15.0) + 10.0); }
double dsmoother(double x) { return 30.0 * x * x * (x - 1.0) * (x - 1.0); }


}  // namespace

Cutoff Cutoff::smootherstep() {
    Cutoff c;
    c.id_ = "smootherstep";
    c.end_ = 2.0;
    c.profile_ = std::make_shared<std::function<double(double)>>(
        [](double s) { return 1.0 - smoother(s - 1.0); });
    c.dprofile_ = std::make_shared<std::function<double(double)>>(
        [](double s) { return -dsmoother(s - 1.0); });
    c.c1_norm_ = 1.0 + 1.875;
    return c;
}

Cutoff Cutoff::smootherstep_narrow() {
    Cutoff c;
    c.id_ = "smootherstep-narrow";
    c.end_ = 1.5;
    c.profile_ = std::make_shared<std::function<double(double)>>(
        [](double s) { return 1.0 - smoother((s - 1.0) * 2.0); });
    c.dprofile_ = std::make_shared<std::function<double(double)>>(
        [](double s) { return -2.0 * dsmoother((s - 1.0) * 2.0); });
    c.c1_norm_ = 1.0 + 3.75;
    return c;
}

Cutoff Cutoff::from_samples(const std::vector<double>& s, const std::vector<double>& v,
                            const std::string& id) {
    if (s.size() != v.size() || s.size() < 4)
        throw std::invalid_argument("cutoff table needs >= 4 (s, value) pairs");
    if (std::abs(s.front() - 1.0) > 1e-12 || s.back() > 2.0 + 1e-12)
        throw std::invalid_argument("cutoff table must start at s=1 and end at s<=2");
    if (std::abs(v.front() - 1.0) > 1e-12 || std::abs(v.back()) > 1e-12)
        throw std::invalid_argument("cutoff table must go from 1 to 0");
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (!(s[i] > s[i - 1])) throw std::invalid_argument("cutoff table abscissae not increasing");
        if (v[i] > v[i - 1]) throw std::invalid_argument("cutoff table values not monotone");
    }
    using boost::math::interpolators::pchip;
    auto interp = std::make_shared<pchip<std::vector<double>>>(
        std::vector<double>(s), std::vector<double>(v), 0.0, 0.0);
    Cutoff c;
    c.id_ = id;
    c.end_ = s.back();
    c.profile_ = std::make_shared<std::function<double(double)>>(
        [interp](double x) { return std::clamp((*interp)(x), 0.0, 1.0); });
    c.dprofile_ = std::make_shared<std::function<double(double)>>(
        [interp](double x) { return interp->prime(x); });
    double dmax = 0.0;
    for (int i = 0; i <= 2000; ++i) {
        const double x = 1.0 + (c.end_ - 1.0) * i / 2000.0;
        dmax = std::max(dmax, std::abs(interp->prime(x)));
    }
    c.c1_norm_ = 1.0 + dmax;
    return c;
}

Cutoff Cutoff::by_name(const std::string& name) {
    if (name == "smootherstep") return smootherstep();
    if (name == "smootherstep-narrow") return smootherstep_narrow();
    throw std::invalid_argument("unknown cutoff '" + name + "'");
}

double Cutoff::operator()(double s) const {
    if (s <= 1.0) return 1.0;
    if (s >= end_) return 0.0;
    return (*profile_)(s);
}

double Cutoff::derivative(double s) const {
    if (s <= 1.0 || s >= end_) return 0.0;
    return (*dprofile_)(s);
}

double chi_m(const Cutoff& chi, int m, double L, double s) {
    return chi(s) - chi(std::pow(L, 2 * m) * s);
}

double chi_eps(const Cutoff& chi, double eps, double s) { return chi(s) - chi(s / (eps * eps)); }

double chi_eps(const Cutoff& chi, const Cutoff& chi_low, double eps, double s) {
    return chi(s) - chi_low(s / (eps * eps));
}

}  // namespace kpz
