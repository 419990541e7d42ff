#include "kpz/quadrature.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <map>
#include <mutex>

namespace kpz {

namespace {

// Kronrod 15 / Gauss 7 nodes on [0,1] (symmetric half).
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error, l1;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double rk = fc * kWgk[7], rg = fc * kWg[3], l1 = std::abs(fc) * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double f1 = f(c - x), f2 = f(c + x);
        rk += kWgk[j] * (f1 + f2);
        l1 += kWgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) rg += kWg[j / 2] * (f1 + f2);
    }
    const double err = std::abs((rk - rg) * h);
    return {a, b, rk * h, err, l1 * std::abs(h)};
}

template <int N>
GLRule make_rule() {
    using G = boost::math::quadrature::gauss<double, N>;
    GLRule r;
    const auto& xs = G::abscissa();
    const auto& ws = G::weights();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] == 0.0) {
            r.x.push_back(0.0);
            r.w.push_back(ws[i]);
        } else {
            r.x.push_back(xs[i]);
            r.w.push_back(ws[i]);
            r.x.push_back(-xs[i]);
            r.w.push_back(ws[i]);
        }
    }
    return r;
}

}  // namespace

std::vector<double> clip_breaks(double a, double b, std::vector<double> pts) {
    std::vector<double> out{a, b};
    for (double p : pts)
        if (p > a && p < b) out.push_back(p);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opt) {
    return integrate(f, a, b, {}, opt);
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     std::vector<double> breaks, const QuadOptions& opt) {
    if (!(b > a)) return {};
    const auto pts = clip_breaks(a, b, std::move(breaks));
    // globally adaptive bisection of the segment with the largest error
    std::vector<Segment> heap;
    double value = 0.0, error = 0.0, l1 = 0.0;
    auto push = [&](const Segment& s) {
        if (!std::isfinite(s.value))
            throw QuadratureError(fmt::format("non-finite integrand on [{:g}, {:g}]", s.a, s.b), s.error);
        heap.push_back(s);
        std::push_heap(heap.begin(), heap.end());
        value += s.value;
        error += s.error;
        l1 += s.l1;
    };
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) push(gk15(f, pts[i], pts[i + 1]));
    const double min_width = (b - a) * std::ldexp(1.0, -opt.max_depth);
    const std::size_t max_segments = 4096 + 64 * pts.size();
    while (error > std::max(opt.rel_tol * l1, opt.abs_tol)) {
        std::pop_heap(heap.begin(), heap.end());
        const Segment s = heap.back();
        heap.pop_back();
        // roundoff floor: the largest remaining error is at machine precision of the total
        if (s.error <= 1e-15 * l1) {
            heap.push_back(s);
            std::push_heap(heap.begin(), heap.end());
            break;
        }
        if (s.b - s.a < min_width || heap.size() >= max_segments)
            throw QuadratureError(fmt::format("adaptive quadrature on [{:g}, {:g}] did not converge "
                                              "(error {:.3g}, mass {:.3g})",
                                              a, b, error, l1),
                                  error);
        value -= s.value;
        error -= s.error;
        l1 -= s.l1;
        const double m = 0.5 * (s.a + s.b);
        push(gk15(f, s.a, m));
        push(gk15(f, m, s.b));
    }
    // re-sum to drop the drift of the running totals
    QuadResult r;
    for (const auto& s : heap) {
        r.value += s.value;
        r.error += s.error;
    }
    return r;
}

const GLRule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, GLRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GLRule r;
    switch (n) {
        case 7: r = make_rule<7>(); break;
        case 10: r = make_rule<10>(); break;
        case 15: r = make_rule<15>(); break;
        case 20: r = make_rule<20>(); break;
        case 25: r = make_rule<25>(); break;
        case 30: r = make_rule<30>(); break;
        default: throw std::invalid_argument("unsupported Gauss-Legendre order");
    }
    return cache.emplace(n, std::move(r)).first->second;
}

}  // namespace kpz
