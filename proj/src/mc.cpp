#include "kpz/mc.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "kpz/kernels.hpp"
#include "kpz/noise.hpp"
#include "kpz/rgflow.hpp"

namespace kpz {

namespace {

struct Neumaier {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        const double t = sum + x;
        comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

// Every built-in cutoff vanishes beyond 2, so a fixed burn-in keeps the noise
// windows of different cutoffs aligned.
int burn_in_steps(const ThetaSetup& s) { return static_cast<int>(std::ceil(2.0 / s.dt_frame)) + 1; }

ScaleFrame theta_frame(const ThetaSetup& s, int nt_total) {
    ScaleFrame f;
    f.n = s.n;
    f.N = s.N;
    f.m = 0;
    f.L = s.L;
    f.nx = s.nx;
    f.nt = nt_total;
    f.dt = s.dt_frame * std::pow(s.L, -2.0 * s.n);
    return f;
}

int grid_offset(double v, double h, const char* what) {
    const double q = v / h;
    const long r = std::lround(q);
    if (std::abs(q - r) > 1e-9) throw std::invalid_argument(fmt::format("{} {} is not on the grid", what, v));
    return static_cast<int>(r);
}

}  // namespace

void CovarianceEstimate::write_csv(std::ostream& os) const {
    os << "field,label,mean,std_error,reference,ensemble\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        os << fmt::format("{},{},{:.12e},{:.6e},", field, labels[i], mean[i], std_error[i]);
        if (i < reference.size()) os << fmt::format("{:.12e}", reference[i]);
        os << ',' << ensemble << '\n';
    }
}

CovarianceEstimate mc_estimate(const std::string& field, const Sampler& sampler,
                               std::vector<std::string> labels, int ensemble, std::uint64_t seed0,
                               int jobs) {
    if (ensemble < 2) throw std::invalid_argument("ensemble must have at least two members");
    jobs = std::max(1, std::min(jobs, ensemble));
    std::vector<std::vector<double>> per_seed(ensemble);
    std::vector<std::exception_ptr> errors(jobs);
    auto work = [&](int tid) {
        try {
            for (int i = tid; i < ensemble; i += jobs) per_seed[i] = sampler(seed0 + i);
        } catch (...) {
            errors[tid] = std::current_exception();
        }
    };
    if (jobs == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    const std::size_t k = labels.size();
    for (const auto& v : per_seed)
        if (v.size() != k) throw std::logic_error("sampler returned the wrong number of observables");

    CovarianceEstimate est;
    est.field = field;
    est.labels = std::move(labels);
    est.ensemble = ensemble;
    est.mean.resize(k);
    est.std_error.resize(k);
    const double n = ensemble;
    for (std::size_t j = 0; j < k; ++j) {
        Neumaier total;
        for (const auto& v : per_seed) total.add(v[j]);
        const double S = total.value(), mean = S / n;
        Neumaier dev;
        for (const auto& v : per_seed) {
            const double loo = (S - v[j]) / (n - 1.0);
            dev.add((loo - mean) * (loo - mean));
        }
        est.mean[j] = mean;
        est.std_error[j] = std::sqrt((n - 1.0) / n * dev.value());
    }
    return est;
}

namespace {

class ThetaSampler {
public:
    ThetaSampler(const ThetaSetup& s, const Cutoff& chi)
        : s_(s), burn_(burn_in_steps(s)), frame_(theta_frame(s, burn_ + s.nt)) {
        frame_.validate();
        Y_ = std::make_shared<const FrameConvolution>(frame_, chi, s.N - s.n);
    }
    SpaceTimeField operator()(std::uint64_t seed) const {
        const NoiseRealization noise = sample_white_noise(seed, {s_.nx / 2 - 1, frame_.dt, frame_.nt});
        const SpaceTimeField full = Y_->apply_noise(noise);
        SpaceTimeField out(s_.nt, s_.nx);
        for (int a = 0; a < 3; ++a)
            std::copy(full.c[a].begin() + static_cast<std::ptrdiff_t>(burn_) * s_.nx, full.c[a].end(),
                      out.c[a].begin());
        return out;
    }

private:
    ThetaSetup s_;
    int burn_;
    ScaleFrame frame_;
    std::shared_ptr<const FrameConvolution> Y_;
};

}  // namespace

SpaceTimeField sample_theta_window(std::uint64_t seed, const ThetaSetup& s, const Cutoff& chi) {
    return ThetaSampler(s, chi)(seed);
}

namespace {

// E theta_a^2 of the sampled field: the Riemann sum the convolution realizes.
double theta_variance_discrete(const ThetaSetup& s, const Cutoff& chi) {
    const double P = std::pow(s.L, s.n), lam = std::pow(s.L, 2 * (s.N - s.n));
    const int q_max = burn_in_steps(s);
    double total = 0.0;
    for (int k = 1; k < s.nx / 2; ++k) {
        const double p = 2.0 * std::numbers::pi * k / P;
        for (int q = 1; q < q_max; ++q) {
            const double tau = q * s.dt_frame;
            const double g = p * std::exp(-tau * p * p) * (chi(tau) - chi(lam * tau));
            total += g * g;
        }
    }
    return 2.0 * s.dt_frame * total / P;
}

struct LagIndex {
    int dt;
    int dx;
};

std::vector<LagIndex> lag_indices(const ThetaSetup& s, const std::vector<Lag>& lags) {
    const double h = std::pow(s.L, s.n) / s.nx;
    std::vector<LagIndex> out;
    for (const auto& l : lags) {
        if (l.t < 0.0) throw std::invalid_argument("time lags must be non-negative");
        out.push_back({grid_offset(l.t, s.dt_frame, "time lag"), grid_offset(l.x, h, "space lag")});
    }
    return out;
}

}  // namespace

CovarianceEstimate theta_covariance_mc(const ThetaSetup& s0, const Cutoff& chi,
                                       const std::vector<Lag>& lags, int ensemble,
                                       std::uint64_t seed0, int jobs) {
    ThetaSetup s = s0;
    const auto idx = lag_indices(s, lags);
    int max_dt = 0;
    for (const auto& l : idx) max_dt = std::max(max_dt, l.dt);
    // Two origins a full kernel support apart.
    const int sep = burn_in_steps(s) + max_dt;
    s.nt = sep + max_dt + 1;
    const int origins[2] = {0, sep};

    Sampler sampler = [s, idx, origins, theta = ThetaSampler(s, chi)](std::uint64_t seed) {
        const SpaceTimeField th = theta(seed);
        std::vector<double> obs;
        for (const auto& l : idx) {
            double acc = 0.0;
            for (int o : origins)
                for (int a = 0; a < 3; ++a)
                    for (int ix = 0; ix < s.nx; ++ix)
                        acc += th.at(a, o, ix) * th.at(a, o + l.dt, (ix + l.dx) % s.nx);
            obs.push_back(acc / (2.0 * 3.0 * s.nx));
        }
        return obs;
    };
    std::vector<std::string> labels;
    for (const auto& l : lags) labels.push_back(fmt::format("t={:g};x={:g}", l.t, l.x));
    auto est = mc_estimate("theta", sampler, labels, ensemble, seed0, jobs);
    for (const auto& l : lags) est.reference.push_back(covariance_C(s.n, s.N, s.L, chi, l.t, l.x).value);
    return est;
}

CovarianceEstimate sigma_mean_mc(const ThetaSetup& s0, const Cutoff& chi, const CouplingTensor& M,
                                 const Lag& lag, int ensemble, std::uint64_t seed0, int jobs) {
    ThetaSetup s = s0;
    const auto idx = lag_indices(s, {lag}).front();
    if (idx.dt <= 0) throw std::invalid_argument("sigma needs a positive time lag");
    const int sep = burn_in_steps(s) + idx.dt;
    s.nt = sep + idx.dt + 1;
    const int origins[2] = {0, sep};
    const double Y = Y_kernel(s.n, s.N, s.L, chi, lag.t, lag.x);

    // A^{(a)}_{gl} = sum_d M^{(a)}_{gd} M^{(d)}_{lb}, one matrix per (a,b).
    std::array<std::array<Mat3, 3>, 3> A{};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int g = 0; g < 3; ++g)
                for (int l = 0; l < 3; ++l) {
                    double v = 0.0;
                    for (int d = 0; d < 3; ++d) v += M(a, g, d) * M(d, l, b);
                    A[a][b][g][l] = v;
                }

    Sampler sampler = [s, idx, origins, A, Y, theta = ThetaSampler(s, chi)](std::uint64_t seed) {
        const SpaceTimeField th = theta(seed);
        std::vector<double> obs(9, 0.0);
        for (int o : origins)
            for (int ix = 0; ix < s.nx; ++ix) {
                Vec3 late{}, early{};
                for (int g = 0; g < 3; ++g) {
                    late[g] = th.at(g, o + idx.dt, (ix + idx.dx) % s.nx);
                    early[g] = th.at(g, o, ix);
                }
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) {
                        double v = 0.0;
                        for (int g = 0; g < 3; ++g)
                            for (int l = 0; l < 3; ++l) v += late[g] * A[a][b][g][l] * early[l];
                        obs[3 * a + b] += v;
                    }
            }
        for (auto& v : obs) v *= 4.0 * Y / (2.0 * s.nx);
        return obs;
    };
    std::vector<std::string> labels;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) labels.push_back(fmt::format("sigma_{}{}", a, b));
    auto est = mc_estimate("sigma", sampler, labels, ensemble, seed0, jobs);
    const double J = Y * covariance_C(s.n, s.N, s.L, chi, lag.t, lag.x).value;
    const auto cs = contract(M);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) est.reference.push_back(4.0 * cs.frak_m[a][b] * J);
    return est;
}

namespace {

// rho = K * z1 at the window centre, one row per component.
class RhoSampler {
public:
    RhoSampler(const ThetaSetup& s, const Cutoff& chi, const CouplingTensor& M, int half)
        : s_(s), M_(M), half_(half), theta_(s, chi), var_(theta_variance_discrete(s, chi)),
          tr_(contract(M).trace_vector) {}

    std::array<std::vector<double>, 3> operator()(std::uint64_t seed) const {
        const SpaceTimeField th = theta_(seed);
        const int nx = s_.nx;
        std::array<std::vector<double>, 3> acc, z;
        for (auto& v : acc) v.assign(nx, 0.0);
        for (auto& v : z) v.resize(nx);
        std::array<const double*, 3> phi;
        std::array<double*, 3> out;
        for (int it = 0; it < s_.nt; ++it) {
            for (int a = 0; a < 3; ++a) {
                phi[a] = th.c[a].data() + static_cast<std::size_t>(it) * nx;
                out[a] = z[a].data();
            }
            apply_nonlinearity(M_, phi, out, nx);
            const double w = s_.dt_frame * K1((it - half_) * s_.dt_frame);
            for (int a = 0; a < 3; ++a)
                for (int ix = 0; ix < nx; ++ix) acc[a][ix] += w * (z[a][ix] - var_ * tr_[a]);
        }
        const double P = std::pow(s_.L, s_.n);
        std::vector<cplx> spec;
        for (int a = 0; a < 3; ++a) {
            rfft(acc[a], spec);
            for (std::size_t k = 0; k < spec.size(); ++k) {
                const double p = 2.0 * std::numbers::pi * static_cast<double>(k) / P;
                spec[k] /= 1.0 + p * p;
            }
            irfft(spec, acc[a], nx);
        }
        return acc;
    }

private:
    ThetaSetup s_;
    CouplingTensor M_;
    int half_;
    ThetaSampler theta_;
    double var_;
    Vec3 tr_;
};

ThetaSetup rho_window(const ThetaSetup& s0, double half_window, int& half) {
    ThetaSetup s = s0;
    half = static_cast<int>(std::ceil(half_window / s.dt_frame));
    s.nt = 2 * half + 1;
    return s;
}

std::vector<double> mean_squares(const std::array<std::vector<double>, 3>& rho) {
    std::vector<double> obs(4, 0.0);
    for (int a = 0; a < 3; ++a) {
        for (double r : rho[a]) obs[a] += r * r;
        obs[a] /= static_cast<double>(rho[a].size());
        obs[3] += obs[a];
    }
    return obs;
}

}  // namespace

CovarianceEstimate rho_second_moment_mc(const ThetaSetup& s0, const Cutoff& chi,
                                        const CouplingTensor& M, double half_window, int ensemble,
                                        std::uint64_t seed0, int jobs) {
    int half = 0;
    const ThetaSetup s = rho_window(s0, half_window, half);
    Sampler sampler = [rho = RhoSampler(s, chi, M, half)](std::uint64_t seed) {
        return mean_squares(rho(seed));
    };
    return mc_estimate("rho", sampler, {"rho2_0", "rho2_1", "rho2_2", "rho2_total"}, ensemble,
                       seed0, jobs);
}

CovarianceEstimate rho_cutoff_difference_mc(const ThetaSetup& s0, const Cutoff& chi,
                                            const Cutoff& chi_prime, const CouplingTensor& M,
                                            double half_window, int ensemble, std::uint64_t seed0,
                                            int jobs) {
    int half = 0;
    const ThetaSetup s = rho_window(s0, half_window, half);
    Sampler sampler = [a = RhoSampler(s, chi, M, half),
                       b = RhoSampler(s, chi_prime, M, half)](std::uint64_t seed) {
        auto ra = a(seed);
        const auto rb = b(seed);
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < ra[c].size(); ++i) ra[c][i] -= rb[c][i];
        return mean_squares(ra);
    };
    return mc_estimate("rho_diff", sampler, {"drho2_0", "drho2_1", "drho2_2", "drho2_total"},
                       ensemble, seed0, jobs);
}

ThetaSetup default_theta_setup(int n, int N, double L, double window) {
    if (n < 0 || N <= n) throw std::invalid_argument("theta needs 0 <= n < N");
    ThetaSetup s;
    s.n = n;
    s.N = N;
    s.L = L;
    s.dt_frame = std::pow(L, -2.0 * (N - n)) / 16.0;
    const double target = std::pow(L, -(N - n)) / 4.0, P = std::pow(L, n);
    s.nx = 8;
    while (P / s.nx > target * (1.0 + 1e-12)) s.nx *= 2;
    s.nt = static_cast<int>(std::ceil(window / s.dt_frame)) + 1;
    return s;
}

}  // namespace kpz
