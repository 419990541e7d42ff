#include "kpz/solver.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "kpz/kernels.hpp"
#include "kpz/norms.hpp"

namespace kpz {

namespace {

constexpr double kBlowup = 1e6;

void truncate_modes(std::vector<cplx>& s, int kd) {
    for (std::size_t k = kd + 1; k < s.size(); ++k) s[k] = 0.0;
}

}  // namespace

Field3 dealiased_product(const CouplingTensor& M, const Field3& a, const Field3& b) {
    const int nx = a.nx(), kd = dealias_cutoff(nx);
    auto clean = [&](const Field3& f) {
        SpectralField s = to_spectral(f);
        for (auto& c : s.c) truncate_modes(c, kd);
        return to_physical(s);
    };
    const Field3 A = clean(a), B = &a == &b ? A : clean(b);
    Field3 out(nx);
    for (int i = 0; i < nx; ++i) {
        const Vec3 va{A.c[0][i], A.c[1][i], A.c[2][i]}, vb{B.c[0][i], B.c[1][i], B.c[2][i]};
        const Vec3 r = apply_bilinear(M, va, vb);
        for (int c = 0; c < 3; ++c) out.c[c][i] = r[c];
    }
    return clean(out);
}

Resolution default_resolution(double eps) {
    int nx = 4;
    while (1.0 / nx > eps / 4.0 * (1.0 + 1e-12)) nx *= 2;
    return {nx, eps * eps / 8.0};
}

std::string counterterm_mode_name(CountertermMode m) {
    switch (m) {
        case CountertermMode::Full: return "full";
        case CountertermMode::M1Only: return "m1-only";
        case CountertermMode::Off: return "off";
    }
    return "?";
}

DuhamelIntegrator::DuhamelIntegrator(double eps, const Cutoff& chi, const CouplingTensor& M,
                                     const Vec3& C_eps, int nx, double dt, const Field3& u0)
    : eps_(eps), dt_(dt), M_(M), C_(C_eps), nx_(nx), nk_(nx / 2 + 1) {
    if (!(dt > 0.0) || dt > eps * eps / 8.0 * (1.0 + 1e-12))
        throw std::invalid_argument("time step must satisfy dt <= eps^2/8");
    if (1.0 / nx > eps / 4.0 * (1.0 + 1e-12))
        throw std::invalid_argument("grid must satisfy dx <= eps/4");
    if (u0.nx() != nx) throw std::invalid_argument("initial field size mismatch");
    const double b = chi.transition_end();
    qb_ = static_cast<int>(std::ceil(b * eps * eps / dt - 1e-9));
    p2_.resize(nk_);
    e1_.resize(nk_);
    eb_.resize(nk_);
    for (int k = 0; k < nk_; ++k) {
        const double p = 2.0 * std::numbers::pi * k;
        p2_[k] = p * p;
        e1_[k] = std::exp(-dt * p2_[k]);
        eb_[k] = std::exp(-qb_ * dt * p2_[k]);
    }
    window_.assign(qb_, std::vector<double>(nk_, 0.0));
    for (int q = 1; q < qb_; ++q)
        for (int k = 0; k < nk_; ++k) window_[q][k] = G_eps_multiplier(eps, chi, q * dt, std::sqrt(p2_[k]));
    u0_ = to_spectral(u0);
    u_ = u0_;
    for (auto& a : acc_) a.assign(nk_, cplx{});
    ring_.assign(qb_, {});
    for (auto& r : ring_)
        for (auto& a : r) a.assign(nk_, cplx{});
}

Field3 DuhamelIntegrator::gradient() const {
    SpectralField d = u_;
    for (auto& c : d.c)
        for (int k = 0; k < nk_; ++k)
            c[k] *= (2 * k == nx_) ? cplx(0.0) : cplx(0.0, std::sqrt(p2_[k]));
    return to_physical(d);
}

Field3 DuhamelIntegrator::source() const {
    const Field3 g = gradient();
    Field3 f = dealiased_product(M_, g, g);
    for (int a = 0; a < 3; ++a)
        for (double& v : f.c[a]) v += C_[a];
    return f;
}

const SpectralField& DuhamelIntegrator::step(const NoiseRealization* noise) {
    const int n = step_;
    // S_n = (V(u_n) + C) dt + dXi_n, stored at ring slot n mod qb
    const SpectralField F = to_spectral(source());
    auto& slot = ring_[n % qb_];
    const int km = noise ? std::min(noise->k_max, nx_ / 2 - 1) : 0;
    for (int a = 0; a < 3; ++a) {
        for (int k = 0; k < nk_; ++k) slot[a][k] = F.c[a][k] * dt_;
        if (noise && n < noise->n_steps)
            for (int k = 1; k <= km; ++k) slot[a][k] += noise->at(n, a, k) * static_cast<double>(nx_);
    }
    // accumulator over lags >= qb: A_{n+1} = e^{-dt p^2} A_n + e^{-qb dt p^2} S_{n+1-qb}
    const int j = n + 1 - qb_;
    for (int a = 0; a < 3; ++a)
        for (int k = 0; k < nk_; ++k) {
            acc_[a][k] *= e1_[k];
            if (j >= 0) acc_[a][k] += eb_[k] * ring_[j % qb_][a][k];
        }
    ++step_;
    const double t = step_ * dt_;
    for (int a = 0; a < 3; ++a)
        for (int k = 0; k < nk_; ++k) {
            cplx v = std::exp(-t * p2_[k]) * u0_.c[a][k] + acc_[a][k];
            for (int q = 1; q < qb_ && step_ - q >= 0; ++q)
                if (window_[q][k] != 0.0) v += window_[q][k] * ring_[(step_ - q) % qb_][a][k];
            u_.c[a][k] = v;
        }
    u_.time = t;
    return u_;
}

SpectralField duhamel_step(DuhamelIntegrator& integ, const NoiseRealization* noise) {
    return integ.step(noise);
}

Trajectory solve_with_noise(double eps, double T, const CouplingTensor& M, const Vec3& C,
                            const Cutoff& chi, const Resolution& res,
                            const NoiseRealization* noise, const Field3& u0, int snapshot_every) {
    if (snapshot_every < 1) throw std::invalid_argument("snapshot interval must be positive");
    std::optional<NoiseRealization> coarse;
    if (noise && std::abs(noise->dt - res.dt) > 1e-12 * res.dt) {
        const double r = res.dt / noise->dt;
        const int f = static_cast<int>(std::lround(r));
        if (f < 1 || std::abs(r - f) > 1e-9) throw std::invalid_argument("noise grid incompatible with dt");
        coarse = coarsen(*noise, f, std::min(noise->k_max, res.nx / 2 - 1));
        noise = &*coarse;
    }
    const int n_steps = static_cast<int>(std::lround(T / res.dt));
    if (noise && noise->n_steps < n_steps) throw std::invalid_argument("noise shorter than horizon");
    DuhamelIntegrator integ(eps, chi, M, C, res.nx, res.dt, u0);
    Trajectory tr;
    tr.eps = eps;
    tr.seed = noise ? noise->seed : 0;
    tr.chi_id = chi.id();
    tr.C = C;
    tr.nx = res.nx;
    tr.dt = res.dt;
    SpectralField s0 = integ.state();
    tr.snapshots.push_back(s0);
    for (int n = 0; n < n_steps; ++n) {
        const SpectralField& u = integ.step(noise);
        const double sup = to_physical(u).sup();
        if (!(sup <= kBlowup)) {
            tr.blowup = true;
            tr.blowup_time = integ.time();
            break;
        }
        if ((n + 1) % snapshot_every == 0) tr.snapshots.push_back(u);
    }
    return tr;
}

Trajectory solve(double eps, double T, std::uint64_t seed, const CouplingTensor& M,
                 const RenormConstants& rc, const Cutoff& chi, const Resolution& res,
                 const SolveOptions& opt) {
    Vec3 C{};
    switch (opt.mode) {
        case CountertermMode::Full: {
            const Vec3 ct = counterterm(rc, eps, chi);
            for (int a = 0; a < 3; ++a) C[a] = -ct[a];
            break;
        }
        case CountertermMode::M1Only:
            if (rc.chi_id != chi.id()) throw std::invalid_argument("constants computed for another cutoff");
            for (int a = 0; a < 3; ++a) C[a] = -rc.m1[a] / eps;
            break;
        case CountertermMode::Off: break;
    }
    const int k_max = res.nx / 2 - 1;
    const int n_steps = static_cast<int>(std::lround(T / res.dt));
    std::optional<NoiseRealization> noise;
    if (!opt.zero_noise) noise = sample_white_noise(seed, {k_max, res.dt, n_steps});
    const Field3 u0 = opt.zero_initial ? Field3(res.nx)
                                       : initial_field(sample_initial_condition(seed, k_max), res.nx);
    Trajectory tr = solve_with_noise(eps, T, M, C, chi, res, noise ? &*noise : nullptr, u0,
                                     opt.snapshot_every);
    tr.seed = seed;
    return tr;
}

void write_trajectory_csv(const Trajectory& tr, std::ostream& os) {
    os << "t,x,u1,u2,u3\n";
    for (const auto& s : tr.snapshots) {
        const Field3 f = to_physical(s);
        for (int i = 0; i < tr.nx; ++i)
            fmt::print(os, "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", s.time,
                       static_cast<double>(i) / tr.nx, f.c[0][i], f.c[1][i], f.c[2][i]);
    }
}

void write_trajectory_binary(const Trajectory& tr, std::ostream& os) {
    auto put = [&](const void* p, std::size_t n) { os.write(static_cast<const char*>(p), n); };
    const char magic[8] = {'K', 'P', 'Z', 'T', 'R', 'A', 'J', '1'};
    put(magic, 8);
    const std::uint64_t nx = tr.nx, ns = tr.snapshots.size();
    put(&nx, 8);
    put(&ns, 8);
    put(&tr.eps, 8);
    put(&tr.dt, 8);
    for (const auto& s : tr.snapshots) {
        put(&s.time, 8);
        for (const auto& c : s.c) put(c.data(), c.size() * sizeof(cplx));
    }
}

Field3 coarse_frame_slice(const SpectralField& s, int nx_c, double eps_c) {
    SpectralField c;
    c.nx = nx_c;
    const double scale = static_cast<double>(nx_c) / s.nx / std::sqrt(eps_c);
    for (int a = 0; a < 3; ++a) {
        c.c[a].assign(nx_c / 2 + 1, cplx{});
        for (int k = 0; k < nx_c / 2 && k < static_cast<int>(s.c[a].size()); ++k)
            c.c[a][k] = s.c[a][k] * scale;
    }
    return to_physical(c);
}

double envelope_tail(const std::vector<double>& diff) {
    if (diff.size() < 2) return std::numeric_limits<double>::infinity();
    const double d1 = diff[diff.size() - 2], d2 = diff.back();
    if (!(d1 > 0.0)) return d2 == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    const double r = d2 / d1;
    if (!(r >= 0.0 && r < 1.0)) return std::numeric_limits<double>::infinity();
    return d2 * r / (1.0 - r);
}

ConvergenceReport convergence_study(const std::vector<double>& eps_list, std::uint64_t seed,
                                    const CouplingTensor& M, const Cutoff& chi, double T,
                                    const RenormConstants& rc,
                                    const std::vector<CountertermMode>& modes) {
    if (eps_list.size() < 2) throw std::invalid_argument("convergence study needs two eps values");
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1])) throw std::invalid_argument("eps list must decrease");
    const double eps_c = eps_list.front(), eps_f = eps_list.back();
    const double dt = eps_f * eps_f / 8.0;
    const int nx_c = default_resolution(eps_c).nx;
    // coarse frame: x_f = x / eps_c, t_f = t / eps_c^2, sampled every eps_c^2/8
    const int every = std::max(1, static_cast<int>(std::lround(eps_c * eps_c / 8.0 / dt)));
    ConvergenceReport rep;
    rep.T = T;
    rep.frame_dt = every * dt / (eps_c * eps_c);
    rep.frame_period = 1.0 / eps_c;
    const int n_steps = static_cast<int>(std::lround(T / dt));
    const int k_max_f = default_resolution(eps_f).nx / 2 - 1;
    const NoiseRealization noise = coupled_noise_family(seed, {eps_f}, {k_max_f, dt, n_steps})[0];
    const InitialModes u0m = sample_initial_condition(seed, k_max_f);
    for (CountertermMode mode : modes) {
        ConvergenceCurve cur;
        cur.mode = mode;
        cur.chi_id = chi.id();
        std::vector<SpaceTimeField> frames;
        for (double eps : eps_list) {
            Resolution res = default_resolution(eps);
            res.dt = dt;
            Vec3 C{};
            const Vec3 ct = counterterm(rc, eps, chi);
            for (int a = 0; a < 3; ++a)
                C[a] = mode == CountertermMode::Full     ? -ct[a]
                       : mode == CountertermMode::M1Only ? -rc.m1[a] / eps
                                                         : 0.0;
            const Trajectory tr = solve_with_noise(eps, T, M, C, chi, res, &noise,
                                                   initial_field(u0m, res.nx), every);
            cur.eps.push_back(eps);
            cur.blowup.push_back(tr.blowup);
            const SpectralField& last = tr.snapshots.back();
            Vec3 mean{};
            for (int a = 0; a < 3; ++a) mean[a] = last.c[a][0].real() / res.nx;
            cur.mean.push_back(mean);
            SpaceTimeField f(static_cast<int>(tr.snapshots.size()), nx_c);
            for (std::size_t i = 0; i < tr.snapshots.size(); ++i)
                f.set_slice(static_cast<int>(i), coarse_frame_slice(tr.snapshots[i], nx_c, eps_c));
            frames.push_back(std::move(f));
        }
        for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
            if (cur.blowup[i] || cur.blowup[i + 1] || frames[i].nt != frames[i + 1].nt) {
                cur.diff.push_back(std::numeric_limits<double>::infinity());
                continue;
            }
            cur.diff.push_back(vn_norm(frames[i] - frames[i + 1], rep.frame_dt, rep.frame_period).value);
        }
        cur.finest = frames.back();
        rep.curves.push_back(std::move(cur));
    }
    return rep;
}

}  // namespace kpz
