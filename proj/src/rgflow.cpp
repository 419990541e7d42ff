#include "kpz/rgflow.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kpz/norms.hpp"
#include "kpz/solver.hpp"

namespace kpz {

namespace {

bool is_integer_power(double L) { return L >= 2.0 && std::abs(L - std::round(L)) < 1e-12; }

SpaceTimeField add_constant(SpaceTimeField f, const Vec3& c) {
    for (int a = 0; a < 3; ++a)
        for (double& v : f.c[a]) v += c[a];
    return f;
}

SpaceTimeField symmetric_product(const CouplingTensor& M, const SpaceTimeField& a,
                                 const SpaceTimeField& b) {
    return dealiased_product(M, a, b) + dealiased_product(M, b, a);
}

}  // namespace

double ScaleFrame::period() const { return std::pow(L, n); }
double ScaleFrame::frame_dt() const { return std::pow(L, 2 * n) * dt; }
double ScaleFrame::tau() const { return std::pow(L, 2 * (n - m)); }

double ScaleFrame::h(double t_frame) const {
    static const Cutoff prof = Cutoff::smootherstep();
    const double w = 1.0 / (L * L);
    return prof(1.0 + (t_frame - (tau() - w)) / w);
}

void ScaleFrame::validate() const {
    if (!is_integer_power(L)) throw std::invalid_argument("L must be an integer >= 2");
    if (!(m <= n && n <= N) || m < 0) throw std::invalid_argument("frame needs 0 <= m <= n <= N");
    if (nx < 4 || nx % 2) throw std::invalid_argument("nx must be even and >= 4");
    if (nt < 1 || !(dt > 0.0)) throw std::invalid_argument("empty time grid");
    if (std::pow(L, 2 * N) * dt > 0.125 * (1.0 + 1e-12))
        throw std::invalid_argument("time step must satisfy L^{2N} dt <= 1/8");
    if (std::pow(L, N) / nx > 1.0 + 1e-12)
        throw std::invalid_argument("grid must resolve unit length at the finest frame");
}

ScaleFrame ScaleFrame::at(int k) const {
    ScaleFrame f = *this;
    f.n = k;
    return f;
}

bool ScaleFrame::same_grid(const ScaleFrame& o) const {
    return N == o.N && m == o.m && L == o.L && nx == o.nx && nt == o.nt && dt == o.dt;
}

FrameField scale_field(const FrameField& phi) {
    if (phi.frame.n + 1 > phi.frame.N) throw std::invalid_argument("no finer frame to scale into");
    if (phi.v.nt != phi.frame.nt || phi.v.nx != phi.frame.nx)
        throw std::invalid_argument("field does not match its frame grid");
    return {phi.frame.at(phi.frame.n + 1), (1.0 / std::sqrt(phi.frame.L)) * phi.v};
}

FrameField unscale_field(const FrameField& phi) {
    if (phi.frame.n - 1 < phi.frame.m) throw std::invalid_argument("no coarser frame to scale into");
    if (phi.v.nt != phi.frame.nt || phi.v.nx != phi.frame.nx)
        throw std::invalid_argument("field does not match its frame grid");
    return {phi.frame.at(phi.frame.n - 1), std::sqrt(phi.frame.L) * phi.v};
}

Evaluator scale_S(Evaluator v, double L) {
    const double outer = L * std::sqrt(L), inner = 1.0 / std::sqrt(L);
    return [v = std::move(v), outer, inner](const SpaceTimeField& phi) {
        return outer * v(inner * phi);
    };
}

Evaluator monomial_evaluator(int k) {
    if (k < 0) throw std::invalid_argument("monomial degree must be non-negative");
    return [k](const SpaceTimeField& phi) {
        SpaceTimeField out = phi;
        for (auto& comp : out.c)
            for (double& x : comp) x = k == 0 ? 1.0 : std::pow(x, k);
        return out;
    };
}

SpaceTimeField dealiased_product(const CouplingTensor& M, const SpaceTimeField& a,
                                 const SpaceTimeField& b) {
    if (a.nt != b.nt || a.nx != b.nx) throw std::invalid_argument("product of mismatched fields");
    SpaceTimeField out(a.nt, a.nx);
    for (int it = 0; it < a.nt; ++it) out.set_slice(it, dealiased_product(M, a.slice(it), b.slice(it)));
    return out;
}

FrameConvolution::FrameConvolution(const ScaleFrame& frame, const Cutoff& chi, int j)
    : frame_(frame), nk_(frame.nx / 2 + 1) {
    nfft_ = 1;
    while (nfft_ < 2 * frame.nt) nfft_ *= 2;
    const double dtf = frame.frame_dt(), P = frame.period(), lam = std::pow(frame.L, 2 * j);
    kernel_hat_.assign(nk_, std::vector<cplx>(nfft_, cplx{}));
    for (int k = 1; k < nk_; ++k) {
        if (2 * k == frame.nx) continue;
        const double p = 2.0 * std::numbers::pi * k / P;
        auto& g = kernel_hat_[k];
        for (int q = 1; q < frame.nt; ++q) {
            const double tau = q * dtf;
            const double cut = chi(tau) - chi(lam * tau);
            if (cut != 0.0) g[q] = cplx(0.0, p) * std::exp(-tau * p * p) * cut;
        }
        cfft(g, false);
    }
}

SpaceTimeField FrameConvolution::convolve(const std::array<std::vector<cplx>, 3>& rows,
                                          double weight) const {
    const int nt = frame_.nt, nx = frame_.nx;
    SpaceTimeField out(nt, nx);
    std::vector<cplx> seq(nfft_), spec(nk_);
    std::vector<double> phys;
    for (int a = 0; a < 3; ++a) {
        std::vector<cplx> res(static_cast<std::size_t>(nt) * nk_, cplx{});
        for (int k = 1; k < nk_; ++k) {
            if (2 * k == nx) continue;
            std::fill(seq.begin(), seq.end(), cplx{});
            bool any = false;
            for (int it = 0; it < nt; ++it) {
                seq[it] = rows[a][static_cast<std::size_t>(it) * nk_ + k];
                any = any || seq[it] != cplx{};
            }
            if (!any) continue;
            cfft(seq, false);
            for (int f = 0; f < nfft_; ++f) seq[f] *= kernel_hat_[k][f];
            cfft(seq, true);
            const double s = weight / nfft_;
            for (int it = 0; it < nt; ++it) res[static_cast<std::size_t>(it) * nk_ + k] = seq[it] * s;
        }
        for (int it = 0; it < nt; ++it) {
            std::copy_n(res.begin() + static_cast<std::ptrdiff_t>(it) * nk_, nk_, spec.begin());
            irfft(spec, phys, nx);
            std::copy(phys.begin(), phys.end(), out.c[a].begin() + static_cast<std::ptrdiff_t>(it) * nx);
        }
    }
    return out;
}

SpaceTimeField FrameConvolution::apply(const SpaceTimeField& src) const {
    if (src.nt != frame_.nt || src.nx != frame_.nx) throw std::invalid_argument("convolution grid mismatch");
    std::array<std::vector<cplx>, 3> rows;
    std::vector<double> row(frame_.nx);
    std::vector<cplx> spec;
    for (int a = 0; a < 3; ++a) {
        rows[a].resize(static_cast<std::size_t>(frame_.nt) * nk_);
        for (int it = 0; it < frame_.nt; ++it) {
            std::copy_n(src.c[a].begin() + static_cast<std::ptrdiff_t>(it) * frame_.nx, frame_.nx, row.begin());
            rfft(row, spec);
            std::copy(spec.begin(), spec.end(), rows[a].begin() + static_cast<std::ptrdiff_t>(it) * nk_);
        }
    }
    return convolve(rows, frame_.frame_dt());
}

SpaceTimeField FrameConvolution::apply_noise(const NoiseRealization& noise) const {
    if (std::abs(noise.dt - frame_.dt) > 1e-12 * frame_.dt)
        throw std::invalid_argument("noise time step differs from the tower grid");
    if (noise.n_steps < frame_.nt - 1) throw std::invalid_argument("noise shorter than the time window");
    const double scale = std::pow(frame_.L, 0.5 * frame_.n) * frame_.nx;
    const int km = std::min(noise.k_max, frame_.nx / 2 - 1);
    std::array<std::vector<cplx>, 3> rows;
    for (int a = 0; a < 3; ++a) {
        rows[a].assign(static_cast<std::size_t>(frame_.nt) * nk_, cplx{});
        for (int it = 0; it + 1 < frame_.nt; ++it)
            for (int k = 1; k <= km; ++k)
                rows[a][static_cast<std::size_t>(it) * nk_ + k] = noise.at(it, a, k) * scale;
    }
    return convolve(rows, 1.0);
}

RGTower::RGTower(const RGConfig& cfg, const Cutoff& chi, const CouplingTensor& M, const Vec3& C,
                 const NoiseRealization* noise)
    : RGTower(cfg, chi, M, Evaluator{}, noise) {
    C_ = C;
    has_C_ = true;
    const double a = std::pow(cfg.L, -0.5 * cfg.N), b = std::pow(cfg.L, -1.5 * cfg.N);
    const Vec3 shift{-b * C[0], -b * C[1], -b * C[2]};
    base_ = [M, a, shift](const SpaceTimeField& phi) {
        return add_constant(a * dealiased_product(M, phi, phi), shift);
    };
}

RGTower::RGTower(const RGConfig& cfg, const Cutoff& chi, const CouplingTensor& M, Evaluator w_N,
                 const NoiseRealization* noise)
    : cfg_(cfg), M_(M), base_(std::move(w_N)) {
    frame(cfg.N).validate();
    if (cfg.tol <= 0.0 || cfg.max_iter < 1) throw std::invalid_argument("bad Picard settings");
    for (int n = cfg.m; n <= cfg.N; ++n) {
        const ScaleFrame f = frame(n);
        ycv_.emplace_back(f, chi, cfg.N - n);
        theta_.push_back(noise ? ycv_.back().apply_noise(*noise) : zero());
        if (n < cfg.N) {
            ups_.emplace_back(f, chi, 1);
            ups_xi_.push_back(noise ? ups_.back().apply_noise(*noise) : zero());
        }
    }
}

ScaleFrame RGTower::frame(int n) const {
    ScaleFrame f{n, cfg_.N, cfg_.m, cfg_.L, cfg_.nx, cfg_.nt, cfg_.dt};
    if (n < cfg_.m || n > cfg_.N) throw std::out_of_range("scale outside the tower");
    return f;
}

SpaceTimeField RGTower::zero() const { return SpaceTimeField(cfg_.nt, cfg_.nx); }

double RGTower::norm(int n, const SpaceTimeField& v) const {
    const ScaleFrame f = frame(n);
    return vn_norm(v, f.frame_dt(), f.period()).value;
}

const SpaceTimeField& RGTower::upsilon_xi(int n) const {
    if (n >= cfg_.N) throw std::out_of_range("no fluctuation field at the finest scale");
    return ups_xi_.at(n - cfg_.m);
}

const SpaceTimeField& RGTower::theta(int n) const { return theta_.at(n - cfg_.m); }

SpaceTimeField RGTower::upsilon(int n, const SpaceTimeField& src) const {
    if (n >= cfg_.N) throw std::out_of_range("no fluctuation kernel at the finest scale");
    return ups_.at(n - cfg_.m).apply(src);
}

SpaceTimeField RGTower::Y(int n, const SpaceTimeField& src) const { return ycv_.at(n - cfg_.m).apply(src); }

SpaceTimeField RGTower::w_impl(int n, const SpaceTimeField& A, int depth, PicardStats* stats) const {
    if (n == cfg_.N) return base_(A);
    const double L = cfg_.L, outer = L * std::sqrt(L), inner = 1.0 / std::sqrt(L);
    const double tol = std::max(cfg_.tol * std::pow(1e-2, depth), 1e-13);
    const SpaceTimeField base_arg = A + upsilon_xi(n);
    auto F = [&](const SpaceTimeField* X) {
        SpaceTimeField B = X ? base_arg + upsilon(n, *X) : base_arg;
        B *= inner;
        return outer * w_impl(n + 1, B, depth + 1, nullptr);
    };
    SpaceTimeField X = F(nullptr);
    if (!cfg_.feedback) {
        if (stats) *stats = PicardStats{};
        return X;
    }
    std::vector<double> trace;
    for (int it = 1; it <= cfg_.max_iter; ++it) {
        SpaceTimeField Xn = F(&X);
        const double d = norm(n, Xn - X);
        trace.push_back(d);
        X = std::move(Xn);
        if (!std::isfinite(d)) break;
        if (d < tol) {
            if (stats) *stats = PicardStats{it, d, std::move(trace)};
            return X;
        }
    }
    throw PicardError(fmt::format("Picard iteration at scale {} did not reach {:g} within {} iterations",
                                  n, tol, cfg_.max_iter),
                      std::move(trace));
}

SpaceTimeField RGTower::w(int n, const SpaceTimeField& A, PicardStats* stats) const {
    frame(n);
    if (A.nt != cfg_.nt || A.nx != cfg_.nx) throw std::invalid_argument("test field off the tower grid");
    return w_impl(n, A, 0, stats);
}

double RGTower::residual(int n, const SpaceTimeField& A, const SpaceTimeField& wA) const {
    if (n == cfg_.N) return norm(n, wA - base_(A));
    const double L = cfg_.L;
    SpaceTimeField B = A + upsilon_xi(n) + upsilon(n, wA);
    B *= 1.0 / std::sqrt(L);
    return norm(n, wA - (L * std::sqrt(L)) * w_impl(n + 1, B, 1, nullptr));
}

SpaceTimeField RGTower::u1(int n, const SpaceTimeField& phi, const Vec3& m1) const {
    const SpaceTimeField P = phi + theta(n);
    const double wick = std::pow(cfg_.L, cfg_.N - n);
    return std::pow(cfg_.L, -0.5 * n) *
           add_constant(dealiased_product(M_, P, P), Vec3{-wick * m1[0], -wick * m1[1], -wick * m1[2]});
}

SpaceTimeField RGTower::u2(int n, const SpaceTimeField& phi, const Vec3& m1) const {
    const SpaceTimeField P = phi + theta(n);
    return std::pow(cfg_.L, -0.5 * n) * symmetric_product(M_, P, Y(n, u1(n, phi, m1)));
}

SpaceTimeField RGTower::u3(int n, const SpaceTimeField& phi, const Vec3& m1, const Vec3& c3) const {
    const SpaceTimeField P = phi + theta(n);
    const SpaceTimeField Yu1 = Y(n, u1(n, phi, m1));
    const SpaceTimeField Yu2 = Y(n, u2(n, phi, m1));
    const double a = std::pow(cfg_.L, -0.5 * n), b = std::pow(cfg_.L, -1.5 * n);
    return add_constant(a * (dealiased_product(M_, Yu1, Yu1) + symmetric_product(M_, P, Yu2)),
                        Vec3{-b * c3[0], -b * c3[1], -b * c3[2]});
}

SpaceTimeField RGTower::Du2_zero(int n, const SpaceTimeField& psi, const Vec3& m1) const {
    const double a = std::pow(cfg_.L, -0.5 * n);
    const SpaceTimeField& th = theta(n);
    const SpaceTimeField Du1 = a * symmetric_product(M_, th, psi);
    return a * (symmetric_product(M_, psi, Y(n, u1(n, zero(), m1))) + symmetric_product(M_, th, Y(n, Du1)));
}

PerturbativeParts RGTower::parts(int n, const Vec3& m1, const Vec3& c3) const {
    PerturbativeParts p;
    p.n = n;
    const SpaceTimeField z = zero();
    p.theta = theta(n);
    p.u1 = u1(n, z, m1);
    p.u2 = u2(n, z, m1);
    p.u3 = u3(n, z, m1, c3);
    p.w = w(n, z, &p.picard);
    p.r = p.w - p.u1 - p.u2 - p.u3;
    return p;
}

SpaceTimeField RGTower::reconstruct() const {
    SpaceTimeField A = zero();
    amplitudes_.assign(1, 0.0);
    const double inner = 1.0 / std::sqrt(cfg_.L);
    for (int n = cfg_.m; n < cfg_.N; ++n) {
        const SpaceTimeField W = w(n, A);
        A = inner * (A + upsilon_xi(n) + upsilon(n, W));
        amplitudes_.push_back(A.sup());
    }
    return std::pow(cfg_.L, 0.5 * (cfg_.N - cfg_.m)) * A;
}

double RGTower::one_shot_defect(int n, const SpaceTimeField& A, const SpaceTimeField& wA) const {
    if (!has_C_) throw std::logic_error("one-shot form needs the standard finest-scale nonlinearity");
    const SpaceTimeField psi = A + theta(n) + Y(n, wA);
    const double a = std::pow(cfg_.L, -0.5 * n), b = std::pow(cfg_.L, -1.5 * n);
    const SpaceTimeField v =
        add_constant(a * dealiased_product(M_, psi, psi), Vec3{-b * C_[0], -b * C_[1], -b * C_[2]});
    return norm(n, wA - v);
}

std::vector<SpaceTimeField> RGTower::test_fields(int n, int count, std::uint64_t seed, double amp) const {
    const ScaleFrame f = frame(n);
    const double R = std::pow(cfg_.L, 2.0 * cfg_.gamma * n);
    std::vector<SpaceTimeField> out{zero()};
    const double T = f.nt * f.frame_dt();
    for (int i = 1; i < count; ++i) {
        SpaceTimeField g = zero();
        for (int a = 0; a < 3; ++a)
            for (int k = 1; k <= 3; ++k)
                for (int l = 0; l <= 2; ++l) {
                    const auto [c1, c2] = gaussian_pair(seed, kStreamAux, static_cast<std::uint64_t>(i),
                                                        static_cast<std::uint64_t>(a * 16 + k * 4 + l), n);
                    for (int it = 0; it < f.nt; ++it) {
                        const double ct = std::cos(std::numbers::pi * l * it * f.frame_dt() / T);
                        for (int ix = 0; ix < f.nx; ++ix) {
                            const double ph = 2.0 * std::numbers::pi * k * ix / f.nx;
                            g.at(a, it, ix) += ct * (c1 * std::cos(ph) + c2 * std::sin(ph));
                        }
                    }
                }
        const double s = g.sup();
        if (s > 0.0) g *= amp * R / s;
        out.push_back(std::move(g));
    }
    return out;
}

StepCheck RGTower::check_step(int n, const std::vector<SpaceTimeField>& tests) const {
    StepCheck c;
    c.n = n;
    for (const auto& A : tests) {
        PicardStats st;
        const SpaceTimeField wA = w(n, A, &st);
        c.residuals.push_back(residual(n, A, wA));
        c.iterations.push_back(st.iterations);
    }
    return c;
}

std::vector<FlowRow> flow_report(const RGTower& tower, const Vec3& m1, const Vec3& c3) {
    const RGConfig& cfg = tower.config();
    std::vector<FlowRow> rows;
    for (int n = cfg.N; n >= cfg.m; --n) {
        const PerturbativeParts p = tower.parts(n, m1, c3);
        const ScaleFrame f = tower.frame(n);
        auto nrm = [&](const SpaceTimeField& v) { return vn_norm(v, f.frame_dt(), f.period()).value; };
        FlowRow r;
        r.n = n;
        r.u1 = nrm(p.u1);
        r.u2 = nrm(p.u2);
        r.u3 = nrm(p.u3);
        r.r = nrm(p.r);
        r.iterations = p.picard.iterations;
        r.residual = tower.residual(n, tower.zero(), p.w);
        rows.push_back(r);
    }
    return rows;
}

void write_flow_csv(const std::vector<FlowRow>& rows, std::ostream& os) {
    os << "n,u1_norm,u2_norm,u3_norm,r_norm,picard_iterations,residual\n";
    for (const auto& r : rows)
        fmt::print(os, "{},{:.17g},{:.17g},{:.17g},{:.17g},{},{:.17g}\n", r.n, r.u1, r.u2, r.u3, r.r,
                   r.iterations, r.residual);
}

SpaceTimeField trajectory_gradient(const std::vector<SpectralField>& snaps, int nt) {
    if (static_cast<int>(snaps.size()) < nt) throw std::invalid_argument("trajectory shorter than window");
    const int nx = snaps.front().nx;
    SpaceTimeField out(nt, nx);
    for (int it = 0; it < nt; ++it) {
        SpectralField d = snaps[it];
        for (auto& c : d.c)
            for (int k = 0; k < static_cast<int>(c.size()); ++k)
                c[k] *= (2 * k == nx) ? cplx(0.0) : cplx(0.0, 2.0 * std::numbers::pi * k);
        out.set_slice(it, to_physical(d));
    }
    return out;
}

}  // namespace kpz
