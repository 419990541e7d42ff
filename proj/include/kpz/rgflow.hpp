#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kpz/coupling.hpp"
#include "kpz/cutoff.hpp"
#include "kpz/field.hpp"
#include "kpz/noise.hpp"
#include "kpz/renorm.hpp"

namespace kpz {

/// Scale n of a tower with cutoff N and base m. Every frame shares one
/// physical grid (nt steps of dt on the unit torus with nx points); frame n
/// reads it with time L^{2n} t and space L^n x.
struct ScaleFrame {
    int n = 0;
    int N = 0;
    int m = 0;
    double L = 2.0;
    int nx = 0;
    int nt = 0;
    double dt = 0.0;

    double period() const;
    double frame_dt() const;
    /// End of the time window in frame units, L^{2(n-m)}.
    double tau() const;
    /// Time indicator: 1 for t <= tau - L^{-2}, 0 for t >= tau.
    double h(double t_frame) const;
    void validate() const;
    ScaleFrame at(int k) const;
    bool same_grid(const ScaleFrame& o) const;
};

/// Field tagged with the frame it lives in.
struct FrameField {
    ScaleFrame frame;
    SpaceTimeField v;
};

/// (s phi)(t,x) = L^{-1/2} phi(L^{-2} t, L^{-1} x): frame n-1 -> frame n.
FrameField scale_field(const FrameField& phi);
/// Inverse of scale_field: frame n -> frame n-1.
FrameField unscale_field(const FrameField& phi);

using Evaluator = std::function<SpaceTimeField(const SpaceTimeField&)>;

/// (S v)(phi) = L s^{-1} v(s phi) = L^{3/2} v(L^{-1/2} phi).
Evaluator scale_S(Evaluator v, double L);

/// phi -> phi^k componentwise; k = 0 gives the constant 1.
Evaluator monomial_evaluator(int k);

/// Per-slice (a, M b) with the 2/3 rule on factors and product.
SpaceTimeField dealiased_product(const CouplingTensor& M, const SpaceTimeField& a,
                                 const SpaceTimeField& b);

/// Causal space-time convolution in frame n with the kernel whose Fourier
/// multiplier is i p e^{-tau p^2} (chi(tau) - chi(L^{2j} tau)), p = 2 pi k / L^n.
/// Left-point rule over lags q >= 1; the field vanishes before t = 0.
class FrameConvolution {
public:
    FrameConvolution(const ScaleFrame& frame, const Cutoff& chi, int j);
    SpaceTimeField apply(const SpaceTimeField& src) const;
    /// Same kernel against the white-noise increments read in this frame.
    SpaceTimeField apply_noise(const NoiseRealization& noise) const;

private:
    SpaceTimeField convolve(const std::array<std::vector<cplx>, 3>& rows, double weight) const;

    ScaleFrame frame_;
    int nk_ = 0;
    int nfft_ = 0;
    std::vector<std::vector<cplx>> kernel_hat_;  // [k][frequency]
};

class PicardError : public std::runtime_error {
public:
    PicardError(const std::string& what, std::vector<double> trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const std::vector<double>& trace() const { return trace_; }

private:
    std::vector<double> trace_;
};

struct RGConfig {
    int N = 3;
    int m = 0;
    double L = 2.0;
    int nx = 32;
    int nt = 0;
    double dt = 0.0;
    double tol = 1e-8;
    int max_iter = 50;
    double gamma = 0.05;
    /// When false, w_{n-1}(A) = S w_n(A + Upsilon * xi): no implicit feedback.
    bool feedback = true;
};

struct PicardStats {
    int iterations = 0;
    double last_change = 0.0;
    std::vector<double> trace;
};

/// Perturbative split of w_n at phi = 0.
struct PerturbativeParts {
    int n = 0;
    SpaceTimeField theta;
    SpaceTimeField u1;
    SpaceTimeField u2;
    SpaceTimeField u3;
    SpaceTimeField w;
    SpaceTimeField r;
    PicardStats picard;
};

struct FlowRow {
    int n = 0;
    double u1 = 0.0;
    double u2 = 0.0;
    double u3 = 0.0;
    double r = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

struct StepCheck {
    int n = 0;
    std::vector<double> residuals;  // one per test field
    std::vector<int> iterations;
};

/// Effective potentials w_n, m <= n <= N, of the equation for the spatial
/// derivative. w_N(phi) = L^{-N/2} (phi, M phi) - L^{-3N/2} C and
/// w_{n-1}(A) = S w_n(A + Upsilon * (w_{n-1}(A) + xi_{n-1})), evaluated on
/// demand by nested Picard iteration.
class RGTower {
public:
    RGTower(const RGConfig& cfg, const Cutoff& chi, const CouplingTensor& M, const Vec3& C,
            const NoiseRealization* noise);
    /// Tower over an arbitrary finest-scale nonlinearity.
    RGTower(const RGConfig& cfg, const Cutoff& chi, const CouplingTensor& M, Evaluator w_N,
            const NoiseRealization* noise);

    const RGConfig& config() const { return cfg_; }
    ScaleFrame frame(int n) const;
    SpaceTimeField zero() const;

    SpaceTimeField w(int n, const SpaceTimeField& A, PicardStats* stats = nullptr) const;
    /// |w_{n}(A) - S w_{n+1}(A + Upsilon * (w_n(A) + xi_n))| in the V norm of frame n.
    double residual(int n, const SpaceTimeField& A, const SpaceTimeField& wA) const;

    /// Upsilon * xi_n in frame n (n < N).
    const SpaceTimeField& upsilon_xi(int n) const;
    /// theta_n = Y_n * xi_n with Y_n = Y_n^{(N)}.
    const SpaceTimeField& theta(int n) const;
    SpaceTimeField upsilon(int n, const SpaceTimeField& src) const;
    SpaceTimeField Y(int n, const SpaceTimeField& src) const;

    /// L^{-n/2}((phi+theta, M(phi+theta)) - L^{N-n} m1).
    SpaceTimeField u1(int n, const SpaceTimeField& phi, const Vec3& m1) const;
    /// 2 L^{-n/2} (phi+theta, M Y*u1(phi)).
    SpaceTimeField u2(int n, const SpaceTimeField& phi, const Vec3& m1) const;
    /// L^{-n/2}[(Y*u1, M Y*u1) + 2(phi+theta, M Y*u2)] - L^{-3n/2} c3.
    SpaceTimeField u3(int n, const SpaceTimeField& phi, const Vec3& m1, const Vec3& c3) const;
    /// D u2(0) psi.
    SpaceTimeField Du2_zero(int n, const SpaceTimeField& psi, const Vec3& m1) const;

    /// m1 and c3 = (m2 log L^N + m3) in solver normalization must match the C
    /// the tower was built with for the remainder to be fourth order.
    PerturbativeParts parts(int n, const Vec3& m1, const Vec3& c3) const;

    /// f_m(0) by the reconstruction iteration; the physical derivative of the
    /// solution is L^{m/2} f_m(0) on the window [0, L^{-2m}].
    SpaceTimeField reconstruct() const;
    /// sup norms of phi_n along the reconstruction, n = m..N.
    std::vector<double> reconstruction_amplitudes() const { return amplitudes_; }

    /// L^{-n/2}(psi, M psi) - L^{-3n/2} C, psi = A + theta_n + Y_n * wA; zero
    /// for the true w_n(A) up to the Picard tolerance.
    double one_shot_defect(int n, const SpaceTimeField& A, const SpaceTimeField& wA) const;

    /// Zero field plus smooth random fields with sup norm amp R_n, R_n = L^{2 gamma n}.
    std::vector<SpaceTimeField> test_fields(int n, int count, std::uint64_t seed,
                                            double amp = 0.5) const;
    StepCheck check_step(int n, const std::vector<SpaceTimeField>& tests) const;

private:
    SpaceTimeField w_impl(int n, const SpaceTimeField& A, int depth, PicardStats* stats) const;
    double norm(int n, const SpaceTimeField& v) const;

    RGConfig cfg_;
    CouplingTensor M_;
    Vec3 C_{};
    bool has_C_ = false;
    Evaluator base_;
    std::vector<FrameConvolution> ups_;   // index n - m, n < N
    std::vector<FrameConvolution> ycv_;   // index n - m
    std::vector<SpaceTimeField> ups_xi_;
    std::vector<SpaceTimeField> theta_;
    mutable std::vector<double> amplitudes_;
};

/// Flow report from n = N down to m.
std::vector<FlowRow> flow_report(const RGTower& tower, const Vec3& m1, const Vec3& c3);
void write_flow_csv(const std::vector<FlowRow>& rows, std::ostream& os);

/// Spatial derivative of a solver trajectory as a space-time field over its
/// first nt snapshots.
SpaceTimeField trajectory_gradient(const std::vector<SpectralField>& snaps, int nt);

}  // namespace kpz
