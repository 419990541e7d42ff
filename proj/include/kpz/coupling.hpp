#pragma once

#include <array>
#include <string>
#include <vector>

namespace kpz {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

/// Coupling tensor M^{(a)}_{bc}, symmetric in (b,c). Stored dense.
class CouplingTensor {
public:
    CouplingTensor();

    /// Throws std::invalid_argument on a non-finite entry or when some
    /// M^{(a)} is not symmetric within `tol` (no silent symmetrization).
    explicit CouplingTensor(const std::array<Mat3, 3>& m, double tol = 1e-12);

    static CouplingTensor zero();
    static CouplingTensor identity();   // M^{(a)} = I for every a
    static CouplingTensor all_ones();   // totally symmetric

    double operator()(int a, int b, int c) const { return m_[a][b][c]; }
    const Mat3& matrix(int a) const { return m_[a]; }
    const std::array<Mat3, 3>& matrices() const { return m_; }

    CouplingTensor scaled(double lambda) const;
    CouplingTensor operator+(const CouplingTensor& o) const;

    /// Parses "a b c; d e f; g h i" (row-major).
    static Mat3 parse_matrix(const std::string& text);

private:
    std::array<Mat3, 3> m_{};
};

struct ContractionSet {
    Mat3 frak_m{};
    Vec3 calM1{};
    Vec3 calM2{};
    Vec3 trace_vector{};
};

ContractionSet contract(const CouplingTensor& M);

bool is_totally_symmetric(const CouplingTensor& M, double tol = 1e-12);

/// (phi, M^{(a)} phi) for a single 3-vector sample.
Vec3 apply_nonlinearity(const CouplingTensor& M, const Vec3& phi);

/// (a, M^{(c)} b) for two 3-vector samples.
Vec3 apply_bilinear(const CouplingTensor& M, const Vec3& a, const Vec3& b);

/// Pointwise over component arrays: out[c][i] = (phi_i, M^{(c)} phi_i).
void apply_nonlinearity(const CouplingTensor& M,
                        const std::array<const double*, 3>& phi,
                        const std::array<double*, 3>& out, std::size_t n);

}  // namespace kpz
