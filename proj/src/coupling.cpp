#include "kpz/coupling.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kpz {

CouplingTensor::CouplingTensor() = default;

CouplingTensor::CouplingTensor(const std::array<Mat3, 3>& m, double tol) : m_(m) {
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) {
                if (!std::isfinite(m_[a][b][c]))
                    throw std::invalid_argument("coupling tensor has a non-finite entry");
                if (std::abs(m_[a][b][c] - m_[a][c][b]) > tol)
                    throw std::invalid_argument("coupling matrix M^(" + std::to_string(a + 1) +
                                                ") is not symmetric");
            }
}

CouplingTensor CouplingTensor::zero() { return CouplingTensor(); }

CouplingTensor CouplingTensor::identity() {
    std::array<Mat3, 3> m{};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) m[a][b][b] = 1.0;
    return CouplingTensor(m);
}

CouplingTensor CouplingTensor::all_ones() {
    std::array<Mat3, 3> m{};
    for (auto& mat : m)
        for (auto& row : mat) row.fill(1.0);
    return CouplingTensor(m);
}

CouplingTensor CouplingTensor::scaled(double lambda) const {
    std::array<Mat3, 3> m = m_;
    for (auto& mat : m)
        for (auto& row : mat)
            for (auto& v : row) v *= lambda;
    return CouplingTensor(m);
}

CouplingTensor CouplingTensor::operator+(const CouplingTensor& o) const {
    std::array<Mat3, 3> m = m_;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) m[a][b][c] += o.m_[a][b][c];
    return CouplingTensor(m);
}

Mat3 CouplingTensor::parse_matrix(const std::string& text) {
    Mat3 out{};
    std::stringstream rows(text);
    std::string row;
    int r = 0;
    while (std::getline(rows, row, ';')) {
        if (r >= 3) throw std::invalid_argument("matrix has more than 3 rows: " + text);
        std::stringstream cols(row);
        int c = 0;
        double v;
        while (cols >> v) {
            if (c >= 3) throw std::invalid_argument("matrix row has more than 3 entries: " + text);
            out[r][c++] = v;
        }
        if (c != 3) throw std::invalid_argument("matrix row needs 3 entries: " + text);
        ++r;
    }
    if (r != 3) throw std::invalid_argument("matrix needs 3 rows: " + text);
    return out;
}

ContractionSet contract(const CouplingTensor& M) {
    ContractionSet cs;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            cs.trace_vector[a] += M(a, b, b);
            double s = 0.0;
            for (int g = 0; g < 3; ++g)
                for (int d = 0; d < 3; ++d) s += M(a, g, d) * M(d, g, b);
            cs.frak_m[a][b] = s;
        }
        double m1 = 0.0, m2 = 0.0;
        for (int b1 = 0; b1 < 3; ++b1)
            for (int b2 = 0; b2 < 3; ++b2)
                for (int b3 = 0; b3 < 3; ++b3)
                    for (int b4 = 0; b4 < 3; ++b4) {
                        const double head = M(a, b1, b2) * M(b2, b3, b4);
                        m1 += head * M(b4, b1, b3);
                        m2 += head * M(b1, b3, b4);
                    }
        cs.calM1[a] = m1;
        cs.calM2[a] = m2;
    }
    return cs;
}

bool is_totally_symmetric(const CouplingTensor& M, double tol) {
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) {
                const double v = M(a, b, c);
                if (std::abs(v - M(b, a, c)) > tol || std::abs(v - M(c, b, a)) > tol ||
                    std::abs(v - M(a, c, b)) > tol || std::abs(v - M(b, c, a)) > tol ||
                    std::abs(v - M(c, a, b)) > tol)
                    return false;
            }
    return true;
}

Vec3 apply_bilinear(const CouplingTensor& M, const Vec3& a, const Vec3& b) {
    Vec3 out{};
    for (int c = 0; c < 3; ++c) {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) s += a[i] * M(c, i, j) * b[j];
        out[c] = s;
    }
    return out;
}

Vec3 apply_nonlinearity(const CouplingTensor& M, const Vec3& phi) {
    return apply_bilinear(M, phi, phi);
}

void apply_nonlinearity(const CouplingTensor& M, const std::array<const double*, 3>& phi,
                        const std::array<double*, 3>& out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 v = apply_nonlinearity(M, {phi[0][i], phi[1][i], phi[2][i]});
        out[0][i] = v[0];
        out[1][i] = v[1];
        out[2][i] = v[2];
    }
}

}  // namespace kpz
