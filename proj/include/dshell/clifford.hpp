#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "error.hpp"

namespace dshell {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Vec3 = Eigen::Vector3d;
using CVec2 = Eigen::Vector2cd;
using CVec4 = Eigen::Vector4cd;

inline constexpr cplx I{0.0, 1.0};

inline bool finite(double x) { return std::isfinite(x); }
inline bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (!finite(m(i, j))) return false;
    return true;
}

template <class Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double tol) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline Mat2 pauli(int j) {
    Mat2 s;
    switch (j) {
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -I, I, 0; break;
    case 3: s << 1, 0, 0, -1; break;
    default: fail(ErrorKind::Domain, "pauli index out of range: " + std::to_string(j));
    }
    return s;
}

inline Mat4 block_diag(const Mat2& a, const Mat2& b) {
    Mat4 m = Mat4::Zero();
    m.topLeftCorner<2, 2>() = a;
    m.bottomRightCorner<2, 2>() = b;
    return m;
}

inline Mat4 block_offdiag(const Mat2& upper, const Mat2& lower) {
    Mat4 m = Mat4::Zero();
    m.topRightCorner<2, 2>() = upper;
    m.bottomLeftCorner<2, 2>() = lower;
    return m;
}

// alpha_0 = diag(I2, -I2), alpha_j = offdiag(sigma_j, sigma_j).
inline Mat4 dirac_alpha(int j) {
    if (j == 0) return block_diag(Mat2::Identity(), -Mat2::Identity());
    if (j < 0 || j > 3) fail(ErrorKind::Domain, "dirac_alpha index out of range: " + std::to_string(j));
    return block_offdiag(pauli(j), pauli(j));
}

// A set of four generators. The default is the standard representation; the
// verify command accepts an arbitrary set so that a corrupted one can be fed in.
struct GeneratorSet {
    std::array<Mat4, 4> alpha;
    std::array<Mat2, 3> sigma;

    static GeneratorSet standard() {
        GeneratorSet g;
        for (int j = 0; j < 4; ++j) g.alpha[j] = dirac_alpha(j);
        for (int j = 0; j < 3; ++j) g.sigma[j] = pauli(j + 1);
        return g;
    }
};

inline Mat4 alpha_dot(const Vec3& v) {
    static const GeneratorSet g = GeneratorSet::standard();
    return v.x() * g.alpha[1] + v.y() * g.alpha[2] + v.z() * g.alpha[3];
}

inline Vec3 normalized(const Vec3& v) {
    double n = v.norm();
    if (!(n > 0) || !std::isfinite(n)) fail(ErrorKind::Domain, "cannot normalize a zero or non-finite vector");
    return v / n;
}

} // namespace dshell
