#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>

#include "clifford.hpp"

namespace dshell {

// Gamma given directly as the matrix in the delta term; a± = Gamma/2 ∓ i alpha·nu.
struct GeneralCoupling {
    Mat4 gamma = Mat4::Zero();
};

// Stores the halved values: Gamma = diag(2 gamma I2, 2 epsilon I2), so the
// diagonal blocks of a± are gamma and epsilon themselves.
struct DiagonalPair {
    double gamma = 0.0;
    double epsilon = 0.0;
};

// Gamma = eta I4 + tau alpha_0. The blocks of a± are (eta ± tau)/2, which puts
// the degenerate locus at eta² − tau² = 4.
struct ElectrostaticLorentz {
    double eta = 0.0;
    double tau = 0.0;
};

class InteractionMatrix {
public:
    using Variant = std::variant<GeneralCoupling, DiagonalPair, ElectrostaticLorentz>;

    InteractionMatrix() : v_(DiagonalPair{}) {}
    InteractionMatrix(GeneralCoupling g) : v_(std::move(g)) { check(); }
    InteractionMatrix(DiagonalPair d) : v_(d) { check(); }
    InteractionMatrix(ElectrostaticLorentz e) : v_(e) { check(); }

    const Variant& variant() const { return v_; }

    // The full Gamma as it appears in the delta term.
    Mat4 gamma_matrix() const {
        return std::visit(
            [](const auto& x) -> Mat4 {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, GeneralCoupling>) {
                    return x.gamma;
                } else if constexpr (std::is_same_v<T, DiagonalPair>) {
                    return block_diag(2.0 * x.gamma * Mat2::Identity(), 2.0 * x.epsilon * Mat2::Identity());
                } else {
                    return x.eta * Mat4::Identity() + x.tau * dirac_alpha(0);
                }
            },
            v_);
    }

    // Gamma/2, the part entering a±.
    Mat4 half() const { return 0.5 * gamma_matrix(); }

    bool hermitian(double tol = 1e-10) const { return is_hermitian(gamma_matrix(), tol); }

    std::string form_name() const {
        switch (v_.index()) {
        case 0: return "general";
        case 1: return "diagonal_pair";
        default: return "electrostatic_lorentz";
        }
    }

    // Rotation-invariant forms: |det L| depends only on |xi|, mu.
    bool rotation_invariant() const { return v_.index() != 0; }

private:
    void check() const {
        if (!all_finite(gamma_matrix())) fail(ErrorKind::Domain, "interaction matrix has non-finite entries");
    }
    Variant v_;
};

struct Frame {
    Vec3 t1 = Vec3::UnitX();
    Vec3 t2 = Vec3::UnitY();
    Vec3 nu = Vec3::UnitZ();

    static Frame standard() { return {}; }

    bool is_standard() const { return t1 == Vec3::UnitX() && t2 == Vec3::UnitY() && nu == Vec3::UnitZ(); }

    double orthonormality_error() const {
        double e = 0.0;
        e = std::max(e, std::abs(t1.norm() - 1.0));
        e = std::max(e, std::abs(t2.norm() - 1.0));
        e = std::max(e, std::abs(nu.norm() - 1.0));
        e = std::max(e, std::abs(t1.dot(t2)));
        e = std::max(e, std::abs(t1.dot(nu)));
        e = std::max(e, std::abs(t2.dot(nu)));
        e = std::max(e, (t1.cross(t2) - nu).norm());
        return e;
    }

    void validate(double tol = 1e-10) const {
        if (!all_finite(t1) || !all_finite(t2) || !all_finite(nu) || orthonormality_error() > tol)
            fail(ErrorKind::Domain, "frame is not orthonormal and right-handed");
    }

    // Frame adapted generators beta_1 = alpha·t1, beta_2 = alpha·t2, beta_3 = alpha·nu.
    std::array<Mat4, 3> generators() const { return {alpha_dot(t1), alpha_dot(t2), alpha_dot(nu)}; }

    // Completes a unit normal to a right-handed frame.
    static Frame from_normal(const Vec3& normal) {
        Vec3 nu = normalized(normal);
        Vec3 e = std::abs(nu.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
        Vec3 t1 = normalized(e.cross(nu));
        Vec3 t2 = nu.cross(t1);
        return {t1, t2, nu};
    }

    // Reversing nu while keeping right-handedness.
    Frame flipped() const { return {t2, t1, -nu}; }
};

struct CotangentPoint {
    double xi1 = 0.0;
    double xi2 = 0.0;
    double mu = 0.0;

    double rho() const { return std::sqrt(xi1 * xi1 + xi2 * xi2 + mu * mu); }
    double xi_norm() const { return std::hypot(xi1, xi2); }
};

struct TransmissionPair {
    Mat4 a_plus;
    Mat4 a_minus;
};

// a± = Gamma/2 ∓ i alpha·nu
inline TransmissionPair transmission_pair(const InteractionMatrix& gamma, const Vec3& nu) {
    if (!all_finite(nu) || std::abs(nu.norm() - 1.0) > 1e-10) fail(ErrorKind::Domain, "normal is not a unit vector");
    Mat4 h = gamma.half();
    Mat4 an = alpha_dot(nu);
    return {h - I * an, h + I * an};
}

} // namespace dshell
