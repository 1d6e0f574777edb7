#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "interaction.hpp"
#include "linalg.hpp"
#include "surfaces.hpp"

namespace dshell {

enum class Sign { Plus, Minus };

inline double sgn(Sign s) { return s == Sign::Plus ? 1.0 : -1.0; }

inline void require_nondegenerate(double rho) {
    if (!(rho > 0) || !std::isfinite(rho)) fail(ErrorKind::Domain, "degenerate symbol: rho = 0");
}

// [[±i rho, conj(s)], [s, ∓i rho]] with s = xi1 + i xi2.
inline Mat2 lambda_pm(double xi1, double xi2, double mu, Sign sign) {
    double rho = std::sqrt(xi1 * xi1 + xi2 * xi2 + mu * mu);
    require_nondegenerate(rho);
    cplx s{xi1, xi2};
    double e = sgn(sign);
    Mat2 l;
    l << e * I * rho, std::conj(s), s, -e * I * rho;
    return l;
}

// h-vectors in the order (h1+, h2+, h1-, h2-). Each h± solves
// (alpha'·xi ± i rho alpha_3 − i mu) h± = 0 and has norm² 2 rho².
struct HBasis {
    CVec4 h1p, h2p, h1m, h2m;
};

inline HBasis h_basis(double xi1, double xi2, double mu) {
    Mat2 lp = lambda_pm(xi1, xi2, mu, Sign::Plus);
    Mat2 lm = lambda_pm(xi1, xi2, mu, Sign::Minus);
    HBasis h;
    auto stack = [](const CVec2& top, const CVec2& bottom) {
        CVec4 v;
        v << top, bottom;
        return v;
    };
    const CVec2 z = CVec2::Zero();
    if (mu == 0.0) {
        h.h1p = stack(lp.col(0), z);
        h.h2p = stack(z, lp.col(0));
        h.h1m = stack(lm.col(0), z);
        h.h2m = stack(z, lm.col(0));
    } else {
        const CVec2 e1 = CVec2::UnitX(), e2 = CVec2::UnitY();
        h.h1p = stack(I * mu * e1, lp.col(0));
        h.h2p = stack(lp.col(1), I * mu * e2);
        h.h1m = stack(I * mu * e1, lm.col(0));
        h.h2m = stack(lm.col(1), I * mu * e2);
    }
    return h;
}

// Frame version: the same kernels built from beta_j = alpha·t_j. For the standard
// frame this is h_basis verbatim.
inline HBasis h_basis(const Frame& frame, double xi1, double xi2, double mu) {
    if (frame.is_standard()) return h_basis(xi1, xi2, mu);
    double rho = std::sqrt(xi1 * xi1 + xi2 * xi2 + mu * mu);
    require_nondegenerate(rho);
    auto b = frame.generators();
    double norm = std::sqrt(2.0) * rho;
    HBasis h;
    for (Sign s : {Sign::Plus, Sign::Minus}) {
        Mat4 m = xi1 * b[0] + xi2 * b[1] + sgn(s) * I * rho * b[2] + I * mu * Mat4::Identity();
        Span2 sp = pivoted_span2(m);
        (s == Sign::Plus ? h.h1p : h.h1m) = norm * sp.w1;
        (s == Sign::Plus ? h.h2p : h.h2m) = norm * sp.w2;
    }
    return h;
}

// Columns (a+ h1-, a+ h2-, a- h1+, a- h2+).
inline Mat4 ls_matrix(const InteractionMatrix& gamma, const Frame& frame, double xi1, double xi2, double mu) {
    frame.validate();
    HBasis h = h_basis(frame, xi1, xi2, mu);
    TransmissionPair a = transmission_pair(gamma, frame.nu);
    Mat4 l;
    l.col(0) = a.a_plus * h.h1m;
    l.col(1) = a.a_plus * h.h2m;
    l.col(2) = a.a_minus * h.h1p;
    l.col(3) = a.a_minus * h.h2p;
    return l;
}

inline double ls_abs_det(const InteractionMatrix& gamma, const Frame& frame, double xi1, double xi2, double mu) {
    return std::abs(ls_matrix(gamma, frame, xi1, xi2, mu).determinant());
}

struct LSSample {
    std::size_t id = 0;      // surface sample id (0 for a single point)
    Vec3 point = Vec3::Zero();
    double xi1 = 0.0, xi2 = 0.0, mu = 0.0; // cotangent point attaining the sample's minimum
    double abs_det = 0.0;
};

struct LSReport {
    double min_abs_det = std::numeric_limits<double>::infinity();
    LSSample argmin;
    std::vector<LSSample> samples;
    bool pass = false;
    double threshold = 1e-8;
};

inline constexpr double default_ls_threshold = 1e-8;

// Unit circle in the xi plane, mu = 0.
inline std::vector<CotangentPoint> circle_grid(std::size_t n, double phase = 0.0) {
    std::vector<CotangentPoint> out;
    for (std::size_t k = 0; k < n; ++k) {
        double t = phase + 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        out.push_back({std::cos(t), std::sin(t), 0.0});
    }
    return out;
}

// Sphere rho = 1: the exact equator ring, a Fibonacci upper hemisphere and its
// mirror image with mu < 0 (evaluated, not inferred).
inline std::vector<CotangentPoint> sphere_grid(std::size_t n, double phase = 0.0) {
    std::vector<CotangentPoint> out = circle_grid(n, phase);
    std::vector<CotangentPoint> upper;
    for (std::size_t i = 0; i < n; ++i) {
        double mu = 1.0 - (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        double r = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        double a = phase + golden_angle * static_cast<double>(i);
        upper.push_back({r * std::cos(a), r * std::sin(a), mu});
    }
    for (const auto& p : upper) out.push_back(p);
    for (const auto& p : upper) out.push_back({p.xi1, p.xi2, -p.mu});
    return out;
}

namespace detail {

// Minimum of |det L| over a cotangent grid; ties resolved by lowest index.
inline LSSample min_over(const InteractionMatrix& g, const Frame& f, const std::vector<CotangentPoint>& grid) {
    LSSample best;
    best.abs_det = std::numeric_limits<double>::infinity();
    for (const auto& c : grid) {
        double d = ls_abs_det(g, f, c.xi1, c.xi2, c.mu);
        if (d < best.abs_det) {
            best.abs_det = d;
            best.xi1 = c.xi1;
            best.xi2 = c.xi2;
            best.mu = c.mu;
        }
    }
    return best;
}

inline void finish(LSReport& r) {
    r.min_abs_det = std::numeric_limits<double>::infinity();
    for (const auto& s : r.samples)
        if (s.abs_det < r.min_abs_det) {
            r.min_abs_det = s.abs_det;
            r.argmin = s;
        }
    r.pass = r.min_abs_det > r.threshold;
}

inline LSReport over_surface(const SurfaceModel& surface, const GammaField& field, std::size_t n_s,
                             const std::vector<CotangentPoint>& grid, double threshold) {
    auto samples = surface.sample(n_s);
    if (samples.empty()) fail(ErrorKind::Domain, "empty surface sample set");
    LSReport r;
    r.threshold = threshold;
    for (const auto& s : samples) {
        LSSample m = min_over(field.at(s), s.frame, grid);
        m.id = s.id;
        m.point = s.point;
        r.samples.push_back(m);
    }
    finish(r);
    return r;
}

} // namespace detail

inline LSReport ls_check_local(const InteractionMatrix& gamma, const Frame& frame, std::size_t n_xi,
                               double threshold = default_ls_threshold, double phase = 0.0) {
    if (n_xi < 4) fail(ErrorKind::Domain, "ls_check_local needs at least 4 samples");
    LSReport r;
    r.threshold = threshold;
    std::size_t k = 0;
    for (const auto& c : circle_grid(n_xi, phase))
        r.samples.push_back({k++, Vec3::Zero(), c.xi1, c.xi2, 0.0, ls_abs_det(gamma, frame, c.xi1, c.xi2, 0.0)});
    detail::finish(r);
    return r;
}

inline LSReport ls_check_param(const InteractionMatrix& gamma, const Frame& frame, std::size_t n_grid,
                               double threshold = default_ls_threshold, double phase = 0.0) {
    if (n_grid < 8) fail(ErrorKind::Domain, "ls_check_param needs n_grid >= 8");
    LSReport r;
    r.threshold = threshold;
    std::size_t k = 0;
    for (const auto& c : sphere_grid(n_grid, phase))
        r.samples.push_back({k++, Vec3::Zero(), c.xi1, c.xi2, c.mu, ls_abs_det(gamma, frame, c.xi1, c.xi2, c.mu)});
    detail::finish(r);
    return r;
}

inline LSReport ls_check_uniform(const SurfaceModel& surface, const GammaField& field, std::size_t n_s,
                                 std::size_t n_xi, double threshold = default_ls_threshold,
                                 double phase = 0.0) {
    if (n_xi < 4) fail(ErrorKind::Domain, "ls_check_uniform needs at least 4 xi samples");
    return detail::over_surface(surface, field, n_s, circle_grid(n_xi, phase), threshold);
}

// Parameter-dependent condition uniformly over the surface.
inline LSReport ls_check_param_uniform(const SurfaceModel& surface, const GammaField& field, std::size_t n_s,
                                       std::size_t n_grid, double threshold = default_ls_threshold,
                                       double phase = 0.0) {
    if (n_grid < 8) fail(ErrorKind::Domain, "ls_check_param_uniform needs n_grid >= 8");
    return detail::over_surface(surface, field, n_s, sphere_grid(n_grid, phase), threshold);
}

// The two published closed forms for |det L|² with a diagonal pair.
struct DiagClosedForms {
    double quadratic; // 16 |xi|^8 (1 − gamma epsilon)^2
    double quartic;   // 16 rho^8 (1 − gamma epsilon)^4
};

inline DiagClosedForms closed_form_diag_det(double gamma, double epsilon, double xi_norm, double mu) {
    double d = 1.0 - gamma * epsilon;
    double rho2 = xi_norm * xi_norm + mu * mu;
    return {16.0 * std::pow(xi_norm, 8) * d * d, 16.0 * std::pow(rho2, 4) * d * d * d * d};
}

inline double electrostatic_lorentz_margin(double eta, double tau) { return std::abs(eta * eta - tau * tau - 4.0); }

inline bool hermitian_check(const GammaField& field, const SurfaceModel& surface, std::size_t n_s,
                            double tol = 1e-10) {
    for (const auto& s : surface.sample(n_s))
        if (!field.at(s).hermitian(tol)) return false;
    return true;
}

} // namespace dshell
