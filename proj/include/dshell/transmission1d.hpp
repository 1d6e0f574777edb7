#pragma once

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "interaction.hpp"
#include "linalg.hpp"
#include "spectrum_set.hpp"

namespace dshell {

// Data of the 1-D transmission operator
//   xi1 beta1 + xi2 beta2 + i beta3 d/dz + m alpha0 + phi,  a+ u(0+) + a- u(0-) = 0
// where beta_j are the generators of `frame` (alpha_j for the standard frame).
struct ReducedSymbol1D {
    double xi1 = 0.0, xi2 = 0.0;
    double m = 0.0;
    double phi = 0.0;
    Mat4 a_plus = Mat4::Zero();
    Mat4 a_minus = Mat4::Zero();
    Frame frame;

    double xi_norm() const { return std::hypot(xi1, xi2); }
    double gap_halfwidth() const { return std::sqrt(xi1 * xi1 + xi2 * xi2 + m * m); }
};

inline ReducedSymbol1D make_reduced_symbol(const InteractionMatrix& gamma, double xi1, double xi2, double m,
                                           double phi, const Frame& frame = Frame::standard()) {
    frame.validate();
    if (!std::isfinite(xi1) || !std::isfinite(xi2) || !std::isfinite(m) || !std::isfinite(phi))
        fail(ErrorKind::Domain, "reduced symbol needs finite data");
    TransmissionPair a = transmission_pair(gamma, frame.nu);
    return {xi1, xi2, m, phi, a.a_plus, a.a_minus, frame};
}

struct GapEigenvalue {
    double energy = 0.0;
    double xi_norm = 0.0;
    double residual = 0.0;          // |det| at the accepted energy
    double min_singular_value = 0.0; // relative to the largest singular value
    int multiplicity = 1;            // count of singular values below the acceptance level
    double imag_diagnostic = 0.0;    // |Im| of the complex Newton correction
};

struct GapSearchOptions {
    int n_scan = 512;
    double tol = 1e-10;
    double accept = 1e-6;      // relative smallest singular value
    double edge_margin = 1e-6; // search |E − phi| <= (1 − edge_margin)·gap
    double pivot_threshold = 1e-10;
};

inline SpectrumSet essential_rays(const ReducedSymbol1D& sym) {
    double g = sym.gap_halfwidth();
    return SpectrumSet::rays(sym.phi - g, sym.phi + g);
}

namespace detail {

// M(k) + w with M(k) = xi·beta' + k beta3 + m alpha0. Decaying solutions on z > 0
// use k = −i kappa, on z < 0 k = +i kappa.
inline Mat4 decay_operator(const ReducedSymbol1D& s, cplx k, cplx w) {
    auto b = s.frame.generators();
    return s.xi1 * b[0] + s.xi2 * b[1] + k * b[2] + s.m * dirac_alpha(0) + w * Mat4::Identity();
}

inline cplx kappa_of(const ReducedSymbol1D& s, cplx w) {
    double g = s.gap_halfwidth();
    return std::sqrt(g * g - w * w);
}

inline void check_in_gap(const ReducedSymbol1D& s, double e) {
    double g = s.gap_halfwidth();
    if (!(std::abs(e - s.phi) < g)) fail(ErrorKind::Domain, "energy outside the open gap");
}

} // namespace detail

struct DecayBasis {
    double kappa = 0.0;
    Span2 right; // decaying on z > 0: u = w exp(−kappa z)
    Span2 left;  // decaying on z < 0: u = w exp(+kappa z)
};

inline DecayBasis decay_basis(const ReducedSymbol1D& sym, double energy, double pivot_threshold = 1e-10) {
    detail::check_in_gap(sym, energy);
    double w = energy - sym.phi;
    double kappa = detail::kappa_of(sym, w).real();
    if (!(kappa > 0)) fail(ErrorKind::Domain, "kappa = 0 at the gap edge");
    return {kappa, pivoted_span2(detail::decay_operator(sym, -I * kappa, w), pivot_threshold),
            pivoted_span2(detail::decay_operator(sym, I * kappa, w), pivot_threshold)};
}

// Columns (a+ w-¹, a+ w-², a- w+¹, a- w+²) with orthonormal w.
inline Mat4 dispersion_matrix(const ReducedSymbol1D& sym, double energy, double pivot_threshold = 1e-10) {
    DecayBasis d = decay_basis(sym, energy, pivot_threshold);
    Mat4 m;
    m.col(0) = sym.a_plus * d.right.w1;
    m.col(1) = sym.a_plus * d.right.w2;
    m.col(2) = sym.a_minus * d.left.w1;
    m.col(3) = sym.a_minus * d.left.w2;
    return m;
}

inline cplx dispersion_det(const ReducedSymbol1D& sym, double energy) {
    return dispersion_matrix(sym, energy).determinant();
}

// Holomorphic continuation of dispersion_det to complex energies near the real
// axis, with the column choice frozen at `pivot_at`. The orthonormalization is
// continued through the Gram determinants, with conj(c(E)) replaced by conj(c(conj E)).
inline cplx dispersion_det_analytic(const ReducedSymbol1D& sym, cplx energy, double pivot_at) {
    DecayBasis ref = decay_basis(sym, pivot_at);
    auto columns = [&](cplx e, bool right) {
        cplx w = e - sym.phi;
        cplx k = detail::kappa_of(sym, w);
        Mat4 m = detail::decay_operator(sym, right ? -I * k : I * k, w);
        const Span2& sp = right ? ref.right : ref.left;
        Eigen::Matrix<cplx, 4, 2> c;
        c.col(0) = m.col(sp.pivots[0]);
        c.col(1) = m.col(sp.pivots[1]);
        return c;
    };
    Mat4 d;
    cplx norm{1.0, 0.0};
    for (bool right : {true, false}) {
        auto c = columns(energy, right);
        auto cbar = columns(std::conj(energy), right);
        Eigen::Matrix2cd gram = cbar.adjoint() * c;
        norm *= std::sqrt(gram.determinant());
        const Mat4& a = right ? sym.a_plus : sym.a_minus;
        d.block<4, 2>(0, right ? 0 : 2) = a * c;
    }
    return d.determinant() / norm;
}

namespace detail {

inline double rel_sigma_min(const ReducedSymbol1D& sym, double e, double pivot) {
    Eigen::JacobiSVD<Mat4> svd(dispersion_matrix(sym, e, pivot));
    auto s = svd.singularValues();
    return s(0) > 0 ? s(3) / s(0) : 0.0;
}

// Golden-section minimization of f on [a, b] down to the given width.
template <class F>
double golden_min(F&& f, double a, double b, double width) {
    const double r = 0.6180339887498949;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > width) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? c : d;
}

} // namespace detail

// The dispersion matrix as a holomorphic function of the energy: pivot columns
// of the decay operators times the fixed triangular factor that orthonormalizes
// them at `ref_energy`. Agrees with dispersion_matrix at ref_energy.
inline Mat4 frozen_dispersion_matrix(const ReducedSymbol1D& sym, cplx energy, double ref_energy) {
    DecayBasis ref = decay_basis(sym, ref_energy);
    cplx w0 = ref_energy - sym.phi;
    cplx k0 = ref.kappa;
    cplx we = energy - sym.phi;
    cplx ke = detail::kappa_of(sym, we);
    Mat4 m;
    for (bool right : {true, false}) {
        const Span2& sp = right ? ref.right : ref.left;
        cplx s = right ? -I : I;
        Mat4 op0 = detail::decay_operator(sym, s * k0, w0);
        Mat4 op = detail::decay_operator(sym, s * ke, we);
        Eigen::Matrix<cplx, 4, 2> c0, c, q;
        c0 << op0.col(sp.pivots[0]), op0.col(sp.pivots[1]);
        c << op.col(sp.pivots[0]), op.col(sp.pivots[1]);
        q << sp.w1, sp.w2;
        Eigen::Matrix2cd r = q.adjoint() * c0;
        const Mat4& a = right ? sym.a_plus : sym.a_minus;
        m.block<4, 2>(0, right ? 0 : 2) = a * (c * r.inverse());
    }
    return m;
}

// Newton correction from the k smallest singular triplets: the eigenvalues of
// the pencil −(U* D' V)^{-1} (U* D V). Its imaginary part measures how far the
// nearest root of the holomorphic determinant sits off the real axis.
inline cplx singular_newton_step(const ReducedSymbol1D& sym, double energy, int k) {
    Mat4 d = dispersion_matrix(sym, energy);
    Eigen::JacobiSVD<Mat4> svd(d, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::MatrixXcd u = svd.matrixU().rightCols(k);
    Eigen::MatrixXcd v = svd.matrixV().rightCols(k);
    double g = sym.gap_halfwidth();
    double h = 1e-6 * std::min(g, g - std::abs(energy - sym.phi));
    Mat4 dp = (frozen_dispersion_matrix(sym, energy + I * h, energy) -
               frozen_dispersion_matrix(sym, energy - I * h, energy)) /
              (2.0 * I * h);
    Eigen::MatrixXcd lhs = u.adjoint() * dp * v;
    Eigen::MatrixXcd rhs = u.adjoint() * d * v;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(-lhs.fullPivLu().solve(rhs));
    cplx best = es.eigenvalues()(0);
    for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i)) < std::abs(best)) best = es.eigenvalues()(i);
    return best;
}

inline std::vector<GapEigenvalue> gap_eigenvalues(const ReducedSymbol1D& sym, const GapSearchOptions& opt = {}) {
    if (opt.n_scan < 16) fail(ErrorKind::Domain, "gap scan needs at least 16 points");
    if (!(opt.tol > 0)) fail(ErrorKind::Domain, "gap refinement tolerance must be positive");
    std::vector<GapEigenvalue> out;
    double g = sym.gap_halfwidth();
    if (!(g > 0)) return out;
    double half = (1.0 - opt.edge_margin) * g;
    double lo = sym.phi - half, hi = sym.phi + half;
    int n = opt.n_scan;
    std::vector<double> e(static_cast<std::size_t>(n)), d(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        e[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
        d[static_cast<std::size_t>(i)] = std::abs(dispersion_matrix(sym, e[static_cast<std::size_t>(i)], opt.pivot_threshold).determinant());
    }
    auto objective = [&](double x) { return detail::rel_sigma_min(sym, x, opt.pivot_threshold); };
    std::vector<double> found;
    for (int i = 0; i < n; ++i) {
        auto k = static_cast<std::size_t>(i);
        bool left_ok = i == 0 || d[k] < d[k - 1];
        bool right_ok = i == n - 1 || d[k] <= d[k + 1];
        if (!left_ok || !right_ok) continue;
        double a = e[i == 0 ? k : k - 1], b = e[i == n - 1 ? k : k + 1];
        double x = detail::golden_min(objective, a, b, opt.tol);
        if (objective(x) < opt.accept) found.push_back(x);
    }
    std::sort(found.begin(), found.end());
    for (double x : found) {
        if (!out.empty() && std::abs(x - out.back().energy) <= 10 * opt.tol) continue;
        Mat4 dm = dispersion_matrix(sym, x, opt.pivot_threshold);
        Eigen::JacobiSVD<Mat4> svd(dm);
        auto s = svd.singularValues();
        int mult = 0;
        for (int j = 0; j < 4; ++j)
            if (s(j) < opt.accept * s(0)) ++mult;
        GapEigenvalue ev;
        ev.xi_norm = sym.xi_norm();
        ev.multiplicity = std::max(mult, 1);
        cplx step = singular_newton_step(sym, x, ev.multiplicity);
        ev.imag_diagnostic = std::abs(step.imag());
        double polished = x + step.real();
        if (std::abs(step.real()) < 1e3 * opt.tol && std::abs(polished - sym.phi) < half &&
            objective(polished) <= objective(x))
            x = polished;
        ev.energy = x;
        ev.residual = std::abs(dispersion_matrix(sym, x, opt.pivot_threshold).determinant());
        ev.min_singular_value = objective(x);
        out.push_back(ev);
    }
    return out;
}

struct DispersionRow {
    double xi_norm = 0.0;
    std::vector<GapEigenvalue> eigenvalues;
};

// Rows in input order; xi' = (|xi'|, 0) in the given frame.
inline std::vector<DispersionRow> dispersion_curve(const InteractionMatrix& gamma, double m, double phi,
                                                   const std::vector<double>& xi_grid,
                                                   const GapSearchOptions& opt = {},
                                                   const Frame& frame = Frame::standard(), unsigned threads = 1) {
    if (xi_grid.empty()) fail(ErrorKind::Domain, "dispersion grid is empty");
    for (double x : xi_grid)
        if (!(x >= 0) || !std::isfinite(x)) fail(ErrorKind::Domain, "dispersion grid values must be nonnegative");
    std::vector<DispersionRow> rows(xi_grid.size());
    auto work = [&](std::size_t i) {
        rows[i].xi_norm = xi_grid[i];
        rows[i].eigenvalues = gap_eigenvalues(make_reduced_symbol(gamma, xi_grid[i], 0.0, m, phi, frame), opt);
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(rows.size())));
    if (threads == 1) {
        for (std::size_t i = 0; i < rows.size(); ++i) work(i);
        return rows;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < rows.size(); i += threads) work(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

} // namespace dshell
