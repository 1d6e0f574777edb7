#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "transmission1d.hpp"

namespace dshell {

struct FDGrid {
    double half_length = 20.0; // L
    int points_per_side = 400; // N
    double h() const { return half_length / points_per_side; }

    void validate() const {
        if (!(half_length > 0) || !std::isfinite(half_length)) fail(ErrorKind::Domain, "FD half length must be positive");
        if (points_per_side < 100) fail(ErrorKind::Domain, "FD grid needs at least 100 points per side");
    }
};

using SpMat = Eigen::SparseMatrix<cplx>;
using CVecX = Eigen::VectorXcd;

// Unknowns: u at z = −N h, ..., −h (left, point index 0..N−1) followed by
// u at z = h, ..., N h (right, point index N..2N−1), four components each.
struct FDSystem {
    FDGrid grid;
    SpMat a;                  // 8N × 8N, interior rows
    Eigen::MatrixXcd c_local; // 4 × 24 transmission rows on points N−3 .. N+2
    SpMat q;                  // 8N × (8N−4), orthonormal basis of the constraint null space
    SpMat reduced;            // q* a q
    double constraint_condition = 0.0;

    int n() const { return 8 * grid.points_per_side; }
    double z_of_point(int p) const {
        int nn = grid.points_per_side;
        return p < nn ? -(nn - p) * grid.h() : (p - nn + 1) * grid.h();
    }
};

inline constexpr double fd_max_constraint_condition = 1e12;

inline FDSystem assemble(const ReducedSymbol1D& sym, const FDGrid& grid) {
    grid.validate();
    const int nn = grid.points_per_side;
    const double h = grid.h();
    auto b = sym.frame.generators();
    Mat4 h0 = sym.xi1 * b[0] + sym.xi2 * b[1] + sym.m * dirac_alpha(0) + sym.phi * Mat4::Identity();
    Mat4 d3 = I * b[2];

    FDSystem s;
    s.grid = grid;
    const int n = 8 * nn;
    std::vector<Eigen::Triplet<cplx>> trip;
    auto put = [&](int pr, int pc, const Mat4& m) {
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (m(i, j) != cplx(0)) trip.emplace_back(4 * pr + i, 4 * pc + j, m(i, j));
    };
    // j is the distance index from the interface, 1..N on each side.
    for (int side : {-1, 1}) {
        auto point = [&](int j) { return side > 0 ? nn - 1 + j : nn - j; };
        // Expands u_j into stored unknowns: u_0 = 3u_1 − 3u_2 + u_3, zero beyond N.
        auto expand = [&](int j, double w, std::vector<std::pair<int, double>>& out) {
            if (j == 0) {
                out.emplace_back(1, 3 * w);
                out.emplace_back(2, -3 * w);
                out.emplace_back(3, w);
            } else if (j <= nn) {
                out.emplace_back(j, w);
            }
        };
        for (int j = 1; j <= nn; ++j) {
            put(point(j), point(j), h0);
            std::vector<std::pair<int, double>> st;
            if (j == 1) st = {{0, -3}, {1, -10}, {2, 18}, {3, -6}, {4, 1}};
            else st = {{j - 2, 1}, {j - 1, -8}, {j + 1, 8}, {j + 2, -1}};
            std::vector<std::pair<int, double>> terms;
            for (auto [jj, c] : st) expand(jj, c, terms);
            for (auto [k, w] : terms) put(point(j), point(k), (side * w / (12.0 * h)) * d3);
        }
    }
    s.a.resize(n, n);
    s.a.setFromTriplets(trip.begin(), trip.end());

    // a+ u(0+) + a- u(0-) = 0 with one-sided extrapolation on each side.
    s.c_local = Eigen::MatrixXcd::Zero(4, 24);
    const double ex[3] = {3, -3, 1};
    for (int j = 1; j <= 3; ++j) {
        int right = (nn - 1 + j) - (nn - 3);
        int left = (nn - j) - (nn - 3);
        s.c_local.block(0, 4 * right, 4, 4) += ex[j - 1] * sym.a_plus;
        s.c_local.block(0, 4 * left, 4, 4) += ex[j - 1] * sym.a_minus;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s.c_local, Eigen::ComputeFullV);
    auto sv = svd.singularValues();
    s.constraint_condition = sv(3) > 0 ? sv(0) / sv(3) : inf;
    if (!(s.constraint_condition < fd_max_constraint_condition))
        fail(ErrorKind::Solver, "ill-conditioned constraint projection (condition number " +
                                    std::to_string(s.constraint_condition) + ")");
    Eigen::MatrixXcd null = svd.matrixV().rightCols(20);

    const int lo = 4 * (nn - 3), hi = 4 * (nn + 3);
    std::vector<Eigen::Triplet<cplx>> qt;
    for (int i = 0; i < lo; ++i) qt.emplace_back(i, i, 1.0);
    for (int i = 0; i < 24; ++i)
        for (int j = 0; j < 20; ++j) qt.emplace_back(lo + i, lo + j, null(i, j));
    for (int i = hi; i < n; ++i) qt.emplace_back(i, i - 4, 1.0);
    s.q.resize(n, n - 4);
    s.q.setFromTriplets(qt.begin(), qt.end());
    SpMat qa = SpMat(s.q.adjoint()) * s.a;
    s.reduced = qa * s.q;
    s.reduced.makeCompressed();
    return s;
}

struct FDOptions {
    int n_shifts = 8;
    int krylov_dim = 24;
    double edge_margin = 1e-3;        // eigenvalues with |E − phi| < (1 − margin) gap
    double residual_tol = 1e-8;       // relative eigenpair residual
    double localization = 0.99;       // mass fraction inside |z| <= L/2
    double stability = 1e-3;         // allowed move when N doubles
    double smoothness = 0.5;          // max ‖Δu‖/‖u‖ per side; doubled modes sit near 2
    double target_h = 0.1;           // spacing used when the grid is chosen automatically
    double decay_lengths = 20.0;      // L >= decay_lengths / kappa_min
    double max_half_length = 200.0;
};

struct FDEigen {
    cplx value;
    double localization = 0.0;
    double smoothness = 0.0;
    double residual = 0.0;
};

namespace detail {

// Shift-invert Arnoldi around sigma. Returns Ritz pairs (lambda, x) of the
// reduced matrix with small true residual.
inline std::vector<std::pair<cplx, CVecX>> shift_invert(const SpMat& a, cplx sigma, const FDOptions& opt) {
    const Eigen::Index n = a.rows();
    SpMat shifted = a;
    for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
    shifted.makeCompressed();
    Eigen::SparseLU<SpMat> lu;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success) fail(ErrorKind::Solver, "sparse LU failed at shift " + std::to_string(sigma.real()));
    const int m = static_cast<int>(std::min<Eigen::Index>(opt.krylov_dim, n - 1));
    Eigen::MatrixXcd v(n, m + 1);
    Eigen::MatrixXcd hm = Eigen::MatrixXcd::Zero(m + 1, m);
    CVecX start(n);
    for (Eigen::Index i = 0; i < n; ++i)
        start(i) = cplx(1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i)), 0.3 * std::cos(1.3 * static_cast<double>(i)));
    v.col(0) = start.normalized();
    int k = 0;
    for (; k < m; ++k) {
        CVecX w = lu.solve(v.col(k));
        for (int pass = 0; pass < 2; ++pass)
            for (int j = 0; j <= k; ++j) {
                cplx c = v.col(j).dot(w);
                hm(j, k) += c;
                w -= c * v.col(j);
            }
        double nw = w.norm();
        hm(k + 1, k) = nw;
        if (nw < 1e-14) {
            ++k;
            break;
        }
        v.col(k + 1) = w / nw;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(hm.topLeftCorner(k, k));
    std::vector<std::pair<cplx, CVecX>> out;
    double anorm = 0.0;
    for (int j = 0; j < a.outerSize(); ++j)
        for (SpMat::InnerIterator it(a, j); it; ++it) anorm = std::max(anorm, std::abs(it.value()));
    for (int i = 0; i < k; ++i) {
        cplx theta = es.eigenvalues()(i);
        if (std::abs(theta) < 1e-300) continue;
        cplx lambda = sigma + 1.0 / theta;
        CVecX x = v.leftCols(k) * es.eigenvectors().col(i);
        x.normalize();
        double res = (a * x - lambda * x).norm();
        if (res <= opt.residual_tol * std::max(1.0, anorm)) out.emplace_back(lambda, x);
    }
    return out;
}

} // namespace detail

struct FDResult {
    FDGrid grid;
    std::vector<double> eigenvalues;   // accepted, sorted
    std::vector<FDEigen> accepted;
    std::vector<FDEigen> rejected;     // in the gap but filtered out
    bool reliable = true;
    std::vector<std::string> warnings;
    double constraint_condition = 0.0;
};

namespace detail {

// Candidate gap eigenpairs on one grid, deduplicated, with filter statistics.
inline std::vector<FDEigen> fd_candidates(const ReducedSymbol1D& sym, const FDGrid& grid, const FDOptions& opt,
                                          double* condition = nullptr) {
    FDSystem s = assemble(sym, grid);
    if (condition) *condition = s.constraint_condition;
    double g = sym.gap_halfwidth();
    std::vector<FDEigen> out;
    if (!(g > 0)) return out;
    const int nn = grid.points_per_side;
    for (int i = 0; i < opt.n_shifts; ++i) {
        double sigma = sym.phi + g * (-1.0 + 2.0 * (i + 1) / (opt.n_shifts + 1));
        for (auto& [lambda, x] : shift_invert(s.reduced, sigma, opt)) {
            if (!(std::abs(lambda.real() - sym.phi) < (1.0 - opt.edge_margin) * g)) continue;
            bool dup = false;
            for (const auto& e : out)
                if (std::abs(e.value - lambda) < 1e-8 * std::max(1.0, g)) dup = true;
            if (dup) continue;
            CVecX u = s.q * x;
            double inside = 0.0, total = 0.0;
            double diff[2] = {0, 0}, mass[2] = {0, 0};
            for (int p = 0; p < 2 * nn; ++p) {
                double w = u.segment(4 * p, 4).squaredNorm();
                total += w;
                if (std::abs(s.z_of_point(p)) <= 0.5 * grid.half_length) inside += w;
                int side = p < nn ? 0 : 1;
                mass[side] += w;
                if (p + 1 < 2 * nn && p + 1 != nn) diff[side] += (u.segment(4 * (p + 1), 4) - u.segment(4 * p, 4)).squaredNorm();
            }
            double smooth = 0.0;
            for (int sd = 0; sd < 2; ++sd)
                if (mass[sd] > 1e-6 * total) smooth = std::max(smooth, std::sqrt(diff[sd] / mass[sd]));
            FDEigen e;
            e.value = lambda;
            e.localization = total > 0 ? inside / total : 0.0;
            e.smoothness = smooth;
            e.residual = (s.reduced * x - lambda * x).norm();
            out.push_back(e);
        }
    }
    std::sort(out.begin(), out.end(), [](const FDEigen& a, const FDEigen& b) { return a.value.real() < b.value.real(); });
    return out;
}

} // namespace detail

// Gap eigenvalues of the discretized operator on a fixed grid, filtered by
// localization, smoothness (rejects the doubled mirror modes of the central
// stencil) and stability under doubling N.
inline FDResult gap_eigenvalues_fd(const ReducedSymbol1D& sym, const FDGrid& grid, const FDOptions& opt = {}) {
    FDResult r;
    r.grid = grid;
    auto cands = detail::fd_candidates(sym, grid, opt, &r.constraint_condition);
    std::vector<FDEigen> pass;
    for (const auto& c : cands) {
        if (c.localization >= opt.localization && c.smoothness <= opt.smoothness) pass.push_back(c);
        else r.rejected.push_back(c);
    }
    if (!pass.empty()) {
        FDGrid fine{grid.half_length, 2 * grid.points_per_side};
        auto refined = detail::fd_candidates(sym, fine, opt);
        for (const auto& c : pass) {
            bool stable = false;
            for (const auto& f : refined)
                if (std::abs(f.value.real() - c.value.real()) < opt.stability) stable = true;
            if (stable) r.accepted.push_back(c);
            else r.rejected.push_back(c);
        }
    }
    for (const auto& c : r.accepted) r.eigenvalues.push_back(c.value.real());
    double g = sym.gap_halfwidth();
    for (double e : r.eigenvalues) {
        double kappa = std::sqrt(std::max(0.0, g * g - (e - sym.phi) * (e - sym.phi)));
        if (kappa * grid.half_length < opt.decay_lengths) {
            r.reliable = false;
            r.warnings.push_back("half length " + std::to_string(grid.half_length) + " is below " +
                                 std::to_string(opt.decay_lengths) + "/kappa for eigenvalue " + std::to_string(e));
        }
    }
    return r;
}

// Chooses L from the decay rates of the candidates (L >= decay_lengths/kappa_min,
// capped at max_half_length) and h close to target_h.
inline FDResult gap_eigenvalues_fd_auto(const ReducedSymbol1D& sym, const FDOptions& opt = {}) {
    double g = sym.gap_halfwidth();
    auto grid_for = [&](double l) {
        int n = std::max(100, static_cast<int>(std::ceil(l / opt.target_h)));
        return FDGrid{l, n};
    };
    if (!(g > 0)) return gap_eigenvalues_fd(sym, grid_for(20.0), opt);
    double l = std::min(opt.max_half_length, 2.0 * opt.decay_lengths / g);
    auto cands = detail::fd_candidates(sym, grid_for(l), opt);
    double need = l;
    for (const auto& c : cands) {
        if (c.smoothness > opt.smoothness) continue;
        double w = c.value.real() - sym.phi;
        double kappa = std::sqrt(std::max(0.0, g * g - w * w));
        if (kappa > 0) need = std::max(need, opt.decay_lengths / kappa);
    }
    bool capped = need > opt.max_half_length;
    auto r = gap_eigenvalues_fd(sym, grid_for(std::min(need, opt.max_half_length)), opt);
    if (capped) {
        r.reliable = false;
        r.warnings.push_back("required half length exceeds the cap " + std::to_string(opt.max_half_length));
    }
    return r;
}

} // namespace dshell
