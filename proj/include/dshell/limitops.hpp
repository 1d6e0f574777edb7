#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "spectrum_set.hpp"
#include "surfaces.hpp"
#include "transmission1d.hpp"

namespace dshell {

struct ConstantField {
    double value = 0.0;
};

// base + amplitude·p(|x|) with a slowly oscillating profile p whose partial
// limits fill [−1, 1].
struct RadialSO {
    enum class Profile { SinLog, SinSqrt };
    double base = 0.0;
    double amplitude = 1.0;
    Profile profile = Profile::SinLog;

    double profile_at(double r) const {
        return profile == Profile::SinLog ? std::sin(std::log1p(r)) : std::sin(std::sqrt(r));
    }
};

// Homogeneous of degree zero: Phi(x) interpolates the declared limits between
// the directions omega_k (inverse squared-angle weights, exact at omega_k).
struct DirectionalSO {
    std::vector<Vec3> directions;
    std::vector<double> values;

    double limit_at(const Vec3& omega) const {
        double ws = 0.0, acc = 0.0;
        for (std::size_t k = 0; k < directions.size(); ++k) {
            double c = std::clamp(omega.dot(directions[k]), -1.0, 1.0);
            double ang = std::acos(c);
            if (ang < 1e-12) return values[k];
            double w = 1.0 / (ang * ang);
            ws += w;
            acc += w * values[k];
        }
        return acc / ws;
    }
};

using ScalarField = std::variant<ConstantField, RadialSO, DirectionalSO>;

inline double evaluate(const ScalarField& f, const Vec3& x) {
    if (auto* c = std::get_if<ConstantField>(&f)) return c->value;
    if (auto* r = std::get_if<RadialSO>(&f)) return r->base + r->amplitude * r->profile_at(x.norm());
    const auto& d = std::get<DirectionalSO>(f);
    double n = x.norm();
    return d.limit_at(n > 0 ? Vec3(x / n) : Vec3::UnitZ());
}

// Electric potential Phi and magnetic potential A. A is carried for completeness;
// no spectral formula depends on it.
struct PotentialModel {
    ScalarField phi = ConstantField{};
    std::array<ScalarField, 3> magnetic{ConstantField{}, ConstantField{}, ConstantField{}};
};

struct PartialLimits {
    double m_inf = 0.0;
    double m_sup = 0.0;
    Interval limit_set{0.0, 0.0};
    double empirical_min = 0.0; // ray-sampling diagnostic
    double empirical_max = 0.0;
    bool empirical_matches = true;
};

inline void validate_field(const ScalarField& f) {
    if (auto* d = std::get_if<DirectionalSO>(&f)) {
        if (d->values.empty()) fail(ErrorKind::Config, "declared partial-limit set is empty");
        if (d->directions.size() != d->values.size())
            fail(ErrorKind::Config, "directional potential needs one value per direction");
        for (const auto& w : d->directions)
            if (!all_finite(w) || std::abs(w.norm() - 1.0) > 1e-10)
                fail(ErrorKind::Config, "directional potential directions must be unit vectors");
    }
    if (auto* r = std::get_if<RadialSO>(&f))
        if (!std::isfinite(r->base) || !std::isfinite(r->amplitude)) fail(ErrorKind::Config, "radial potential must be finite");
}

inline Interval declared_limit_set(const ScalarField& f) {
    validate_field(f);
    if (auto* c = std::get_if<ConstantField>(&f)) return {c->value, c->value};
    if (auto* r = std::get_if<RadialSO>(&f)) return {r->base - std::abs(r->amplitude), r->base + std::abs(r->amplitude)};
    const auto& d = std::get<DirectionalSO>(f);
    auto [lo, hi] = std::minmax_element(d.values.begin(), d.values.end());
    return {*lo, *hi};
}

// Partial limits along one direction.
inline Interval limit_set_at(const ScalarField& f, const Vec3& omega) {
    if (auto* d = std::get_if<DirectionalSO>(&f)) {
        double v = d->limit_at(omega);
        return {v, v};
    }
    return declared_limit_set(f);
}

struct RaySampling {
    std::size_t n_dirs = 32;
    std::size_t n_radii = 4000;
    double r_from = 1e4;
    double r_max = 1e8;
};

inline PartialLimits partial_limits(const ScalarField& f, const RaySampling& rs = {}) {
    PartialLimits p;
    p.limit_set = declared_limit_set(f);
    p.m_inf = p.limit_set.lo;
    p.m_sup = p.limit_set.hi;
    p.empirical_min = inf;
    p.empirical_max = -inf;
    for (const Vec3& w : fibonacci_sphere(rs.n_dirs))
        for (std::size_t k = 0; k < rs.n_radii; ++k) {
            double t = static_cast<double>(k) / static_cast<double>(rs.n_radii - 1);
            double r = rs.r_from * std::pow(rs.r_max / rs.r_from, t);
            double v = evaluate(f, r * w);
            p.empirical_min = std::min(p.empirical_min, v);
            p.empirical_max = std::max(p.empirical_max, v);
        }
    // Fibonacci directions need not hit the extremes of a directional model, so
    // compare against the range of the limits at the sampled directions there.
    double lo = p.m_inf, hi = p.m_sup;
    if (std::holds_alternative<DirectionalSO>(f)) {
        lo = inf;
        hi = -inf;
        for (const Vec3& w : fibonacci_sphere(rs.n_dirs)) {
            double v = std::get<DirectionalSO>(f).limit_at(w);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    p.empirical_matches = std::abs(p.empirical_min - lo) <= 1e-2 && std::abs(p.empirical_max - hi) <= 1e-2;
    return p;
}

inline PartialLimits partial_limits(const PotentialModel& phi, const RaySampling& rs = {}) {
    return partial_limits(phi.phi, rs);
}

// Spectrum of the free operator with mass m shifted by the constant phi_h.
inline SpectrumSet free_spectrum(double m, double phi_h) {
    return SpectrumSet::rays(phi_h - std::abs(m), phi_h + std::abs(m));
}

struct NonShell {
    double phi_h = 0.0;
};

struct Shell {
    Vec3 omega = Vec3::UnitX();
    double phi_h = 0.0;
    InteractionMatrix gamma_limit;
    Vec3 nu = Vec3::UnitZ();
};

using LimitOperatorDescriptor = std::variant<NonShell, Shell>;

struct LimitOptions {
    std::size_t n_dirs = 64;
    std::size_t phi_samples = 9;
};

inline std::vector<double> sample_interval(const Interval& iv, std::size_t n) {
    if (iv.lo == iv.hi || n < 2) return {iv.lo};
    std::vector<double> out;
    for (std::size_t k = 0; k < n; ++k)
        out.push_back(k == n - 1 ? iv.hi : iv.lo + (iv.hi - iv.lo) * static_cast<double>(k) / static_cast<double>(n - 1));
    return out;
}

inline std::vector<LimitOperatorDescriptor> enumerate_limits(const SurfaceModel& surface, const PotentialModel& phi,
                                                             const GammaField& gamma, const LimitOptions& opt = {}) {
    for (const auto& a : phi.magnetic) validate_field(a);
    Interval all = declared_limit_set(phi.phi);
    std::vector<LimitOperatorDescriptor> out;
    // The union over off-Sigma_infinity directions of their limit values is dense in
    // the declared set, so the non-shell values are sampled from the whole set.
    for (double v : sample_interval(all, opt.phi_samples)) out.emplace_back(NonShell{v});
    if (!surface.is_conic_at_infinity()) return out;
    if (!gamma.has_limit()) fail(ErrorKind::Config, "missing Gamma limits at Sigma_infinity");
    for (const auto& d : surface.infinity_directions(opt.n_dirs)) {
        if (!d.on_sigma_infinity) continue;
        InteractionMatrix g = gamma.limit(d.omega);
        for (double v : sample_interval(limit_set_at(phi.phi, d.omega), opt.phi_samples))
            out.emplace_back(Shell{d.omega, v, g, d.normal_at_infinity});
    }
    return out;
}

struct ProvenanceEntry {
    std::string kind; // "rays", "shell_point", "shell_hull"
    long descriptor = -1;
    int branch = -1;
    double xi_norm = 0.0;
    Interval range;
};

struct ShellBranch {
    std::size_t descriptor = 0;
    int branch_id = 0;
    std::vector<std::pair<double, double>> points; // (xi_norm, energy)
    Interval hull;                                 // clipped to the gap
};

struct EssentialSpectrum {
    SpectrumSet rays;
    SpectrumSet sampled; // rays ∪ shell eigenvalue points
    SpectrumSet closure; // rays ∪ branch hulls
    std::vector<ShellBranch> branches;
    std::vector<ProvenanceEntry> provenance;
    std::vector<std::vector<DispersionRow>> shell_tables; // per descriptor (empty for non-shell)
    std::size_t shell_descriptors = 0;
    bool shell_contribution_empty() const { return sampled == rays && closure == rays; }
};

struct SpectrumOptions {
    GapSearchOptions gap;
    double branch_factor = 10.0; // adjacent-row continuity threshold, in units of the xi spacing
    unsigned threads = 1;
};

inline std::vector<double> default_xi_grid(double m, std::size_t n = 33) {
    std::vector<double> g;
    double top = 3.0 * (std::abs(m) + 1.0);
    for (std::size_t k = 0; k < n; ++k) g.push_back(top * static_cast<double>(k) / static_cast<double>(n - 1));
    return g;
}

namespace detail {

// Greedy nearest-neighbour linking of eigenvalues between adjacent rows.
inline std::vector<std::vector<std::pair<double, double>>> link_branches(const std::vector<DispersionRow>& rows,
                                                                        double factor) {
    std::vector<std::vector<std::pair<double, double>>> branches;
    std::vector<std::size_t> open; // branch ids continued from the previous row
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double dxi = r > 0 ? rows[r].xi_norm - rows[r - 1].xi_norm : 0.0;
        double reach = factor * std::abs(dxi);
        std::vector<std::size_t> next;
        std::vector<bool> used(open.size(), false);
        for (const auto& ev : rows[r].eigenvalues) {
            long best = -1;
            double bd = inf;
            for (std::size_t k = 0; k < open.size(); ++k) {
                if (used[k]) continue;
                double d = std::abs(branches[open[k]].back().second - ev.energy);
                if (d <= reach && d < bd) {
                    bd = d;
                    best = static_cast<long>(k);
                }
            }
            if (best >= 0) {
                used[static_cast<std::size_t>(best)] = true;
                branches[open[static_cast<std::size_t>(best)]].emplace_back(rows[r].xi_norm, ev.energy);
                next.push_back(open[static_cast<std::size_t>(best)]);
            } else {
                branches.push_back({{rows[r].xi_norm, ev.energy}});
                next.push_back(branches.size() - 1);
            }
        }
        open = next;
    }
    return branches;
}

} // namespace detail

inline EssentialSpectrum essential_spectrum(const std::vector<LimitOperatorDescriptor>& descriptors, double m,
                                            const std::vector<double>& xi_grid, const SpectrumOptions& opt = {}) {
    if (descriptors.empty()) fail(ErrorKind::Domain, "no limit operators given");
    EssentialSpectrum es;
    const double am = std::abs(m);
    double sup = -inf, inf_ = inf;
    for (const auto& d : descriptors)
        if (auto* n = std::get_if<NonShell>(&d)) {
            sup = std::max(sup, n->phi_h);
            inf_ = std::min(inf_, n->phi_h);
        }
    if (sup > -inf) {
        // Every intermediate phi_h gives rays inside those of the two extremes.
        es.rays = free_spectrum(m, sup).unite(free_spectrum(m, inf_));
        es.provenance.push_back({"rays", -1, -1, 0.0, {-inf, sup - am}});
        es.provenance.push_back({"rays", -1, -1, 0.0, {inf_ + am, inf}});
    }
    es.sampled = es.rays;
    es.closure = es.rays;
    es.shell_tables.resize(descriptors.size());

    // Identical shell problems are solved once.
    std::map<std::vector<double>, std::size_t> cache;
    int branch_counter = 0;
    for (std::size_t i = 0; i < descriptors.size(); ++i) {
        auto* s = std::get_if<Shell>(&descriptors[i]);
        if (!s) continue;
        ++es.shell_descriptors;
        Mat4 gm = s->gamma_limit.gamma_matrix();
        std::vector<double> key{s->phi_h, s->nu.x(), s->nu.y(), s->nu.z()};
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                key.push_back(gm(a, b).real());
                key.push_back(gm(a, b).imag());
            }
        auto hit = cache.find(key);
        if (hit != cache.end()) {
            es.shell_tables[i] = es.shell_tables[hit->second];
        } else {
            try {
                es.shell_tables[i] = dispersion_curve(s->gamma_limit, m, s->phi_h, xi_grid, opt.gap,
                                                      Frame::from_normal(s->nu), opt.threads);
            } catch (const Error& e) {
                fail(ErrorKind::Solver, "shell descriptor " + std::to_string(i) + ": " + e.what());
            }
            cache.emplace(key, i);
        }
        const double lo = s->phi_h - am, hi = s->phi_h + am;
        for (const auto& row : es.shell_tables[i])
            for (const auto& ev : row.eigenvalues)
                if (lo < ev.energy && ev.energy < hi) {
                    es.sampled = es.sampled.unite(SpectrumSet({}, {ev.energy}));
                    es.provenance.push_back({"shell_point", static_cast<long>(i), -1, row.xi_norm, {ev.energy, ev.energy}});
                }
        for (auto& pts : detail::link_branches(es.shell_tables[i], opt.branch_factor)) {
            double bmin = inf, bmax = -inf;
            bool touches = false;
            for (auto [x, e] : pts) {
                bmin = std::min(bmin, e);
                bmax = std::max(bmax, e);
                if (lo < e && e < hi) touches = true;
            }
            if (!touches) continue;
            ShellBranch br{i, branch_counter++, pts, {std::max(bmin, lo), std::min(bmax, hi)}};
            es.closure = es.closure.unite(SpectrumSet({br.hull}));
            es.provenance.push_back({"shell_hull", static_cast<long>(i), br.branch_id, 0.0, br.hull});
            es.branches.push_back(std::move(br));
        }
    }
    return es;
}

} // namespace dshell
