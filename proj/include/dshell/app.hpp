#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "fd_oracle.hpp"
#include "limitops.hpp"
#include "shell_symbol.hpp"
#include "transmission1d.hpp"

namespace dshell {

inline constexpr const char* tool_version = "0.1.0";
inline constexpr const char* out_dir_env = "DSHELL_OUT_DIR";

using json = nlohmann::json;

struct RunOptions {
    std::filesystem::path out_dir;
    bool force = false;
    unsigned threads = 1;
    std::uint64_t seed = 0;
};

struct OutputFile {
    std::string name;
    std::string content;
};

struct RunOutcome {
    int exit_code = 0;
    json report;
    json timings;
    std::vector<OutputFile> extra;
};

namespace report {

inline json number(double x) {
    if (x == inf) return "inf";
    if (x == -inf) return "-inf";
    if (std::isnan(x)) return "nan";
    return x;
}

inline json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline json set(const SpectrumSet& s) {
    json iv = json::array();
    for (const auto& i : s.intervals()) iv.push_back(json::array({number(i.lo), number(i.hi)}));
    return {{"intervals", iv}, {"points", s.points()}, {"text", s.to_string()}};
}

inline json sample(const LSSample& s) {
    return {{"id", s.id}, {"point", vec(s.point)}, {"xi", json::array({s.xi1, s.xi2})}, {"mu", s.mu},
            {"abs_det", s.abs_det}};
}

inline json ls(const LSReport& r) {
    json samples = json::array();
    for (const auto& s : r.samples) samples.push_back(sample(s));
    return {{"min_abs_det", r.min_abs_det}, {"argmin", sample(r.argmin)}, {"pass", r.pass},
            {"threshold", r.threshold}, {"samples", samples}};
}

inline json eigen(const GapEigenvalue& e) {
    return {{"energy", e.energy}, {"xi_norm", e.xi_norm}, {"residual", e.residual},
            {"min_singular_value", e.min_singular_value}, {"multiplicity", e.multiplicity},
            {"imag_diagnostic", e.imag_diagnostic}};
}

inline json envelope(const std::string& command, const std::string& config_hash) {
    json j;
    j["tool"] = "dshell";
    j["tool_version"] = tool_version;
    j["command"] = command;
    j["config_hash"] = config_hash.empty() ? json(nullptr) : json(config_hash);
    j["warnings"] = json::array();
    return j;
}

inline std::string form_of(const InteractionMatrix& g) { return g.form_name(); }

inline json params_of(const InteractionMatrix& g) {
    if (auto* d = std::get_if<DiagonalPair>(&g.variant())) return json::array({d->gamma, d->epsilon});
    if (auto* e = std::get_if<ElectrostaticLorentz>(&g.variant())) return json::array({e->eta, e->tau});
    return json::array();
}

} // namespace report

class Stopwatch {
public:
    Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_;
};

// --out wins, then the environment variable, then [output] dir, then ./out.
inline std::filesystem::path resolve_out_dir(const std::string& cli_out, const std::string& config_out) {
    if (!cli_out.empty()) return cli_out;
    if (const char* e = std::getenv(out_dir_env); e && *e) return e;
    if (!config_out.empty()) return config_out;
    return "out";
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Config, "cannot write " + p.string());
    out << text;
}

// Writes <command>_report.json, <command>_timings.json and any extra files.
inline void write_outputs(const std::filesystem::path& dir, const std::string& command, const RunOutcome& r) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorKind::Config, "cannot create output directory " + dir.string());
    write_text(dir / (command + "_report.json"), r.report.dump(2) + "\n");
    write_text(dir / (command + "_timings.json"), r.timings.dump(2) + "\n");
    for (const auto& f : r.extra) write_text(dir / f.name, f.content);
}

// ---------------------------------------------------------------- verify

struct IdentityResult {
    std::string name;
    double max_error = 0.0;
    double tolerance = 0.0;
    std::size_t samples = 0;
    bool pass() const { return max_error <= tolerance; }
};

namespace detail {

inline double mat_err(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

inline IdentityResult check_pauli(const GeneratorSet& g) {
    IdentityResult r{"pauli_relations", 0.0, 0.0, 0};
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
            Mat2 ac = g.sigma[j] * g.sigma[k] + g.sigma[k] * g.sigma[j];
            Mat2 want = (j == k ? 2.0 : 0.0) * Mat2::Identity();
            r.max_error = std::max(r.max_error, mat_err(ac - want));
            ++r.samples;
        }
    // sigma_1 sigma_2 = i sigma_3 and cyclic.
    for (int j = 0; j < 3; ++j) {
        Mat2 p = g.sigma[j] * g.sigma[(j + 1) % 3];
        r.max_error = std::max(r.max_error, mat_err(p - I * g.sigma[(j + 2) % 3]));
        ++r.samples;
    }
    return r;
}

inline IdentityResult check_dirac(const GeneratorSet& g) {
    IdentityResult r{"dirac_anticommutation", 0.0, 0.0, 0};
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
            Mat4 ac = g.alpha[j] * g.alpha[k] + g.alpha[k] * g.alpha[j];
            Mat4 want = (j == k ? 2.0 : 0.0) * Mat4::Identity();
            r.max_error = std::max(r.max_error, mat_err(ac - want));
            ++r.samples;
        }
    return r;
}

} // namespace detail

inline RunOutcome run_verify(const GeneratorSet& g, const RunOptions& opt) {
    Stopwatch sw;
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(-2.0, 2.0);
    const std::size_t n = 1000;
    std::vector<IdentityResult> ids{detail::check_pauli(g), detail::check_dirac(g)};

    auto rand_c2 = [&] { return CVec2(cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng))); };
    auto rand_point = [&](bool with_mu) {
        Vec3 v(nd(rng), nd(rng), with_mu ? nd(rng) : 0.0);
        return Vec3(v / v.norm());
    };

    IdentityResult ortho{"lambda_orthogonality", 0.0, 1e-12, n};
    IdentityResult sq{"lambda_adjoint_and_square", 0.0, 1e-12, n};
    IdentityResult ker{"h_kernel_membership", 0.0, 1e-12, n};
    IdentityResult fac{"symbol_factorization", 0.0, 1e-12, n};
    for (std::size_t i = 0; i < n; ++i) {
        // mu = 0: (Lambda± f1)·conj(Lambda∓ f2) = 0
        Vec3 p0 = rand_point(false);
        CVec2 f1 = rand_c2(), f2 = rand_c2();
        for (Sign s : {Sign::Plus, Sign::Minus}) {
            Sign o = s == Sign::Plus ? Sign::Minus : Sign::Plus;
            cplx dot = (lambda_pm(p0.x(), p0.y(), 0.0, o) * f2).dot(lambda_pm(p0.x(), p0.y(), 0.0, s) * f1);
            ortho.max_error = std::max(ortho.max_error, std::abs(dot) / (f1.norm() * f2.norm()));
        }
        // Lambda±* = Lambda∓, Lambda±² = −mu² I
        Vec3 p = rand_point(true);
        Mat2 lp = lambda_pm(p.x(), p.y(), p.z(), Sign::Plus), lm = lambda_pm(p.x(), p.y(), p.z(), Sign::Minus);
        sq.max_error = std::max({sq.max_error, detail::mat_err(lp.adjoint() - lm),
                                 detail::mat_err(lp * lp + p.z() * p.z() * Mat2::Identity()),
                                 detail::mat_err(lm * lm + p.z() * p.z() * Mat2::Identity())});
        // (alpha'·xi ± i rho alpha3 − i mu) h± = 0 on rho = 1
        HBasis h = h_basis(p.x(), p.y(), p.z());
        for (Sign s : {Sign::Plus, Sign::Minus}) {
            Mat4 m = p.x() * g.alpha[1] + p.y() * g.alpha[2] + sgn(s) * I * g.alpha[3];
            Mat4 op = m - I * p.z() * Mat4::Identity();
            const CVec4& a = s == Sign::Plus ? h.h1p : h.h1m;
            const CVec4& b = s == Sign::Plus ? h.h2p : h.h2m;
            ker.max_error = std::max({ker.max_error, (op * a).norm() / a.norm(), (op * b).norm() / b.norm()});
            Mat4 prod = op * (m + I * p.z() * Mat4::Identity());
            fac.max_error = std::max(fac.max_error, detail::mat_err(prod));
        }
    }
    ids.insert(ids.end(), {ortho, sq, ker, fac});

    // Gram consistency and the diagonal-pair zero locus.
    IdentityResult gram{"gram_consistency", 0.0, 1e-10, 200};
    for (std::size_t i = 0; i < gram.samples; ++i) {
        Vec3 p = rand_point(true);
        InteractionMatrix gm = i % 2 ? InteractionMatrix(DiagonalPair{ud(rng), ud(rng)})
                                     : InteractionMatrix(ElectrostaticLorentz{ud(rng), ud(rng)});
        Mat4 l = ls_matrix(gm, Frame::standard(), p.x(), p.y(), p.z());
        double d2 = std::norm(l.determinant());
        double gd = std::abs((l.adjoint() * l).determinant());
        gram.max_error = std::max(gram.max_error, std::abs(gd - d2) / std::max(d2, 1e-300));
    }
    // The zero set {gamma epsilon = 1} belongs to the mu = 0 symbol; for mu != 0 the
    // term mu² (gamma + epsilon)² keeps |det L| away from zero.
    IdentityResult zero{"diag_pair_zero_locus", 0.0, 1e-12, 20};
    for (std::size_t i = 0; i < zero.samples; ++i) {
        double gam = 0.25 + 3.75 * static_cast<double>(i) / 19.0;
        Vec3 p = rand_point(false);
        zero.max_error = std::max(zero.max_error, ls_abs_det(DiagonalPair{gam, 1.0 / gam}, Frame::standard(), p.x(), p.y(), p.z()));
    }
    ids.insert(ids.end(), {gram, zero});

    // Published closed forms for |det L|² with a diagonal pair, compared with the numeric value.
    struct Tally {
        double all = 0.0, mu0 = 0.0;
    } quad, quart;
    const std::size_t n_forms = 200;
    for (std::size_t i = 0; i < n_forms; ++i) {
        double gam = ud(rng), eps = ud(rng);
        Vec3 p = rand_point(i % 4 != 0);
        double d = ls_abs_det(DiagonalPair{gam, eps}, Frame::standard(), p.x(), p.y(), p.z());
        double d2 = d * d;
        auto cf = closed_form_diag_det(gam, eps, std::hypot(p.x(), p.y()), p.z());
        auto rel = [&](double v) { return std::abs(v - d2) / std::max(d2, 1e-300); };
        quad.all = std::max(quad.all, rel(cf.quadratic));
        quart.all = std::max(quart.all, rel(cf.quartic));
        if (p.z() == 0.0) {
            quad.mu0 = std::max(quad.mu0, rel(cf.quadratic));
            quart.mu0 = std::max(quart.mu0, rel(cf.quartic));
        }
    }
    const double form_tol = 1e-9;
    auto matching = [&](double q, double r4) -> std::string {
        if (q <= form_tol && r4 > form_tol) return "quadratic";
        if (r4 <= form_tol && q > form_tol) return "quartic";
        if (q <= form_tol && r4 <= form_tol) return "both";
        return "none";
    };

    RunOutcome out;
    out.report = report::envelope("verify", "");
    json list = json::array();
    bool ok = true;
    std::vector<std::string> failed;
    for (const auto& r : ids) {
        list.push_back({{"name", r.name}, {"max_error", r.max_error}, {"tolerance", r.tolerance},
                        {"samples", r.samples}, {"pass", r.pass()}});
        if (!r.pass()) {
            ok = false;
            failed.push_back(r.name);
        }
    }
    std::string match_all = matching(quad.all, quart.all), match_mu0 = matching(quad.mu0, quart.mu0);
    json forms = {
        {"samples", n_forms},
        {"tolerance", form_tol},
        {"quadratic", {{"formula", "16 |xi|^8 (1 - gamma epsilon)^2"}, {"max_rel_error", quad.all}, {"max_rel_error_mu0", quad.mu0}}},
        {"quartic", {{"formula", "16 rho^8 (1 - gamma epsilon)^4"}, {"max_rel_error", quart.all}, {"max_rel_error_mu0", quart.mu0}}},
        {"matching_form", match_all},
        {"matching_form_mu0", match_mu0},
    };
    out.report["results"] = {{"identities", list}, {"closed_forms", forms}, {"failed", failed}, {"pass", ok}};
    if (match_all != "quadratic" && match_all != "quartic")
        out.report["warnings"].push_back("closed-form discrepancy: no published form matches |det L|^2 on all samples (matching form: " +
                                         match_all + "; at mu = 0: " + match_mu0 + ")");
    if (quad.mu0 > form_tol)
        out.report["warnings"].push_back("closed-form discrepancy: the quadratic form misses |det L|^2 at mu = 0 (max relative error " +
                                         std::to_string(quad.mu0) + ")");
    out.timings = {{"command", "verify"}, {"seconds", sw.seconds()}};
    out.exit_code = ok ? 0 : exit_code(ErrorKind::Identity);
    return out;
}

// ---------------------------------------------------------------- check-ls

struct LSBundle {
    LSReport local, uniform, parameter;
    std::optional<LSReport> uniform_infinity, parameter_infinity;
    bool hermitian = true;
    std::optional<double> el_margin;
    bool parameter_pass() const { return parameter.pass && (!parameter_infinity || parameter_infinity->pass); }
};

namespace detail {

inline double jitter_phase(const ProblemConfig& c, std::uint64_t seed) {
    if (!c.solver.jitter) return 0.0;
    std::mt19937_64 rng(seed);
    return std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
}

// Frames and Gamma limits at the Sigma_infinity directions of a conic surface.
inline LSReport at_infinity(const ProblemConfig& c, bool param, double phase) {
    LSReport r;
    r.threshold = c.solver.ls_threshold;
    auto grid = param ? sphere_grid(c.solver.n_param, phase) : circle_grid(c.solver.n_xi, phase);
    std::size_t id = 0;
    for (const auto& d : c.surface.infinity_directions(c.solver.n_directions)) {
        if (!d.on_sigma_infinity) continue;
        Frame f{d.omega, d.normal_at_infinity.cross(d.omega), d.normal_at_infinity};
        LSSample s = min_over(c.gamma.limit(d.omega), f, grid);
        s.id = id++;
        s.point = d.omega;
        r.samples.push_back(s);
    }
    finish(r);
    return r;
}

} // namespace detail

inline LSBundle ls_bundle(const ProblemConfig& c, std::uint64_t seed) {
    const auto& s = c.solver;
    double phase = detail::jitter_phase(c, seed);
    LSBundle b;
    auto samples = c.surface.sample(s.n_surface);
    b.local = ls_check_local(c.gamma.at(samples.front()), samples.front().frame, s.n_xi, s.ls_threshold, phase);
    b.uniform = ls_check_uniform(c.surface, c.gamma, s.n_surface, s.n_xi, s.ls_threshold, phase);
    b.parameter = ls_check_param_uniform(c.surface, c.gamma, s.n_surface, s.n_param, s.ls_threshold, phase);
    if (c.surface.is_conic_at_infinity()) {
        b.uniform_infinity = detail::at_infinity(c, false, phase);
        b.parameter_infinity = detail::at_infinity(c, true, phase);
    }
    b.hermitian = hermitian_check(c.gamma, c.surface, s.n_surface);
    if (c.gamma.form() == GammaField::Form::ElectrostaticLorentz) {
        double mm = inf;
        auto margin = [](const InteractionMatrix& g) {
            auto& e = std::get<ElectrostaticLorentz>(g.variant());
            return electrostatic_lorentz_margin(e.eta, e.tau);
        };
        for (const auto& x : samples) mm = std::min(mm, margin(c.gamma.at(x)));
        if (c.surface.is_conic_at_infinity()) mm = std::min(mm, margin(c.gamma.limit(Vec3::UnitX())));
        b.el_margin = mm;
    }
    return b;
}

inline json ls_bundle_json(const LSBundle& b) {
    json j;
    j["local"] = report::ls(b.local);
    j["uniform"] = report::ls(b.uniform);
    j["parameter"] = report::ls(b.parameter);
    if (b.uniform_infinity) j["uniform_at_infinity"] = report::ls(*b.uniform_infinity);
    if (b.parameter_infinity) j["parameter_at_infinity"] = report::ls(*b.parameter_infinity);
    j["hermitian"] = b.hermitian;
    if (b.el_margin) j["electrostatic_lorentz_margin"] = *b.el_margin;
    bool sa = b.hermitian && b.parameter_pass();
    j["self_adjointness"] = {
        {"hermitian_gamma", b.hermitian ? "pass" : "fail"},
        {"parameter_dependent_ls", b.parameter_pass() ? "pass" : "fail"},
        {"verdict", sa ? "established" : "criterion not established"},
    };
    return j;
}

inline RunOutcome run_check_ls(const ProblemConfig& c, const RunOptions& opt) {
    Stopwatch sw;
    RunOutcome out;
    out.report = report::envelope("check-ls", hex64(fnv1a64(c.canonical)));
    LSBundle b = ls_bundle(c, opt.seed);
    out.report["results"] = ls_bundle_json(b);
    out.report["results"]["surface"] = c.surface.kind();
    out.report["results"]["interaction"] = c.gamma_form;
    if (!b.hermitian) out.report["warnings"].push_back("Gamma is not Hermitian on the surface samples");
    out.timings = {{"command", "check-ls"}, {"seconds", sw.seconds()}};
    return out;
}

// ---------------------------------------------------------------- spectrum / dispersion

inline std::vector<double> xi_grid_of(const ProblemConfig& c) {
    double top = c.solver.xi_max ? *c.solver.xi_max : 3.0 * (std::abs(c.mass) + 1.0);
    std::vector<double> g;
    for (std::size_t k = 0; k < c.solver.xi_points; ++k)
        g.push_back(top * static_cast<double>(k) / static_cast<double>(c.solver.xi_points - 1));
    return g;
}

inline GapSearchOptions gap_options(const ProblemConfig& c) {
    GapSearchOptions o;
    o.n_scan = c.solver.scan_points;
    o.tol = c.solver.refine_tol;
    return o;
}

inline std::string csv_number(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

inline RunOutcome run_spectrum(const ProblemConfig& c, const RunOptions& opt) {
    Stopwatch sw;
    RunOutcome out;
    out.report = report::envelope("spectrum", hex64(fnv1a64(c.canonical)));
    LSBundle b = ls_bundle(c, opt.seed);
    bool gate = b.hermitian && b.parameter_pass();
    if (!gate && !opt.force)
        fail(ErrorKind::Config,
             "LS gate: the parameter-dependent LS or Hermitian condition fails for this configuration; rerun with --force to compute anyway");
    if (!gate) out.report["warnings"].push_back("LS gate failed and was overridden with --force");
    double t_ls = sw.seconds();

    auto pl = partial_limits(c.potential);
    auto descriptors = enumerate_limits(c.surface, c.potential, c.gamma, {c.solver.n_directions, c.solver.phi_samples});
    SpectrumOptions so;
    so.gap = gap_options(c);
    so.threads = opt.threads;
    auto xi = xi_grid_of(c);
    auto es = essential_spectrum(descriptors, c.mass, xi, so);

    json j;
    j["ls_gate"] = {{"passed", gate}, {"forced", !gate && opt.force}};
    j["partial_limits"] = {{"m_inf", pl.m_inf}, {"m_sup", pl.m_sup}, {"empirical_min", pl.empirical_min},
                           {"empirical_max", pl.empirical_max}, {"empirical_matches", pl.empirical_matches}};
    std::size_t ns = 0;
    json phis = json::array();
    for (const auto& d : descriptors)
        if (auto* n = std::get_if<NonShell>(&d)) {
            ++ns;
            phis.push_back(n->phi_h);
        }
    j["descriptors"] = {{"non_shell", ns}, {"shell", es.shell_descriptors}, {"non_shell_phi", phis}};
    j["mass"] = c.mass;
    j["xi_grid"] = xi;
    j["essential_spectrum"] = {{"rays", report::set(es.rays)}, {"sampled", report::set(es.sampled)},
                               {"closure", report::set(es.closure)}};
    std::vector<double> gap_points = es.sampled.points();
    json branches = json::array();
    std::string csv = "xi_norm,branch_id,energy\n";
    for (const auto& br : es.branches) {
        branches.push_back({{"descriptor", br.descriptor}, {"branch_id", br.branch_id},
                            {"hull", json::array({br.hull.lo, br.hull.hi})}, {"n_points", br.points.size()}});
        for (auto [x, e] : br.points) csv += csv_number(x) + "," + std::to_string(br.branch_id) + "," + csv_number(e) + "\n";
    }
    j["shell"] = {{"contribution_empty", es.shell_contribution_empty()}, {"branches", branches}, {"gap_points", gap_points}};
    json prov = json::array();
    for (const auto& p : es.provenance)
        prov.push_back({{"kind", p.kind}, {"descriptor", p.descriptor}, {"branch", p.branch}, {"xi_norm", p.xi_norm},
                        {"range", json::array({report::number(p.range.lo), report::number(p.range.hi)})}});
    j["provenance"] = prov;
    out.report["results"] = j;
    if (!pl.empirical_matches)
        out.report["warnings"].push_back("ray sampling of the potential does not reproduce the declared partial limits within 1e-2");
    if (!(es.sampled == es.closure))
        out.report["warnings"].push_back("sampled union of shell eigenvalues differs from its interval closure; both are reported");
    out.extra.push_back({"spectrum_dispersion.csv", csv});
    out.timings = {{"command", "spectrum"}, {"seconds", sw.seconds()}, {"ls_gate_seconds", t_ls}};
    return out;
}

inline RunOutcome run_dispersion(const ProblemConfig& c, const RunOptions& opt) {
    Stopwatch sw;
    RunOutcome out;
    out.report = report::envelope("dispersion", hex64(fnv1a64(c.canonical)));
    double phi;
    if (c.dispersion.phi) phi = *c.dispersion.phi;
    else {
        Interval iv = declared_limit_set(c.potential.phi);
        phi = 0.5 * (iv.lo + iv.hi);
    }
    InteractionMatrix g = c.gamma.limit(Vec3::UnitX());
    auto xi = xi_grid_of(c);
    auto rows = dispersion_curve(g, c.mass, phi, xi, gap_options(c), Frame::standard(), opt.threads);
    auto branches = detail::link_branches(rows, SpectrumOptions{}.branch_factor);
    std::string csv = "xi_norm,branch_id,energy\n";
    for (std::size_t b = 0; b < branches.size(); ++b)
        for (auto [x, e] : branches[b]) csv += csv_number(x) + "," + std::to_string(b) + "," + csv_number(e) + "\n";
    json jr = json::array();
    bool imag_ok = true;
    for (const auto& r : rows) {
        json ev = json::array();
        for (const auto& e : r.eigenvalues) {
            ev.push_back(report::eigen(e));
            if (e.imag_diagnostic > 1e-10) imag_ok = false;
        }
        jr.push_back({{"xi_norm", r.xi_norm}, {"gap_halfwidth", std::hypot(r.xi_norm, c.mass)}, {"eigenvalues", ev}});
    }
    out.report["results"] = {{"interaction", c.gamma_form}, {"hermitian", g.hermitian()}, {"mass", c.mass},
                             {"phi", phi}, {"rows", jr}, {"branches", branches.size()}};
    if (g.hermitian() && !imag_ok)
        out.report["warnings"].push_back("imaginary diagnostic above 1e-10 for a Hermitian coupling");
    out.extra.push_back({"dispersion.csv", csv});
    out.timings = {{"command", "dispersion"}, {"seconds", sw.seconds()}};
    return out;
}

// ---------------------------------------------------------------- oracle

// |a − b| within 1e-3 relative to the reference, floored at 1e-2 of the gap half width.
inline bool eigen_match(double a, double ref, double gap) {
    return std::abs(a - ref) <= 1e-3 * std::max(std::abs(ref), 1e-2 * gap);
}

inline bool eigen_sets_match(const std::vector<double>& a, const std::vector<double>& ref, double gap) {
    if (a.size() != ref.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!eigen_match(a[i], ref[i], gap)) return false;
    return true;
}

struct BatteryResult {
    BatteryCase c;
    std::vector<double> dispersion;
    FDResult fd;
    bool agree = false;
    double seconds = 0.0;
};

inline BatteryResult run_battery_case(const BatteryCase& bc, const OracleConfig& oc) {
    Stopwatch sw;
    BatteryResult r;
    r.c = bc;
    auto sym = make_reduced_symbol(bc.gamma, bc.xi, 0.0, bc.m, bc.phi);
    for (const auto& e : gap_eigenvalues(sym)) r.dispersion.push_back(e.energy);
    FDOptions fo;
    fo.target_h = oc.target_h;
    if (oc.half_length) {
        int n = std::max(100, static_cast<int>(std::ceil(*oc.half_length / oc.target_h))) * oc.n_scale;
        r.fd = gap_eigenvalues_fd(sym, FDGrid{*oc.half_length, n}, fo);
    } else if (oc.n_scale != 1) {
        auto base = gap_eigenvalues_fd_auto(sym, fo);
        r.fd = gap_eigenvalues_fd(sym, FDGrid{base.grid.half_length, base.grid.points_per_side * oc.n_scale}, fo);
    } else {
        r.fd = gap_eigenvalues_fd_auto(sym, fo);
    }
    r.agree = eigen_sets_match(r.dispersion, r.fd.eigenvalues, sym.gap_halfwidth());
    r.seconds = sw.seconds();
    return r;
}

inline std::vector<BatteryResult> run_battery(const OracleConfig& oc, unsigned threads) {
    std::vector<BatteryResult> res(oc.cases.size());
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(res.size())));
    std::vector<std::exception_ptr> errors(threads);
    auto work = [&](unsigned t) {
        try {
            for (std::size_t i = t; i < res.size(); i += threads) res[i] = run_battery_case(oc.cases[i], oc);
        } catch (...) {
            errors[t] = std::current_exception();
        }
    };
    if (threads == 1) work(0);
    else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return res;
}

inline json battery_json(const std::vector<BatteryResult>& res) {
    json cases = json::array();
    for (const auto& r : res) {
        cases.push_back({{"id", r.c.id}, {"form", report::form_of(r.c.gamma)}, {"params", report::params_of(r.c.gamma)},
                         {"xi", r.c.xi}, {"m", r.c.m}, {"phi", r.c.phi},
                         {"grid", {{"half_length", r.fd.grid.half_length}, {"points_per_side", r.fd.grid.points_per_side},
                                   {"h", r.fd.grid.h()}}},
                         {"eigenvalues", r.fd.eigenvalues}, {"reliable", r.fd.reliable}});
    }
    return {{"schema_version", 1}, {"cases", cases}};
}

inline RunOutcome run_oracle(const ProblemConfig& c, const RunOptions& opt) {
    Stopwatch sw;
    RunOutcome out;
    out.report = report::envelope("oracle", hex64(fnv1a64(c.canonical)));
    auto res = run_battery(c.oracle, opt.threads);

    std::filesystem::path ref = c.oracle.reference;
    if (ref.is_relative()) ref = c.base_dir / ref;
    std::optional<json> committed;
    if (std::ifstream in(ref); in) {
        try {
            committed = json::parse(in);
        } catch (const json::exception& e) {
            fail(ErrorKind::Config, "cannot parse reference " + ref.string() + ": " + e.what());
        }
    } else {
        out.report["warnings"].push_back("no committed reference at " + ref.string() + "; drift not checked");
    }

    bool drift = false, disagree = false;
    json cases = json::array();
    json timing = json::object();
    for (const auto& r : res) {
        double gap = std::hypot(r.c.xi, r.c.m);
        json jc = {{"id", r.c.id}, {"dispersion", r.dispersion}, {"fd", r.fd.eigenvalues}, {"agree", r.agree},
                   {"reliable", r.fd.reliable}, {"grid", {{"half_length", r.fd.grid.half_length}, {"points_per_side", r.fd.grid.points_per_side}}},
                   {"constraint_condition", r.fd.constraint_condition}};
        json rej = json::array();
        for (const auto& e : r.fd.rejected)
            rej.push_back({{"value", e.value.real()}, {"localization", e.localization}, {"smoothness", e.smoothness}});
        jc["fd_rejected"] = rej;
        for (const auto& w : r.fd.warnings) out.report["warnings"].push_back(r.c.id + ": " + w + "; case marked unreliable");
        if (!r.agree) {
            disagree = true;
            out.report["warnings"].push_back(r.c.id + ": dispersion and FD eigenvalue sets differ");
        }
        if (committed) {
            const json* match = nullptr;
            for (const auto& cc : (*committed)["cases"])
                if (cc["id"] == r.c.id) match = &cc;
            if (!match) {
                jc["drift"] = nullptr;
                out.report["warnings"].push_back(r.c.id + ": not in the committed reference");
            } else {
                auto refv = (*match)["eigenvalues"].get<std::vector<double>>();
                double worst = 0.0;
                bool same = refv.size() == r.fd.eigenvalues.size();
                for (std::size_t i = 0; same && i < refv.size(); ++i)
                    worst = std::max(worst, std::abs(refv[i] - r.fd.eigenvalues[i]) / std::max(std::abs(refv[i]), 1e-2 * gap));
                jc["drift"] = same ? json(worst) : json("count mismatch");
                if (!same || worst > 1e-3) {
                    drift = true;
                    out.report["warnings"].push_back(r.c.id + ": drift beyond 1e-3 relative against the committed reference");
                }
            }
        }
        cases.push_back(jc);
        timing[r.c.id] = r.seconds;
    }
    out.report["results"] = {{"cases", cases}, {"drift", drift}, {"agreement", !disagree}};
    out.extra.push_back({"fd_battery.json", battery_json(res).dump(2) + "\n"});
    out.timings = {{"command", "oracle"}, {"seconds", sw.seconds()}, {"cases", timing}};
    out.exit_code = drift ? exit_code(ErrorKind::Drift) : disagree ? exit_code(ErrorKind::Solver) : 0;
    return out;
}

} // namespace dshell
