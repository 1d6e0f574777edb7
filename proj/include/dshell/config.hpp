#pragma once

#include <toml.hpp>

#include <cstdint>
#include <fstream>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "limitops.hpp"
#include "shell_symbol.hpp"
#include "surfaces.hpp"

namespace dshell {

inline constexpr int config_schema_version = 1;

struct BatteryCase {
    std::string id;
    InteractionMatrix gamma;
    double xi = 0.0;
    double m = 1.0;
    double phi = 0.0;
};

// Cases spanning both coupling families, |xi'| in {0, 0.5, 1, 2} and m in {0.5, 1},
// plus two free-transmission controls.
inline std::vector<BatteryCase> default_battery() {
    return {
        {"el_1_0_xi0_m1", ElectrostaticLorentz{1.0, 0.0}, 0.0, 1.0, 0.0},
        {"el_1_0_xi0.5_m1", ElectrostaticLorentz{1.0, 0.0}, 0.5, 1.0, 0.0},
        {"el_1_0.5_xi1_m1", ElectrostaticLorentz{1.0, 0.5}, 1.0, 1.0, 0.0},
        {"el_3_0_xi0_m0.5", ElectrostaticLorentz{3.0, 0.0}, 0.0, 0.5, 0.0},
        {"el_-1_0.5_xi2_m0.5", ElectrostaticLorentz{-1.0, 0.5}, 2.0, 0.5, 0.0},
        {"el_1.5_-0.5_xi0.5_m0.5_phi0.3", ElectrostaticLorentz{1.5, -0.5}, 0.5, 0.5, 0.3},
        {"dp_0.5_-0.3_xi0.5_m1", DiagonalPair{0.5, -0.3}, 0.5, 1.0, 0.0},
        {"dp_1.5_0.2_xi1_m0.5", DiagonalPair{1.5, 0.2}, 1.0, 0.5, 0.0},
        {"dp_2_-1_xi0_m0.5", DiagonalPair{2.0, -1.0}, 0.0, 0.5, 0.0},
        {"dp_-0.7_0.4_xi2_m1", DiagonalPair{-0.7, 0.4}, 2.0, 1.0, 0.0},
        {"free_xi0.5_m1", DiagonalPair{0.0, 0.0}, 0.5, 1.0, 0.0},
        {"free_xi0_m0.5", DiagonalPair{0.0, 0.0}, 0.0, 0.5, 0.0},
    };
}

struct SolverConfig {
    double ls_threshold = default_ls_threshold;
    std::size_t n_xi = 64;
    std::size_t n_param = 256;
    std::size_t n_surface = 64;
    int scan_points = 512;
    double refine_tol = 1e-10;
    std::size_t n_directions = 64;
    std::size_t phi_samples = 9;
    std::size_t xi_points = 33;
    std::optional<double> xi_max;
    bool jitter = false;
};

struct OracleConfig {
    std::string reference = "data/fd_battery.json";
    std::optional<double> half_length;
    int n_scale = 1; // multiplies the automatically chosen points per side
    double target_h = 0.1;
    std::vector<BatteryCase> cases = default_battery();
};

struct DispersionConfig {
    std::optional<double> phi;
};

struct ProblemConfig {
    SurfaceModel surface{Sphere{1.0}};
    GammaField gamma = GammaField::constant(DiagonalPair{});
    std::string gamma_form = "diagonal_pair";
    PotentialModel potential;
    double mass = 1.0;
    SolverConfig solver;
    OracleConfig oracle;
    DispersionConfig dispersion;
    std::string output_dir;
    std::filesystem::path base_dir; // directory of the config file
    std::string canonical;          // normalized text used for hashing
};

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << v;
    return os.str();
}

namespace cfg {

[[noreturn]] inline void bad(const std::string& where, const std::string& what) {
    fail(ErrorKind::Config, where + ": " + what);
}

inline void allow_keys(const toml::table& t, const std::string& where, std::set<std::string> keys) {
    for (auto&& [k, v] : t)
        if (!keys.count(std::string(k.str()))) bad(where, "unknown key '" + std::string(k.str()) + "'");
}

inline const toml::table* sub(const toml::table& t, const std::string& key, const std::string& where, bool required) {
    auto* n = t.get(key);
    if (!n) {
        if (required) bad(where, "missing table [" + key + "]");
        return nullptr;
    }
    auto* tb = n->as_table();
    if (!tb) bad(where, "'" + key + "' must be a table");
    return tb;
}

inline std::optional<double> opt_num(const toml::table& t, const std::string& key, const std::string& where) {
    auto* n = t.get(key);
    if (!n) return std::nullopt;
    if (auto v = n->value<double>()) {
        if (!std::isfinite(*v)) bad(where, "'" + key + "' must be finite");
        return *v;
    }
    bad(where, "'" + key + "' must be a number");
}

inline double num(const toml::table& t, const std::string& key, const std::string& where, std::optional<double> def = {}) {
    if (auto v = opt_num(t, key, where)) return *v;
    if (def) return *def;
    bad(where, "missing '" + key + "'");
}

inline std::size_t count(const toml::table& t, const std::string& key, const std::string& where, std::size_t def,
                         std::size_t min = 1) {
    auto* n = t.get(key);
    if (!n) return def;
    auto v = n->value<int64_t>();
    if (!v || *v < static_cast<int64_t>(min)) bad(where, "'" + key + "' must be an integer >= " + std::to_string(min));
    return static_cast<std::size_t>(*v);
}

inline std::string str(const toml::table& t, const std::string& key, const std::string& where,
                       std::optional<std::string> def = {}) {
    auto* n = t.get(key);
    if (!n) {
        if (def) return *def;
        bad(where, "missing '" + key + "'");
    }
    auto v = n->value<std::string>();
    if (!v) bad(where, "'" + key + "' must be a string");
    return *v;
}

inline bool flag(const toml::table& t, const std::string& key, const std::string& where, bool def) {
    auto* n = t.get(key);
    if (!n) return def;
    auto v = n->value<bool>();
    if (!v) bad(where, "'" + key + "' must be a boolean");
    return *v;
}

inline Vec3 vec3(const toml::node& n, const std::string& where) {
    auto* a = n.as_array();
    if (!a || a->size() != 3) bad(where, "expected an array of 3 numbers");
    Vec3 v;
    for (int i = 0; i < 3; ++i) {
        auto x = (*a)[static_cast<std::size_t>(i)].value<double>();
        if (!x || !std::isfinite(*x)) bad(where, "expected an array of 3 numbers");
        v(i) = *x;
    }
    return v;
}

inline Vec3 vec3(const toml::table& t, const std::string& key, const std::string& where, std::optional<Vec3> def = {}) {
    auto* n = t.get(key);
    if (!n) {
        if (def) return *def;
        bad(where, "missing '" + key + "'");
    }
    return vec3(*n, where + "." + key);
}

inline std::vector<Vec3> vec3_list(const toml::table& t, const std::string& key, const std::string& where) {
    auto* a = t.get(key) ? t.get(key)->as_array() : nullptr;
    if (!a) bad(where, "'" + key + "' must be an array of 3-vectors");
    std::vector<Vec3> out;
    for (auto&& n : *a) out.push_back(vec3(n, where + "." + key));
    return out;
}

inline Vec3 unit(const Vec3& v, const std::string& where) {
    if (!(v.norm() > 0)) bad(where, "vector must be nonzero");
    return v.normalized();
}

// A number, or a table {base, amplitude, rate} for base + amplitude·exp(−rate |s|).
inline Coefficient coefficient(const toml::table& t, const std::string& key, const std::string& where) {
    auto* n = t.get(key);
    if (!n) bad(where, "missing '" + key + "'");
    if (auto v = n->value<double>()) {
        if (!std::isfinite(*v)) bad(where, "'" + key + "' must be finite");
        return {*v, 0.0, 0.0};
    }
    auto* tb = n->as_table();
    if (!tb) bad(where, "'" + key + "' must be a number or a coefficient table");
    std::string w = where + "." + key;
    allow_keys(*tb, w, {"base", "amplitude", "rate"});
    Coefficient c{num(*tb, "base", w), num(*tb, "amplitude", w, 0.0), num(*tb, "rate", w, 0.0)};
    if (c.rate < 0) bad(w, "rate must be nonnegative");
    return c;
}

inline SurfaceModel surface(const toml::table& t) {
    const std::string w = "surface";
    std::string kind = str(t, "kind", w);
    RadialSampling rs{num(t, "r_max", w, 1e3), static_cast<int>(count(t, "n_radii", w, 12))};
    if (!(rs.r_max > 1.0)) bad(w, "r_max must exceed 1");
    try {
        if (kind == "sphere") {
            allow_keys(t, w, {"kind", "radius", "r_max", "n_radii"});
            return SurfaceModel(Sphere{num(t, "radius", w, 1.0)}, rs);
        }
        if (kind == "plane") {
            allow_keys(t, w, {"kind", "normal", "offset", "r_max", "n_radii"});
            return SurfaceModel(Plane{unit(vec3(t, "normal", w, Vec3::UnitZ()), w), num(t, "offset", w, 0.0)}, rs);
        }
        if (kind == "cone") {
            allow_keys(t, w, {"kind", "axis", "half_angle", "apex_radius", "r_max", "n_radii"});
            return SurfaceModel(Cone{unit(vec3(t, "axis", w, Vec3::UnitZ()), w), num(t, "half_angle", w),
                                     num(t, "apex_radius", w, 0.0)},
                                rs);
        }
        if (kind == "grid") {
            allow_keys(t, w, {"kind", "points", "normals", "uniformly_regular", "r_max", "n_radii"});
            return SurfaceModel(ParametricGrid{vec3_list(t, "points", w), vec3_list(t, "normals", w),
                                               flag(t, "uniformly_regular", w, false)},
                                rs);
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Domain) bad(w, e.what());
        throw;
    }
    bad(w, "unknown kind '" + kind + "'");
}

inline Mat4 matrix4(const toml::table& t, const std::string& key, const std::string& where) {
    Mat4 m = Mat4::Zero();
    auto* n = t.get(key);
    if (!n) return m;
    auto* rows = n->as_array();
    if (!rows || rows->size() != 4) bad(where, "'" + key + "' must be a 4x4 array");
    for (std::size_t i = 0; i < 4; ++i) {
        auto* row = (*rows)[i].as_array();
        if (!row || row->size() != 4) bad(where, "'" + key + "' must be a 4x4 array");
        for (std::size_t j = 0; j < 4; ++j) {
            auto v = (*row)[j].value<double>();
            if (!v || !std::isfinite(*v)) bad(where, "'" + key + "' entries must be finite numbers");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *v;
        }
    }
    return m;
}

inline std::pair<GammaField, std::string> interaction(const toml::table& t) {
    const std::string w = "interaction";
    std::string form = str(t, "form", w);
    if (form == "diagonal_pair") {
        allow_keys(t, w, {"form", "gamma", "epsilon"});
        return {GammaField::diagonal_pair(coefficient(t, "gamma", w), coefficient(t, "epsilon", w)), form};
    }
    if (form == "electrostatic_lorentz") {
        allow_keys(t, w, {"form", "eta", "tau"});
        return {GammaField::electrostatic_lorentz(coefficient(t, "eta", w), coefficient(t, "tau", w)), form};
    }
    if (form == "general") {
        allow_keys(t, w, {"form", "real", "imag"});
        Mat4 g = matrix4(t, "real", w).real().cast<cplx>() + I * matrix4(t, "imag", w).real().cast<cplx>();
        return {GammaField::constant(GeneralCoupling{g}), form};
    }
    bad(w, "unknown form '" + form + "'");
}

inline ScalarField scalar_field(const toml::table& t, const std::string& w) {
    std::string kind = str(t, "kind", w);
    ScalarField f;
    if (kind == "constant") {
        allow_keys(t, w, {"kind", "value", "magnetic"});
        f = ConstantField{num(t, "value", w, 0.0)};
    } else if (kind == "radial_so") {
        allow_keys(t, w, {"kind", "base", "amplitude", "profile", "magnetic"});
        std::string p = str(t, "profile", w, std::string("sin_log"));
        RadialSO r{num(t, "base", w, 0.0), num(t, "amplitude", w, 1.0), RadialSO::Profile::SinLog};
        if (p == "sin_sqrt") r.profile = RadialSO::Profile::SinSqrt;
        else if (p != "sin_log") bad(w, "unknown profile '" + p + "'");
        f = r;
    } else if (kind == "directional_so") {
        allow_keys(t, w, {"kind", "directions", "values", "magnetic"});
        DirectionalSO d;
        for (const auto& v : vec3_list(t, "directions", w)) d.directions.push_back(unit(v, w));
        auto* a = t.get("values") ? t.get("values")->as_array() : nullptr;
        if (!a) bad(w, "'values' must be an array of numbers");
        for (auto&& n : *a) {
            auto v = n.value<double>();
            if (!v || !std::isfinite(*v)) bad(w, "'values' must be finite numbers");
            d.values.push_back(*v);
        }
        f = d;
    } else {
        bad(w, "unknown kind '" + kind + "'");
    }
    validate_field(f);
    return f;
}

inline PotentialModel potential(const toml::table& t) {
    PotentialModel p;
    p.phi = scalar_field(t, "potential");
    if (auto* m = t.get("magnetic")) {
        auto* a = m->as_array();
        if (!a || a->size() != 3) bad("potential.magnetic", "expected an array of 3 field tables");
        for (std::size_t i = 0; i < 3; ++i) {
            auto* tb = (*a)[i].as_table();
            if (!tb) bad("potential.magnetic", "expected an array of 3 field tables");
            p.magnetic[i] = scalar_field(*tb, "potential.magnetic[" + std::to_string(i) + "]");
        }
    }
    return p;
}

inline BatteryCase battery_case(const toml::table& t, const std::string& w) {
    allow_keys(t, w, {"id", "form", "p1", "p2", "xi", "m", "phi"});
    BatteryCase c;
    c.id = str(t, "id", w);
    std::string form = str(t, "form", w);
    double p1 = num(t, "p1", w), p2 = num(t, "p2", w);
    if (form == "diagonal_pair") c.gamma = DiagonalPair{p1, p2};
    else if (form == "electrostatic_lorentz") c.gamma = ElectrostaticLorentz{p1, p2};
    else bad(w, "unknown form '" + form + "'");
    c.xi = num(t, "xi", w);
    c.m = num(t, "m", w);
    c.phi = num(t, "phi", w, 0.0);
    if (c.xi < 0) bad(w, "xi must be nonnegative");
    return c;
}

} // namespace cfg

inline ProblemConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {}) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << e.description() << " at line " << e.source().begin.line;
        fail(ErrorKind::Config, "TOML parse error: " + os.str());
    }
    ProblemConfig c;
    c.base_dir = base_dir;
    cfg::allow_keys(root, "config",
                    {"schema_version", "mass", "surface", "interaction", "potential", "solver", "oracle", "dispersion",
                     "output"});
    auto ver = root["schema_version"].value<int64_t>();
    if (!ver) cfg::bad("config", "missing 'schema_version'");
    if (*ver != config_schema_version)
        cfg::bad("config", "unsupported schema_version " + std::to_string(*ver));
    c.mass = cfg::num(root, "mass", "config", 1.0);

    if (auto* s = cfg::sub(root, "surface", "config", false)) c.surface = cfg::surface(*s);
    if (auto* g = cfg::sub(root, "interaction", "config", false)) std::tie(c.gamma, c.gamma_form) = cfg::interaction(*g);
    if (auto* p = cfg::sub(root, "potential", "config", false)) c.potential = cfg::potential(*p);

    if (auto* s = cfg::sub(root, "solver", "config", false)) {
        const std::string w = "solver";
        cfg::allow_keys(*s, w,
                        {"ls_threshold", "n_xi", "n_param", "n_surface", "scan_points", "refine_tol", "n_directions",
                         "phi_samples", "xi_points", "xi_max", "jitter"});
        auto& v = c.solver;
        v.ls_threshold = cfg::num(*s, "ls_threshold", w, v.ls_threshold);
        v.n_xi = cfg::count(*s, "n_xi", w, v.n_xi, 4);
        v.n_param = cfg::count(*s, "n_param", w, v.n_param, 8);
        v.n_surface = cfg::count(*s, "n_surface", w, v.n_surface);
        v.scan_points = static_cast<int>(cfg::count(*s, "scan_points", w, static_cast<std::size_t>(v.scan_points), 16));
        v.refine_tol = cfg::num(*s, "refine_tol", w, v.refine_tol);
        v.n_directions = cfg::count(*s, "n_directions", w, v.n_directions);
        v.phi_samples = cfg::count(*s, "phi_samples", w, v.phi_samples);
        v.xi_points = cfg::count(*s, "xi_points", w, v.xi_points, 2);
        v.xi_max = cfg::opt_num(*s, "xi_max", w);
        v.jitter = cfg::flag(*s, "jitter", w, false);
        if (!(v.ls_threshold > 0)) cfg::bad(w, "ls_threshold must be positive");
        if (!(v.refine_tol > 0)) cfg::bad(w, "refine_tol must be positive");
        if (v.xi_max && !(*v.xi_max > 0)) cfg::bad(w, "xi_max must be positive");
    }
    if (auto* o = cfg::sub(root, "oracle", "config", false)) {
        const std::string w = "oracle";
        cfg::allow_keys(*o, w, {"reference", "half_length", "n_scale", "target_h", "cases"});
        auto& v = c.oracle;
        v.reference = cfg::str(*o, "reference", w, v.reference);
        v.half_length = cfg::opt_num(*o, "half_length", w);
        v.n_scale = static_cast<int>(cfg::count(*o, "n_scale", w, 1));
        v.target_h = cfg::num(*o, "target_h", w, v.target_h);
        if (v.half_length && !(*v.half_length > 0)) cfg::bad(w, "half_length must be positive");
        if (!(v.target_h > 0)) cfg::bad(w, "target_h must be positive");
        if (auto* cs = o->get("cases")) {
            auto* arr = cs->as_array();
            if (!arr || arr->empty()) cfg::bad(w, "'cases' must be a nonempty array of tables");
            v.cases.clear();
            std::size_t i = 0;
            for (auto&& n : *arr) {
                auto* tb = n.as_table();
                if (!tb) cfg::bad(w, "'cases' must be an array of tables");
                v.cases.push_back(cfg::battery_case(*tb, w + ".cases[" + std::to_string(i++) + "]"));
            }
        }
    }
    if (auto* d = cfg::sub(root, "dispersion", "config", false)) {
        cfg::allow_keys(*d, "dispersion", {"phi"});
        c.dispersion.phi = cfg::opt_num(*d, "phi", "dispersion");
    }
    if (auto* o = cfg::sub(root, "output", "config", false)) {
        cfg::allow_keys(*o, "output", {"dir"});
        c.output_dir = cfg::str(*o, "dir", "output", std::string());
    }
    std::ostringstream os;
    os << toml::toml_formatter{root};
    c.canonical = os.str();
    return c;
}

inline ProblemConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Config, "cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

} // namespace dshell
