#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "interaction.hpp"

namespace dshell {

struct Sphere {
    double radius = 1.0;
};

struct Plane {
    Vec3 normal = Vec3::UnitZ();
    double offset = 0.0;
};

// Exactly conic beyond apex_radius. Omega_+ is the side containing the axis.
struct Cone {
    Vec3 axis = Vec3::UnitZ();
    double half_angle = std::numbers::pi / 4;
    double apex_radius = 0.0;
};

// Explicit samples; uniform regularity is asserted by the user, not checked.
struct ParametricGrid {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;
    bool uniformly_regular = false;
};

struct SurfaceSample {
    std::size_t id = 0;
    Vec3 point = Vec3::Zero();
    Frame frame;
    double coord = 0.0; // |s|, distance from the origin
};

struct InfinityDirection {
    Vec3 omega = Vec3::UnitZ();
    bool on_sigma_infinity = false;
    Vec3 normal_at_infinity = Vec3::Zero();
};

struct RadialSampling {
    double r_max = 1e3;
    int n_radii = 12;
};

inline constexpr double golden_angle = 2.399963229728653; // pi (3 - sqrt 5)

// Quasi-uniform unit vectors on the sphere.
inline std::vector<Vec3> fibonacci_sphere(std::size_t n) {
    std::vector<Vec3> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = golden_angle * static_cast<double>(i);
        out.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
    return out;
}

class SurfaceModel {
public:
    using Variant = std::variant<Sphere, Plane, Cone, ParametricGrid>;

    SurfaceModel(Variant v, RadialSampling radial = {}) : v_(std::move(v)), radial_(radial) { validate(); }

    const Variant& variant() const { return v_; }
    const RadialSampling& radial() const { return radial_; }

    std::string kind() const {
        static const char* names[] = {"sphere", "plane", "cone", "grid"};
        return names[v_.index()];
    }

    bool is_conic_at_infinity() const { return std::holds_alternative<Plane>(v_) || std::holds_alternative<Cone>(v_); }

    // Geometric radii from r_min to r_max.
    std::vector<double> radii(double r_min) const {
        std::vector<double> r(static_cast<std::size_t>(radial_.n_radii));
        for (int k = 0; k < radial_.n_radii; ++k) {
            double t = radial_.n_radii > 1 ? static_cast<double>(k) / (radial_.n_radii - 1) : 1.0;
            r[static_cast<std::size_t>(k)] = r_min * std::pow(radial_.r_max / r_min, t);
        }
        return r;
    }

    std::vector<SurfaceSample> sample(std::size_t n) const {
        if (n < 1) fail(ErrorKind::Domain, "sample count must be positive");
        std::vector<SurfaceSample> out;
        out.reserve(n);
        if (auto* s = std::get_if<Sphere>(&v_)) {
            auto dirs = fibonacci_sphere(n);
            for (std::size_t i = 0; i < n; ++i)
                out.push_back({i, s->radius * dirs[i], Frame::from_normal(dirs[i]), s->radius});
        } else if (auto* p = std::get_if<Plane>(&v_)) {
            Frame f = Frame::from_normal(p->normal);
            auto r = radii(1.0);
            for (std::size_t i = 0; i < n; ++i) {
                double rad = r[i % r.size()];
                double a = golden_angle * static_cast<double>(i);
                Vec3 x = p->offset * f.nu + rad * (std::cos(a) * f.t1 + std::sin(a) * f.t2);
                out.push_back({i, x, f, x.norm()});
            }
        } else if (auto* c = std::get_if<Cone>(&v_)) {
            auto r = radii(std::max(c->apex_radius, 1.0));
            for (std::size_t i = 0; i < n; ++i) {
                double rad = r[i % r.size()];
                Frame f = cone_frame(*c, golden_angle * static_cast<double>(i));
                out.push_back({i, rad * f.t1, f, rad});
            }
        } else {
            const auto& g = std::get<ParametricGrid>(v_);
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t k = i % g.points.size();
                out.push_back({i, g.points[k], Frame::from_normal(g.normals[k]), g.points[k].norm()});
            }
        }
        return out;
    }

    // Frames along the ray t·omega of a direction on Sigma_infinity, at the sampling radii.
    std::vector<SurfaceSample> ray_samples(const InfinityDirection& d) const {
        std::vector<SurfaceSample> out;
        if (!d.on_sigma_infinity) return out;
        if (auto* p = std::get_if<Plane>(&v_)) {
            Frame f = Frame::from_normal(p->normal);
            std::size_t i = 0;
            for (double rad : radii(1.0)) {
                Vec3 x = p->offset * f.nu + rad * d.omega;
                Vec3 t1 = normalized(d.omega - d.omega.dot(f.nu) * f.nu);
                out.push_back({i++, x, Frame{t1, f.nu.cross(t1), f.nu}, x.norm()});
            }
        } else if (auto* c = std::get_if<Cone>(&v_)) {
            Vec3 a = normalized(c->axis);
            Vec3 radial = d.omega - d.omega.dot(a) * a;
            Frame base = Frame::from_normal(a);
            double phi = std::atan2(radial.dot(base.t2), radial.dot(base.t1));
            std::size_t i = 0;
            for (double rad : radii(std::max(c->apex_radius, 1.0))) {
                Frame f = cone_frame(*c, phi);
                out.push_back({i++, rad * f.t1, f, rad});
            }
        }
        return out;
    }

    // n directions on Sigma_infinity (for conic surfaces) plus n off it.
    std::vector<InfinityDirection> infinity_directions(std::size_t n) const {
        if (n < 1) fail(ErrorKind::Domain, "direction count must be positive");
        std::vector<InfinityDirection> out;
        auto on_ring = [&](const Vec3& w) -> bool {
            if (auto* p = std::get_if<Plane>(&v_)) return std::abs(w.dot(normalized(p->normal))) < 1e-12;
            if (auto* c = std::get_if<Cone>(&v_))
                return std::abs(w.dot(normalized(c->axis)) - std::cos(c->half_angle)) < 1e-12;
            return false;
        };
        if (auto* p = std::get_if<Plane>(&v_)) {
            Frame f = Frame::from_normal(p->normal);
            for (std::size_t k = 0; k < n; ++k) {
                double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
                out.push_back({std::cos(a) * f.t1 + std::sin(a) * f.t2, true, f.nu});
            }
        } else if (auto* c = std::get_if<Cone>(&v_)) {
            for (std::size_t k = 0; k < n; ++k) {
                Frame f = cone_frame(*c, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
                out.push_back({f.t1, true, f.nu});
            }
        }
        for (const Vec3& w : fibonacci_sphere(n))
            if (!on_ring(w)) out.push_back({w, false, Vec3::Zero()});
        return out;
    }

private:
    // Frame on the cone generator at azimuth phi: t1 along the generator, nu pointing away from the axis.
    static Frame cone_frame(const Cone& c, double phi) {
        Vec3 a = normalized(c.axis);
        Frame base = Frame::from_normal(a);
        Vec3 rhat = std::cos(phi) * base.t1 + std::sin(phi) * base.t2;
        double th = c.half_angle;
        Vec3 g = std::cos(th) * a + std::sin(th) * rhat;
        Vec3 nu = -std::sin(th) * a + std::cos(th) * rhat;
        return {g, nu.cross(g), nu};
    }

    void validate() const {
        if (auto* s = std::get_if<Sphere>(&v_)) {
            if (!(s->radius > 0) || !std::isfinite(s->radius)) fail(ErrorKind::Domain, "sphere radius must be positive");
        } else if (auto* p = std::get_if<Plane>(&v_)) {
            if (!all_finite(p->normal) || std::abs(p->normal.norm() - 1.0) > 1e-10)
                fail(ErrorKind::Domain, "plane normal must be a unit vector");
            if (!std::isfinite(p->offset)) fail(ErrorKind::Domain, "plane offset must be finite");
        } else if (auto* c = std::get_if<Cone>(&v_)) {
            if (!all_finite(c->axis) || std::abs(c->axis.norm() - 1.0) > 1e-10)
                fail(ErrorKind::Domain, "cone axis must be a unit vector");
            if (!(c->half_angle > 0 && c->half_angle < std::numbers::pi / 2))
                fail(ErrorKind::Domain, "cone half angle must lie in (0, pi/2)");
            if (!(c->apex_radius >= 0) || !std::isfinite(c->apex_radius))
                fail(ErrorKind::Domain, "cone apex radius must be nonnegative");
        } else {
            const auto& g = std::get<ParametricGrid>(v_);
            if (g.points.empty() || g.points.size() != g.normals.size())
                fail(ErrorKind::Domain, "grid needs matching nonempty point and normal lists");
            for (std::size_t i = 0; i < g.points.size(); ++i)
                if (!all_finite(g.points[i]) || !all_finite(g.normals[i]) || !(g.normals[i].norm() > 0))
                    fail(ErrorKind::Domain, "grid sample " + std::to_string(i) + " is invalid");
        }
        if (!(radial_.r_max > 1.0) || radial_.n_radii < 1) fail(ErrorKind::Domain, "invalid radial sampling");
    }

    Variant v_;
    RadialSampling radial_;
};

// base + amplitude·exp(−rate·|s|); its limit at infinity is base.
struct Coefficient {
    double base = 0.0;
    double amplitude = 0.0;
    double rate = 0.0;

    double at(double s) const { return amplitude == 0.0 ? base : base + amplitude * std::exp(-rate * s); }
    double limit() const { return rate > 0 || amplitude == 0.0 ? base : base + amplitude; }
};

// Gamma as a function on the surface.
class GammaField {
public:
    enum class Form { DiagonalPair, ElectrostaticLorentz, General, Custom };

    static GammaField constant(const InteractionMatrix& g) {
        GammaField f;
        f.form_ = Form::General;
        f.constant_ = g;
        return f;
    }
    static GammaField diagonal_pair(Coefficient gamma, Coefficient epsilon) {
        GammaField f;
        f.form_ = Form::DiagonalPair;
        f.c1_ = gamma;
        f.c2_ = epsilon;
        return f;
    }
    static GammaField electrostatic_lorentz(Coefficient eta, Coefficient tau) {
        GammaField f;
        f.form_ = Form::ElectrostaticLorentz;
        f.c1_ = eta;
        f.c2_ = tau;
        return f;
    }
    // An arbitrary field; the limit at Sigma_infinity must be declared separately
    // (or the field flagged as vanishing there) before limit operators can be built.
    static GammaField custom(std::function<InteractionMatrix(const SurfaceSample&)> fn,
                             std::function<InteractionMatrix(const Vec3&)> limit = nullptr,
                             bool vanishes_at_infinity = false) {
        GammaField f;
        f.form_ = Form::Custom;
        f.fn_ = std::move(fn);
        f.limit_fn_ = std::move(limit);
        f.vanishes_ = vanishes_at_infinity;
        return f;
    }

    Form form() const { return form_; }

    InteractionMatrix at(const SurfaceSample& s) const {
        switch (form_) {
        case Form::DiagonalPair: return DiagonalPair{c1_.at(s.coord), c2_.at(s.coord)};
        case Form::ElectrostaticLorentz: return ElectrostaticLorentz{c1_.at(s.coord), c2_.at(s.coord)};
        case Form::General: return constant_;
        case Form::Custom: return fn_(s);
        }
        return constant_;
    }

    bool has_limit() const { return form_ != Form::Custom || limit_fn_ || vanishes_; }

    InteractionMatrix limit(const Vec3& omega) const {
        switch (form_) {
        case Form::DiagonalPair: return DiagonalPair{c1_.limit(), c2_.limit()};
        case Form::ElectrostaticLorentz: return ElectrostaticLorentz{c1_.limit(), c2_.limit()};
        case Form::General: return constant_;
        case Form::Custom:
            if (limit_fn_) return limit_fn_(omega);
            if (vanishes_) return DiagonalPair{0.0, 0.0};
            fail(ErrorKind::Config, "missing Gamma limits at Sigma_infinity");
        }
        return constant_;
    }

private:
    Form form_ = Form::General;
    InteractionMatrix constant_;
    Coefficient c1_, c2_;
    std::function<InteractionMatrix(const SurfaceSample&)> fn_;
    std::function<InteractionMatrix(const Vec3&)> limit_fn_;
    bool vanishes_ = false;
};

} // namespace dshell
