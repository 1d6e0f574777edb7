#include <gtest/gtest.h>

#include "dshell/limitops.hpp"
#include "support.hpp"

using namespace dshell;
using namespace testing_support;

namespace {

std::vector<double> small_grid() { return {0.0, 0.5, 1.0, 1.5, 2.0}; }

std::size_t count_shell(const std::vector<LimitOperatorDescriptor>& d) {
    std::size_t n = 0;
    for (const auto& x : d) n += std::holds_alternative<Shell>(x);
    return n;
}

} // namespace

TEST(PartialLimits, DeclaredModels) {
    auto c = partial_limits(ScalarField{ConstantField{0.0}});
    EXPECT_EQ(c.m_inf, 0.0);
    EXPECT_EQ(c.m_sup, 0.0);
    auto r = partial_limits(ScalarField{RadialSO{0.0, 1.0, RadialSO::Profile::SinLog}});
    EXPECT_EQ(r.m_inf, -1.0);
    EXPECT_EQ(r.m_sup, 1.0);
    EXPECT_TRUE(r.empirical_matches);
    auto d = partial_limits(ScalarField{DirectionalSO{{Vec3::UnitZ(), -Vec3::UnitZ()}, {-0.5, 0.25}}});
    EXPECT_EQ(d.m_inf, -0.5);
    EXPECT_EQ(d.m_sup, 0.25);
    EXPECT_TRUE(d.empirical_matches);
}

TEST(PartialLimits, InvalidFieldsAreConfigErrors) {
    auto kind = [](const ScalarField& f) {
        try {
            declared_limit_set(f);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Domain;
    };
    EXPECT_EQ(kind(DirectionalSO{{}, {}}), ErrorKind::Config);
    EXPECT_EQ(kind(DirectionalSO{{Vec3::UnitZ()}, {1.0, 2.0}}), ErrorKind::Config);
    EXPECT_EQ(kind(DirectionalSO{{Vec3(0, 0, 2)}, {1.0}}), ErrorKind::Config);
}

TEST(PartialLimits, DirectionalLimitExactAtDirections) {
    DirectionalSO d{{Vec3::UnitX(), Vec3::UnitY(), -Vec3::UnitX()}, {1.0, -2.0, 0.5}};
    EXPECT_EQ(d.limit_at(Vec3::UnitY()), -2.0);
    EXPECT_EQ(evaluate(d, 1e6 * Vec3::UnitX()), 1.0);
    double mid = d.limit_at(Vec3::UnitZ());
    EXPECT_GT(mid, -2.0);
    EXPECT_LT(mid, 1.0);
}

TEST(Limits, SphereGivesNonShellOnly) {
    PotentialModel p{RadialSO{0.0, 1.0, RadialSO::Profile::SinLog}};
    auto d = enumerate_limits(SurfaceModel(Sphere{1.0}), p, GammaField::constant(DiagonalPair{0.3, 0.3}));
    EXPECT_EQ(count_shell(d), 0u);
    ASSERT_EQ(d.size(), 9u);
    EXPECT_EQ(std::get<NonShell>(d.front()).phi_h, -1.0);
    EXPECT_EQ(std::get<NonShell>(d.back()).phi_h, 1.0);
}

TEST(Limits, PlaneShellDescriptors) {
    auto d = enumerate_limits(SurfaceModel(Plane{Vec3::UnitZ(), 0.0}), PotentialModel{},
                              GammaField::electrostatic_lorentz(Coefficient{1.0}, Coefficient{0.0}), {16, 9});
    EXPECT_EQ(count_shell(d), 16u);
    for (const auto& x : d)
        if (auto* s = std::get_if<Shell>(&x)) {
            EXPECT_LT((s->nu - Vec3::UnitZ()).norm(), 1e-15);
            EXPECT_NEAR(s->omega.z(), 0.0, 1e-15);
        }
}

TEST(Limits, MissingGammaLimitIsConfigError) {
    auto custom = GammaField::custom([](const SurfaceSample&) { return InteractionMatrix(DiagonalPair{}); });
    try {
        enumerate_limits(SurfaceModel(Plane{Vec3::UnitZ(), 0.0}), PotentialModel{}, custom);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
    }
    // compact surfaces never need the limit
    EXPECT_NO_THROW(enumerate_limits(SurfaceModel(Sphere{1.0}), PotentialModel{}, custom));
}

TEST(EssentialSpectrum, CompactSlowlyOscillating) {
    PotentialModel p{RadialSO{0.0, 1.0, RadialSO::Profile::SinLog}};
    auto d = enumerate_limits(SurfaceModel(Sphere{1.0}), p, GammaField::constant(ElectrostaticLorentz{}));
    auto es = essential_spectrum(d, 2.0, default_xi_grid(2.0));
    EXPECT_EQ(es.closure, SpectrumSet({{-inf, -1.0}, {1.0, inf}}));
    EXPECT_EQ(es.sampled, es.closure);
    EXPECT_FALSE(es.closure.has_interval_inside(-1.0, 1.0));
    EXPECT_TRUE(es.shell_contribution_empty());
}

TEST(EssentialSpectrum, CompactEqualsUnionOfFreeSpectra) {
    for (int i = 0; i < 30; ++i) {
        double base = uniform(-2, 2), amp = uniform(0, 2), m = uniform(-3, 3);
        PotentialModel p{RadialSO{base, amp, RadialSO::Profile::SinSqrt}};
        auto d = enumerate_limits(SurfaceModel(Sphere{2.0}), p, GammaField::constant(DiagonalPair{0.5, 0.5}));
        SpectrumSet u;
        for (const auto& x : d) u = u.unite(free_spectrum(m, std::get<NonShell>(x).phi_h));
        EXPECT_EQ(essential_spectrum(d, m, {0.0}).closure, u);
    }
}

TEST(EssentialSpectrum, GapProbes) {
    // M_sup − M_inf = 1 < 2|m| = 3: the gap (M_sup − |m|, M_inf + |m|) = (−1, 1) stays open
    PotentialModel p{DirectionalSO{{Vec3::UnitZ(), -Vec3::UnitZ()}, {0.5, -0.5}}};
    auto es = essential_spectrum(enumerate_limits(SurfaceModel(Sphere{1.0}), p, GammaField::constant(DiagonalPair{})), 1.5,
                                 {0.0});
    for (int k = 1; k < 100; ++k) EXPECT_FALSE(es.closure.contains(-1.0 + 2.0 * k / 100.0));
    EXPECT_TRUE(es.closure.contains(-1.0));
    EXPECT_TRUE(es.closure.contains(1.0));
}

TEST(EssentialSpectrum, VanishingCouplingOnConicSurface) {
    auto gamma = GammaField::diagonal_pair(Coefficient{0.0, 0.8, 0.5}, Coefficient{0.0, -0.4, 0.5});
    for (const SurfaceModel& s : {SurfaceModel(Plane{Vec3::UnitZ(), 0.0}), SurfaceModel(Cone{Vec3::UnitZ(), 0.7, 1.0})}) {
        auto d = enumerate_limits(s, PotentialModel{}, gamma, {16, 9});
        auto es = essential_spectrum(d, 1.0, default_xi_grid(1.0));
        EXPECT_GT(es.shell_descriptors, 0u);
        EXPECT_TRUE(es.shell_contribution_empty());
        EXPECT_EQ(es.sampled, SpectrumSet::rays(-1.0, 1.0));
        EXPECT_EQ(es.closure, SpectrumSet::rays(-1.0, 1.0));
    }
}

TEST(EssentialSpectrum, ConstantShellBranches) {
    auto d = enumerate_limits(SurfaceModel(Plane{Vec3::UnitZ(), 0.0}), PotentialModel{},
                              GammaField::electrostatic_lorentz(Coefficient{1.0}, Coefficient{0.0}), {8, 9});
    auto es = essential_spectrum(d, 1.0, small_grid());
    EXPECT_FALSE(es.shell_contribution_empty());
    // E(xi) = 0.6 sqrt(xi² + 1) until it leaves the gap (−1, 1)
    for (double xi : small_grid()) {
        double e = 0.6 * std::hypot(xi, 1.0);
        if (e >= 1.0) continue;
        bool hit = false;
        for (double p : es.sampled.points()) hit |= std::abs(p - e) < 1e-9;
        EXPECT_TRUE(hit) << xi;
    }
    EXPECT_TRUE(es.closure.contains(0.6));
    EXPECT_TRUE(es.closure.contains(0.8));
    EXPECT_FALSE(es.closure.contains(0.5));
    // every direction shares one branch set
    std::size_t per = es.branches.size() / count_shell(d);
    EXPECT_EQ(per * count_shell(d), es.branches.size());
}

TEST(EssentialSpectrum, MagneticPotentialDoesNotEnter) {
    auto gamma = GammaField::electrostatic_lorentz(Coefficient{1.0}, Coefficient{0.0});
    SurfaceModel plane(Plane{Vec3::UnitZ(), 0.0});
    PotentialModel a{ConstantField{0.2}};
    PotentialModel b = a;
    b.magnetic = {RadialSO{1.0, 3.0, RadialSO::Profile::SinLog}, ConstantField{7.0},
                  DirectionalSO{{Vec3::UnitX()}, {2.0}}};
    auto da = enumerate_limits(plane, a, gamma, {8, 9}), db = enumerate_limits(plane, b, gamma, {8, 9});
    ASSERT_EQ(da.size(), db.size());
    auto ea = essential_spectrum(da, 1.0, small_grid()), eb = essential_spectrum(db, 1.0, small_grid());
    EXPECT_EQ(ea.sampled, eb.sampled);
    EXPECT_EQ(ea.closure, eb.closure);
    EXPECT_EQ(ea.sampled.to_string(), eb.sampled.to_string());
}

TEST(EssentialSpectrum, ConeSpectraCoincideAcrossDirections) {
    auto gamma = GammaField::electrostatic_lorentz(Coefficient{1.5}, Coefficient{-0.5});
    auto d = enumerate_limits(SurfaceModel(Cone{Vec3::UnitZ(), 0.6, 1.0}), PotentialModel{}, gamma, {6, 9});
    auto es = essential_spectrum(d, 0.5, {0.0, 0.5});
    std::vector<std::vector<double>> tables;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!std::holds_alternative<Shell>(d[i])) continue;
        std::vector<double> e;
        for (const auto& row : es.shell_tables[i])
            for (const auto& ev : row.eigenvalues) e.push_back(ev.energy);
        tables.push_back(e);
    }
    ASSERT_EQ(tables.size(), 6u);
    for (const auto& t : tables) {
        ASSERT_EQ(t.size(), tables[0].size());
        for (std::size_t k = 0; k < t.size(); ++k) EXPECT_NEAR(t[k], tables[0][k], 1e-8);
    }
}

TEST(EssentialSpectrum, BranchLinkingThreshold) {
    std::vector<DispersionRow> rows(3);
    rows[0].xi_norm = 0.0;
    rows[1].xi_norm = 0.1;
    rows[2].xi_norm = 0.2;
    rows[0].eigenvalues = {GapEigenvalue{0.5}, GapEigenvalue{-0.5}};
    rows[1].eigenvalues = {GapEigenvalue{0.55}, GapEigenvalue{-0.9}};
    rows[2].eigenvalues = {GapEigenvalue{0.6}};
    auto br = detail::link_branches(rows, 10.0);
    // reach = factor · 0.1; the jump −0.5 → −0.9 is linked only with the wide reach
    ASSERT_EQ(br.size(), 2u);
    EXPECT_EQ(br[0].size(), 3u);
    auto tight = detail::link_branches(rows, 1.0);
    EXPECT_EQ(tight.size(), 3u);
}

TEST(EssentialSpectrum, EmptyDescriptorsRejected) { EXPECT_THROW(essential_spectrum({}, 1.0, {0.0}), Error); }
