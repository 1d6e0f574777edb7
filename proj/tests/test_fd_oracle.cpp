#include <gtest/gtest.h>

#include "dshell/fd_oracle.hpp"
#include "support.hpp"

using namespace dshell;
using namespace testing_support;

namespace {

double level(double eta, double xi, double m) { return std::copysign(std::hypot(xi, m), eta) * (4 - eta * eta) / (4 + eta * eta); }

} // namespace

TEST(FDOracle, GridValidation) {
    auto sym = make_reduced_symbol(DiagonalPair{}, 0.0, 0.0, 1.0, 0.0);
    EXPECT_THROW(gap_eigenvalues_fd(sym, FDGrid{10.0, 50}), Error);
    EXPECT_THROW(gap_eigenvalues_fd(sym, FDGrid{-1.0, 200}), Error);
    auto s = assemble(sym, FDGrid{10.0, 100});
    EXPECT_EQ(s.n(), 800);
    EXPECT_LT(s.constraint_condition, fd_max_constraint_condition);
}

TEST(FDOracle, ElectrostaticLevelIndependentOfDispersionSolver) {
    for (auto [eta, xi, m] : {std::tuple{1.0, 0.5, 1.0}, std::tuple{3.0, 0.0, 0.5}, std::tuple{-1.2, 1.0, 0.7}}) {
        auto r = gap_eigenvalues_fd_auto(make_reduced_symbol(ElectrostaticLorentz{eta, 0.0}, xi, 0.0, m, 0.0));
        ASSERT_EQ(r.eigenvalues.size(), 1u) << eta;
        EXPECT_NEAR(r.eigenvalues[0], level(eta, xi, m), 1e-6);
        EXPECT_TRUE(r.reliable);
    }
}

TEST(FDOracle, FreeInterfaceEmpty) {
    auto r = gap_eigenvalues_fd_auto(make_reduced_symbol(DiagonalPair{}, 0.5, 0.0, 1.0, 0.0));
    EXPECT_TRUE(r.eigenvalues.empty());
}

TEST(FDOracle, DoubledModesAreFiltered) {
    auto r = gap_eigenvalues_fd(make_reduced_symbol(DiagonalPair{0.5, -0.3}, 0.5, 0.0, 1.0, 0.0), FDGrid{30.0, 300});
    EXPECT_EQ(r.eigenvalues.size(), 2u);
    for (const auto& e : r.accepted) {
        EXPECT_LE(e.smoothness, FDOptions{}.smoothness);
        EXPECT_GE(e.localization, FDOptions{}.localization);
    }
    // the central stencil mirrors the physical level of Gamma = eta I4 to −E with a
    // sign-alternating eigenvector
    double e = level(1.0, 0.5, 1.0);
    auto s = gap_eigenvalues_fd(make_reduced_symbol(ElectrostaticLorentz{1.0, 0.0}, 0.5, 0.0, 1.0, 0.0), FDGrid{30.0, 300});
    ASSERT_EQ(s.eigenvalues.size(), 1u);
    EXPECT_NEAR(s.eigenvalues[0], e, 1e-8);
    bool mirror = false;
    for (const auto& c : s.rejected)
        if (std::abs(c.value.real() + e) < 1e-6 && c.smoothness > 1.5) mirror = true;
    EXPECT_TRUE(mirror);
}

TEST(FDOracle, HalfLengthDoublingIsStable) {
    auto sym = make_reduced_symbol(ElectrostaticLorentz{1.0, 0.5}, 1.0, 0.0, 1.0, 0.0);
    auto a = gap_eigenvalues_fd(sym, FDGrid{30.0, 300});
    auto b = gap_eigenvalues_fd(sym, FDGrid{60.0, 600});
    ASSERT_EQ(a.eigenvalues.size(), 1u);
    ASSERT_EQ(b.eigenvalues.size(), 1u);
    EXPECT_NEAR(a.eigenvalues[0], b.eigenvalues[0], 1e-8);
}

TEST(FDOracle, ShortIntervalIsFlagged) {
    auto sym = make_reduced_symbol(ElectrostaticLorentz{1.0, 0.0}, 0.0, 0.0, 1.0, 0.0);
    // kappa = 0.8 at E = 0.6, so 20/kappa = 25; 26 clears the roundoff in kappa
    auto r = gap_eigenvalues_fd(sym, FDGrid{12.5, 125});
    EXPECT_FALSE(r.reliable);
    EXPECT_FALSE(r.warnings.empty());
    auto ok = gap_eigenvalues_fd(sym, FDGrid{26.0, 260});
    EXPECT_TRUE(ok.reliable);
}

// The error must fall at least like h³ until it reaches the roundoff floor.
TEST(FDOracle, TruncationErrorBound) {
    auto sym = make_reduced_symbol(ElectrostaticLorentz{1.0, 0.0}, 0.5, 0.0, 1.0, 0.0);
    double want = level(1.0, 0.5, 1.0);
    double prev = inf;
    for (int n : {100, 200, 400}) {
        auto r = gap_eigenvalues_fd(sym, FDGrid{40.0, n});
        ASSERT_EQ(r.eigenvalues.size(), 1u);
        double h = 40.0 / n;
        double err = std::abs(r.eigenvalues[0] - want);
        EXPECT_LT(err, 1e-2 * h * h * h + 1e-9) << n;
        EXPECT_LE(err, prev + 1e-9);
        prev = err;
    }
}

TEST(FDOracle, AutoGridFollowsDecayLength) {
    auto sym = make_reduced_symbol(ElectrostaticLorentz{3.0, 0.0}, 0.0, 0.0, 0.5, 0.0);
    auto r = gap_eigenvalues_fd_auto(sym);
    ASSERT_EQ(r.eigenvalues.size(), 1u);
    double g = sym.gap_halfwidth(), e = r.eigenvalues[0];
    double kappa = std::sqrt(g * g - e * e);
    EXPECT_GE(r.grid.half_length * kappa, FDOptions{}.decay_lengths - 1e-9);
    EXPECT_LE(r.grid.h(), FDOptions{}.target_h + 1e-12);
}
