#include <gtest/gtest.h>

#include "dshell/limitops.hpp"
#include "support.hpp"

using namespace dshell;
using namespace testing_support;

namespace {

SpectrumSet random_set() {
    std::vector<Interval> iv;
    std::vector<double> pts;
    int n = static_cast<int>(uniform(0, 4));
    for (int i = 0; i < n; ++i) {
        double a = std::round(uniform(-10, 10)), b = a + std::round(uniform(0, 4));
        iv.push_back({a, b});
    }
    if (uniform(0, 1) < 0.3) iv.push_back({-inf, std::round(uniform(-12, -5))});
    int m = static_cast<int>(uniform(0, 4));
    for (int i = 0; i < m; ++i) pts.push_back(std::round(uniform(-12, 12) * 2) / 2);
    return SpectrumSet(iv, pts);
}

} // namespace

TEST(SpectrumSet, Examples) {
    auto s = SpectrumSet::rays(-1, 1).unite(SpectrumSet({}, {0.0}));
    EXPECT_EQ(s.intervals().size(), 2u);
    ASSERT_EQ(s.points().size(), 1u);
    EXPECT_EQ(s.points()[0], 0.0);
    auto m = SpectrumSet({{0, 2}}).unite(SpectrumSet({{1, 3}}));
    ASSERT_EQ(m.intervals().size(), 1u);
    EXPECT_EQ(m.intervals()[0].lo, 0.0);
    EXPECT_EQ(m.intervals()[0].hi, 3.0);
    EXPECT_EQ(SpectrumSet::rays(1, -1), SpectrumSet::real_line());
    EXPECT_TRUE(SpectrumSet::empty().is_empty());
}

TEST(SpectrumSet, NormalizationRules) {
    SpectrumSet s({{1, 1}, {2, 3}, {3, 4}}, {2.5, 5.0, 5.0});
    EXPECT_EQ(s.intervals().size(), 1u);
    EXPECT_EQ(s.points(), (std::vector<double>{1.0, 5.0}));
    EXPECT_TRUE(s.contains(1.0));
    EXPECT_TRUE(s.contains(3.5));
    EXPECT_FALSE(s.contains(4.5));
    EXPECT_TRUE(s.has_interval_inside(3.5, 10));
    EXPECT_FALSE(s.has_interval_inside(4.5, 10));
}

TEST(SpectrumSet, UnionAlgebra) {
    for (int i = 0; i < 500; ++i) {
        auto a = random_set(), b = random_set(), c = random_set();
        EXPECT_EQ(a.unite(b), b.unite(a));
        EXPECT_EQ(a.unite(b).unite(c), a.unite(b.unite(c)));
        EXPECT_EQ(a.unite(a), a);
        EXPECT_EQ(spectrum_union(a, SpectrumSet::empty()), a);
        for (int k = 0; k < 20; ++k) {
            double x = std::round(uniform(-14, 14) * 4) / 4;
            EXPECT_EQ(a.unite(b).contains(x), a.contains(x) || b.contains(x)) << x;
        }
    }
}

TEST(SpectrumSet, TextForm) {
    EXPECT_EQ(SpectrumSet::rays(-1, 1).to_string(), "(-inf, -1] U [1, inf)");
    EXPECT_EQ(SpectrumSet::empty().to_string(), "{}");
}

TEST(FreeSpectrum, Examples) {
    EXPECT_EQ(free_spectrum(1, 0), SpectrumSet({{-inf, -1}, {1, inf}}));
    EXPECT_EQ(free_spectrum(0, 5), SpectrumSet::real_line());
    EXPECT_EQ(free_spectrum(2, 1), SpectrumSet::rays(-1, 3));
    EXPECT_EQ(free_spectrum(-2, 1), free_spectrum(2, 1));
    EXPECT_FALSE(free_spectrum(1, 0).contains(0.999999));
    EXPECT_TRUE(free_spectrum(1, 0).contains(1.0));
}
