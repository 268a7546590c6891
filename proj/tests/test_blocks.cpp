#include "nodalforge/blocks.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace nodalforge;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(BlockFunction, ModelValues)
{
    // Pants saddle at z = 0: f0 = 2/3, f = 1 - 1/9.
    EXPECT_NEAR(block_f(BlockType::Pants, {0, 0, 0}), 8.0 / 9.0, 1e-15);
    EXPECT_NEAR(block_f(BlockType::Cylinder, {0, 1, 0}), 0, 1e-15);
    EXPECT_NEAR(block_f(BlockType::Cylinder, {1, 0, 0}), 1, 1e-15);
    EXPECT_NEAR(block_f(BlockType::Disk, {0, 0, 1}), 0.75, 1e-15);
    EXPECT_NEAR(block_f(BlockType::Disk, {1, 0, 0}), 0, 1e-15);
    // Pants Dirichlet boundary |z^2-1| = 2, Neumann boundaries |z -+ 1| small.
    EXPECT_NEAR(block_f(BlockType::Pants, {std::sqrt(3.0), 0, 0}), 0, 1e-12);
    EXPECT_NEAR(block_f(BlockType::Pants, {std::sqrt(1.5), 0, 0}), 1, 1e-12);
    EXPECT_THROW(block_f(BlockType::Pants, {1, 0, 0}), std::invalid_argument);
    EXPECT_THROW(block_f(BlockType::Disk, {0, 0, -1}), std::invalid_argument);
    EXPECT_THROW(block_f(BlockType::Cylinder, {1.5, 0, 0}), std::invalid_argument);
    EXPECT_EQ(parse_block_type("Pants"), BlockType::Pants);
    EXPECT_THROW(parse_block_type("torus"), std::invalid_argument);
}

TEST(BlockFunction, CriticalPoints)
{
    auto disk = classify_critical(BlockType::Disk);
    ASSERT_EQ(disk.size(), 1u);
    EXPECT_EQ(disk[0].kind, CriticalKind::Max);
    EXPECT_NEAR(disk[0].location[2], 1, 1e-8);

    EXPECT_TRUE(classify_critical(BlockType::Cylinder).empty());

    auto pants = classify_critical(BlockType::Pants);
    ASSERT_EQ(pants.size(), 1u);
    EXPECT_EQ(pants[0].kind, CriticalKind::Saddle);
    EXPECT_NEAR(pants[0].location[0], 0, 1e-8);
    EXPECT_NEAR(pants[0].location[1], 0, 1e-8);
    // Nondegenerate.
    EXPECT_GT(std::abs(pants[0].hessianEigen[0] * pants[0].hessianEigen[1]), 1e-6);
    EXPECT_LT(pants[0].hessianEigen[0], 0);
    EXPECT_GT(pants[0].hessianEigen[1], 0);
}

TEST(Flux, RadialFieldThroughCircle)
{
    for (double r : {0.5, 1.0, 2.0}) {
        auto radial = [](Vec2d x) { return x; };
        auto tangent = [](Vec2d x) { return Vec2d{-x[1], x[0]}; };
        auto one = [](Vec2d) { return 1.0; };
        auto g = [r](double t) { return Vec2d{r * std::cos(t), r * std::sin(t)}; };
        auto dg = [r](double t) { return Vec2d{-r * std::sin(t), r * std::cos(t)}; };
        // Unit radial field x/|x| has flux 2 pi r; the field x has flux 2 pi r^2.
        EXPECT_NEAR(flux_integral(radial, g, dg, 0, 2 * kPi, one), 2 * kPi * r * r, 1e-10);
        EXPECT_NEAR(flux_integral(tangent, g, dg, 0, 2 * kPi, one), 0, 1e-10);
        auto unit = [](Vec2d x) {
            double n = std::hypot(x[0], x[1]);
            return Vec2d{x[0] / n, x[1] / n};
        };
        EXPECT_NEAR(flux_integral(unit, g, dg, 0, 2 * kPi, one), 2 * kPi * r, 1e-10);
        // Reversing the orientation flips the sign.
        auto gr = [r](double t) { return Vec2d{r * std::cos(-t), r * std::sin(-t)}; };
        auto dgr = [r](double t) { return Vec2d{-r * std::sin(t), -r * std::cos(t)}; };
        EXPECT_NEAR(flux_integral(unit, gr, dgr, 0, 2 * kPi, one), -2 * kPi * r, 1e-10);
    }
    // Polyline square: constant field (1,0) through the CCW unit square is 0; x through it is the area.
    std::vector<Vec2d> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}};
    auto one = [](Vec2d) { return 1.0; };
    EXPECT_NEAR(flux_integral([](Vec2d) { return Vec2d{1, 0}; }, sq, one), 0, 1e-14);
    EXPECT_NEAR(flux_integral([](Vec2d x) { return Vec2d{x[0], 0}; }, sq, one), 1, 1e-14);
}

TEST(Quadrature, PantsAreaMatchesGridCount)
{
    // Count lattice cells in the z-plane with f0 in [lo, hi); the elliptic density must agree.
    const double lo = 0.2, hi = 0.9;
    const int n = 2400;
    const double L = 1.8, h = 2 * L / n;
    double count = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double x = -L + (i + 0.5) * h, y = -L + (j + 0.5) * h;
            double rho = std::hypot(x * x - y * y - 1, 2 * x * y);
            double f0 = (2 - rho) / 1.5;
            if (f0 >= lo && f0 < hi) count += h * h;
        }
    double area = model_area(BlockType::Pants, lo, hi);
    EXPECT_NEAR(area, count, 2e-3 * area);
    EXPECT_NEAR(model_area(BlockType::Disk, 0, 0.5), 2 * kPi, 1e-12);
    EXPECT_NEAR(model_area(BlockType::Cylinder, 0.25, 0.75), kPi, 1e-12);
}

TEST(Quadrature, GaussLegendreIsExactOnPolynomials)
{
    auto p = [](double x) { return 1 + 3 * x * x - 7 * std::pow(x, 9) + std::pow(x, 15); };
    double exact = 2 + 2 + 0 + 0;  // on [-1,1]: odd terms vanish, 3x^2 -> 2
    EXPECT_NEAR(gauss_legendre(p, -1, 1, 1), exact, 1e-13);
    EXPECT_NEAR(gauss_legendre([](double x) { return std::exp(x); }, 0, 1, 4), std::exp(1.0) - 1, 1e-14);
}

TEST(Admissibility, TotalIntegralEqualsDirichletFlux)
{
    for (auto t : {BlockType::Disk, BlockType::Cylinder, BlockType::Pants}) {
        BlockMeasure m(t);
        EXPECT_GT(m.density(), 0);
        EXPECT_NEAR(m.S_full(), 0, 1e-6) << to_string(t);
        EXPECT_NEAR(m.integral_below(m.fmax()), 2 * kPi, 1e-6) << to_string(t);
    }
}

TEST(Admissibility, IdentitiesInsideCollars)
{
    BlockMeasure c(BlockType::Cylinder);
    // R inside the Dirichlet collar: integral of f equals the flux difference exactly.
    EXPECT_NEAR(c.S_band(0, 0.5 * c.dirichlet_top()), 0, 1e-12);
    EXPECT_LT(c.S_band(0, 0.5), 0);
    // Levels outside U contribute no flux term.
    EXPECT_NEAR(c.S_band(0.3, 0.6), c.integral_band(0.3, 0.6), 1e-12);
    // Additivity over adjacent bands whose shared level is in a collar.
    double a = 0.5 * c.dirichlet_top(), b = 0.5 * (1 + c.neumann_bottom());
    EXPECT_NEAR(c.S_band(0, a) + c.S_band(a, b), c.S_band(0, b), 1e-12);
    BlockMeasure d(BlockType::Disk);
    double cap = 0.5 * (d.top_cap_level() + d.fmax());
    EXPECT_NEAR(d.S_band(cap, d.fmax()), 0, 1e-12);
    EXPECT_LT(d.S_band(0, 0.5), 0);
}

TEST(Admissibility, SweepsPass)
{
    for (auto t : {BlockType::Disk, BlockType::Cylinder, BlockType::Pants}) {
        auto rep = admissibility_sweep(t);
        EXPECT_TRUE(rep.ok) << to_string(t);
        EXPECT_EQ(rep.sweep.size(), 200u);
        for (const auto& s : rep.sweep) EXPECT_TRUE(s.ok) << to_string(t) << " a=" << s.a << " " << s.region;
    }
    auto pants = admissibility_sweep(BlockType::Pants);
    EXPECT_GT(pants.saddleRadius, 0);
    EXPECT_LT(pants.pathBound, 0.5 * pants.minLegIntegral);
    ASSERT_FALSE(pants.variants.empty());
    for (const auto& v : pants.variants) EXPECT_LT(v.Supper, 0) << v.b << " " << v.a1;
}

TEST(Admissibility, NeumannCollarCoordinateIsSmoothInF0)
{
    // f = cos x in the collar, and 1 - f = (1 - f0)^2, so x ~ sqrt(2) (1 - f0).
    for (double d : {1e-2, 1e-3, 1e-4}) {
        double f = f_from_f0(1 - d);
        EXPECT_NEAR(std::acos(f) / d, std::sqrt(2.0), 2 * d);
    }
}

TEST(Decompose, SingleOvalIsTwoDisks)
{
    auto c = parse_ovals("A");
    auto d = decompose(c);
    ASSERT_EQ(d.blocks.size(), 2u);
    for (const auto& b : d.blocks) EXPECT_EQ(b.type, BlockType::Disk);
    EXPECT_EQ(d.blocks[0].sign, 1);
    EXPECT_EQ(d.blocks[1].sign, -1);
    std::string why;
    EXPECT_TRUE(verify_decomposition(c, d, &why)) << why;
}

TEST(Decompose, NestedPairIsDiskCylinderCylinderDisk)
{
    auto c = parse_ovals("A(B)");
    auto d = decompose(c);
    std::vector<int> count(3, 0);
    for (const auto& b : d.blocks) ++count[static_cast<int>(b.type)];
    EXPECT_EQ(count[0], 2);
    EXPECT_EQ(count[1], 2);
    EXPECT_EQ(count[2], 0);
    EXPECT_TRUE(verify_decomposition(c, d));
}

TEST(Decompose, SiblingsUsePants)
{
    for (int m = 2; m <= 7; ++m) {
        OvalConfig c;
        for (int i = 0; i < m; ++i) c.add(std::string(1, char('A' + i)));
        auto d = decompose(c);
        EXPECT_EQ(d.blocks.size(), 2u * m);
        int pants = 0;
        for (const auto& b : d.blocks) pants += b.type == BlockType::Pants;
        EXPECT_EQ(pants, m - 2);  // outer region: m disks in a sphere with m holes
        EXPECT_TRUE(verify_decomposition(c, d));
    }
}

TEST(Decompose, AllForestsUpToSix)
{
    for (int n = 1; n <= 6; ++n)
        for (const auto& c : enumerate_forests(n)) {
            auto d = decompose(c);
            std::string why;
            EXPECT_TRUE(verify_decomposition(c, d, &why)) << to_string(c) << ": " << why;
            EXPECT_TRUE(d.signsConsistent);
        }
}

TEST(Decompose, VerifierCatchesDefects)
{
    auto c = parse_ovals("A(B C)");
    auto d = decompose(c);
    ASSERT_TRUE(verify_decomposition(c, d));
    auto bad = d;
    bad.blocks.pop_back();
    EXPECT_FALSE(verify_decomposition(c, bad));
    bad = d;
    bad.blocks[0].sign = -bad.blocks[0].sign;
    EXPECT_FALSE(verify_decomposition(c, bad));
    bad = d;
    for (auto& b : bad.blocks)
        if (b.type == BlockType::Cylinder) {
            b.type = BlockType::Disk;
            break;
        }
    EXPECT_FALSE(verify_decomposition(c, bad));
    auto json = decomposition_json(c, d);
    EXPECT_NE(json.find("\"block_count\": 6"), std::string::npos);
}
