#include "nodalforge/metric.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace nodalforge;

namespace {
constexpr double kPi = std::numbers::pi;

// Spherical divergence of an orthonormal-frame field, by centred differences.
template <class F>
double divergence(F u, double th, double ph, double h = 1e-5)
{
    double sp = std::sin(th + h), sm = std::sin(th - h);
    double dth = (sp * u(th + h, ph)[0] - sm * u(th - h, ph)[0]) / (2 * h);
    double dph = (u(th, ph + h)[1] - u(th, ph - h)[1]) / (2 * h);
    return (dth + dph) / std::sin(th);
}

PerturbationModel model_for(HarmonicIndex idx, const PairingAssignment* pairings = nullptr)
{
    auto cs = critical_zeros_and_extrema(idx);
    auto g = resolve_poles(globe_graph(idx));
    PairingAssignment p = pairings ? *pairings : PairingAssignment(g.graph.vertex_count(), 0);
    return PerturbationModel(BumpSet(cs, default_cap_radii(cs)), sign_assignment(cs, g, p));
}
}  // namespace

TEST(MetricFromGradient, WorkedExample)
{
    Sym2 a = metric_from_gradient({1, 0}, {1, 1});
    EXPECT_NEAR(a.xx, 1, 1e-15);
    EXPECT_NEAR(a.xy, 1, 1e-15);
    EXPECT_NEAR(a.yy, 2, 1e-15);
    EXPECT_THROW(metric_from_gradient({1, 0}, {-1, 1}), std::invalid_argument);
    EXPECT_THROW(metric_from_gradient({1, 0}, {0, 1}), std::invalid_argument);
}

TEST(MetricFromGradient, PropertiesAndUniqueness)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ang(-1.4, 1.4), lg(-2, 2), rot(0, 2 * kPi);
    for (int i = 0; i < 2000; ++i) {
        double a = rot(rng), b = a + ang(rng), ru = std::pow(10, lg(rng)), rv = std::pow(10, lg(rng));
        Vec2d u{ru * std::cos(a), ru * std::sin(a)}, v{rv * std::cos(b), rv * std::sin(b)};
        Sym2 A = metric_from_gradient(u, v);
        Vec2d Au = A.apply(u);
        // Rounding bounds: det is a difference of products of size xx*yy, A u sums terms of size |A||u|.
        const double eps = 1e-15, normA = A.xx + A.yy;
        EXPECT_NEAR(A.det(), 1, 8 * eps * (A.xx * A.yy + A.xy * A.xy));
        EXPECT_NEAR(Au[0], v[0], 8 * eps * normA * ru);
        EXPECT_NEAR(Au[1], v[1], 8 * eps * normA * ru);
        EXPECT_GT(A.xx, 0);
        // Any symmetric B with B u = v is A + c (Ju)(Ju)^T, and det B = 1 + c <u,v>, so det B = 1 forces c = 0.
        Vec2d ju{u[1], -u[0]};
        double uv = u[0] * v[0] + u[1] * v[1];
        for (double c : {-0.3, 0.1, 2.0}) {
            Sym2 B{A.xx + c * ju[0] * ju[0], A.xy + c * ju[0] * ju[1], A.yy + c * ju[1] * ju[1]};
            Vec2d Bu = B.apply(u);
            EXPECT_NEAR(Bu[0], v[0], 8 * eps * (normA + std::abs(c) * ru * ru) * ru);
            EXPECT_NEAR(B.det(), 1 + c * uv, 8 * eps * (normA + std::abs(c) * ru * ru) * (normA + std::abs(c) * ru * ru));
        }
    }
    // Scaling by the density scales the determinant quadratically.
    EXPECT_NEAR(metric_from_gradient({2, 1}, {1, 3}, 0.5).det(), 0.25, 1e-14);
}

TEST(Grid, WeightsAndParsing)
{
    for (auto g : {LatLonGrid(8, 4), LatLonGrid(64, 33), LatLonGrid(256, 128)}) {
        double s = 0;
        for (int r = 0; r < g.rows(); ++r) s += g.weight(r) * g.cols();
        EXPECT_NEAR(s, 4 * kPi, 1e-12);
    }
    auto g = LatLonGrid::parse("512x256");
    EXPECT_EQ(g.nphi, 512);
    EXPECT_EQ(g.ntheta, 256);
    EXPECT_EQ(g.to_string(), "512x256");
    EXPECT_THROW(LatLonGrid::parse("512"), std::invalid_argument);
    EXPECT_THROW(LatLonGrid::parse("5x12y"), std::invalid_argument);
    EXPECT_THROW(LatLonGrid(7, 8), std::invalid_argument);
    // Doubling ntheta keeps the old rows.
    LatLonGrid a(16, 8), b(16, 16);
    for (int r = 0; r < a.rows(); ++r) EXPECT_DOUBLE_EQ(a.theta(r), b.theta(2 * r + 1));
    // Quadrature of cos^2 theta.
    auto f = sample(LatLonGrid(64, 256), [](double th, double) { return std::cos(th) * std::cos(th); });
    EXPECT_NEAR(integrate(f), 4 * kPi / 3, 1e-3);
}

TEST(CriticalSets, Y21)
{
    auto cs = critical_zeros_and_extrema({2, 1});
    ASSERT_EQ(cs.s1.size(), 4u);
    EXPECT_NEAR(cs.s1[0].theta, kPi / 2, 1e-14);
    EXPECT_NEAR(cs.s1[1].phi, kPi, 1e-14);
    EXPECT_EQ(cs.s1Vertex[2], -1);
    EXPECT_EQ(cs.s1Vertex[3], -2);
    ASSERT_EQ(cs.s2.size(), 4u);
    // sin th cos th is extreme at pi/4.
    EXPECT_NEAR(cs.s2[0].theta, kPi / 4, 1e-12);
    EXPECT_NEAR(cs.s2[0].phi, kPi / 2, 1e-14);
    EXPECT_NEAR(min_pairwise_distance(cs), kPi / 4, 1e-12);
    EXPECT_LT(cs.maxGradient, 1e-10);
    EXPECT_THROW(critical_zeros_and_extrema({3, 0}), std::invalid_argument);
}

TEST(CriticalSets, CountsAndGradients)
{
    for (HarmonicIndex idx : {HarmonicIndex{5, 2}, HarmonicIndex{11, 4}, HarmonicIndex{23, 8}}) {
        auto cs = critical_zeros_and_extrema(idx);
        int lat = idx.n - idx.m;
        EXPECT_EQ(static_cast<int>(cs.s1.size()), lat * 2 * idx.m + 2);
        EXPECT_EQ(static_cast<int>(cs.s2.size()), (lat + 1) * 2 * idx.m);
        for (const auto& p : cs.s1)
            if (p.theta > 0 && p.theta < kPi) EXPECT_NEAR(eval_ynm(idx, p.theta, p.phi), 0, 1e-9);
    }
}

TEST(Bumps, CutoffDerivatives)
{
    const double a = 0.3, b = 0.7, h = 1e-5;
    for (double r = 0.31; r < 0.7; r += 0.013) {
        auto c = cutoff_profile(r, a, b);
        auto p = cutoff_profile(r + h, a, b), m = cutoff_profile(r - h, a, b);
        EXPECT_NEAR(c[1], (p[0] - m[0]) / (2 * h), 1e-6);
        EXPECT_NEAR(c[2], (p[1] - m[1]) / (2 * h), 1e-5);
        // Symmetric step: S(x) + S(1-x) = 1.
        EXPECT_NEAR(c[0] + cutoff_profile(a + b - r, a, b)[0], 1, 1e-14);
    }
    EXPECT_EQ(cutoff_profile(0.2, a, b)[0], 1);
    EXPECT_EQ(cutoff_profile(0.8, a, b)[0], 0);
}

TEST(Bumps, EigenfunctionInsideAndPsi)
{
    auto cs = critical_zeros_and_extrema({5, 2});
    BumpSet b(cs, default_cap_radii(cs));
    const double lam = b.eigenvalue(), U = b.radii().u, V = b.radii().v, h = 1e-4;
    EXPECT_EQ(lam, 30);
    // phi + Lap phi / lambda from the radial Laplacian f'' + cot r f'.
    for (double r = 0.05 * V; r < V; r += 0.037 * V) {
        double f = b.phi_radial(r), fp = b.phi_radial(r + h), fm = b.phi_radial(r - h);
        double lap = (fp - 2 * f + fm) / (h * h) + std::cos(r) / std::sin(r) * (fp - fm) / (2 * h);
        EXPECT_NEAR(b.phi_plus_laplacian(r), f + lap / lam, 1e-5 * (1 + std::abs(f + lap / lam))) << r;
        if (r < U) EXPECT_EQ(b.phi_plus_laplacian(r), 0);
    }
    EXPECT_THROW(BumpSet(cs, {0.4, 0.8}), std::invalid_argument);
    LatLonGrid g(256, 256);
    auto psi = b.psi_field(g);
    double mn = 1;
    for (double x : psi.v) mn = std::min(mn, x);
    EXPECT_GE(mn, -1e-15);
    EXPECT_NEAR(integrate(psi), b.psi_integral(), 2e-3);
    EXPECT_NEAR(integrate(b.phi_field(0, g)), b.phi_integral(), 2e-3);
    EXPECT_NEAR(b.psi(cs.s2[0]), 0, 1e-15);
    // Disjoint caps: a point in U of one cap lies outside V of all others.
    EXPECT_EQ(b.cap_of(cs.s2[3].xyz()), static_cast<int>(cs.s1.size()) + 3);
}

TEST(Perturbation, MeanZeroSource)
{
    auto model = model_for({5, 2});
    const auto& b = model.bumps();
    LatLonGrid g(512, 512);
    std::vector<ScalarField> phis;
    for (size_t p = 0; p < b.critical().s1.size(); ++p) phis.push_back(b.phi_field(static_cast<int>(p), g));
    double ms = compute_ms(model.signs(), b.psi_field(g), phis);
    EXPECT_NEAR(ms, model.ms(), 1e-3 * std::max(1.0, std::abs(model.ms())));
    // The source integrates to zero, so the cap masses balance.
    double total = 0;
    for (int q = 0; q < b.cap_count(); ++q) total += model.cap_mass(q);
    EXPECT_NEAR(total, 0, 1e-9);
    auto src = sample(g, [&](double th, double ph) { return model.at({th, ph}).source; });
    EXPECT_NEAR(integrate(src), 0, 2e-3);
}

TEST(Perturbation, DivergenceOfU0IsTheSource)
{
    auto model = model_for({5, 2});
    const auto& cs = model.bumps().critical();
    auto u0 = [&](double th, double ph) { return model.at({th, ph}).u0; };
    auto raw = [&](double th, double ph) { return model.raw_u0({th, ph}); };
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> T(0.1, kPi - 0.1), P(0, 2 * kPi), off(-1, 1);
    std::vector<SpherePoint> pts;
    for (int i = 0; i < 200; ++i) pts.push_back({T(rng), P(rng)});
    // Points in the annuli where the localisation acts.
    double U = model.bumps().radii().u;
    for (const auto& c : cs.s2)
        for (int k = 0; k < 6; ++k) pts.push_back({c.theta + 0.7 * U * off(rng), c.phi + 0.7 * U * off(rng)});
    for (const auto& p : pts) {
        auto L = model.at(p);
        double scale = 1 + std::abs(L.source);
        EXPECT_NEAR(divergence(u0, p.theta, p.phi), L.source, 1e-5 * scale) << p.theta << " " << p.phi;
        EXPECT_NEAR(divergence(raw, p.theta, p.phi), L.source, 1e-5 * scale);
    }
}

TEST(Perturbation, LocalisedFieldVanishesOnInnerCaps)
{
    auto model = model_for({5, 2});
    const auto& b = model.bumps();
    double U = b.radii().u;
    for (int q = 0; q < b.cap_count(); ++q) {
        SpherePoint c = SpherePoint::from_xyz(b.center(q));
        if (c.theta < 1e-9 || c.theta > kPi - 1e-9) continue;
        auto L = model.at({c.theta + 0.3 * U, c.phi});
        EXPECT_EQ(L.innerCap, q);
        EXPECT_EQ(L.u0[0], 0);
        EXPECT_EQ(L.u0[1], 0);
        EXPECT_NEAR(L.source, 0, 1e-12);
        // Stream function: the fields of the other caps are -J grad(eta), J w = x cross w.
        // The own field of cap q is radial, so compare the component along J of the radial direction.
        SpherePoint x{c.theta + 0.8 * U, c.phi + 0.2 * U};
        const double h = 1e-6;
        double gth = (model.stream(q, {x.theta + h, x.phi}) - model.stream(q, {x.theta - h, x.phi})) / (2 * h);
        double gph = (model.stream(q, {x.theta, x.phi + h}) - model.stream(q, {x.theta, x.phi - h})) / (2 * h) /
                     std::sin(x.theta);
        Vec2d expect{gph, -gth};
        // Tangential unit vector about the centre, in the (e_theta, e_phi) frame.
        double dth = x.theta - c.theta, dph = (x.phi - c.phi) * std::sin(x.theta);
        double n = std::hypot(dth, dph);
        auto raw = model.raw_u0(x);
        Vec2d tang{-dph / n, dth / n};
        EXPECT_NEAR(raw[0] * tang[0] + raw[1] * tang[1], expect[0] * tang[0] + expect[1] * tang[1], 5e-2 * (1 + std::hypot(raw[0], raw[1])))
            << q;
    }
}

TEST(Perturbation, SpectralSolveOfHarmonicSource)
{
    LatLonGrid g(64, 32);
    HarmonicIndex idx{2, 1};
    auto src = sample(g, [&](double th, double ph) { return eval_ynm(idx, th, ph); });
    auto sol = solve_u0(src);
    EXPECT_LT(sol.divergenceMismatch, 1e-10);
    double worst = 0;
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) {
            double th = g.theta(r), ph = g.phi(c);
            auto T = ynm_theta_part(idx, th);
            double gth = T.d1 * std::sin(ph), gph = T.value * std::cos(ph) / std::sin(th);
            size_t i = g.index(r, c);
            worst = std::max({worst, std::abs(sol.u0.th[i] + gth / 6), std::abs(sol.u0.ph[i] + gph / 6)});
        }
    EXPECT_LT(worst, 1e-10);
    auto bad = sample(g, [](double, double) { return 1.0; });
    EXPECT_THROW(solve_u0(bad), std::domain_error);
}

TEST(Perturbation, SpectralSolveAgreesWithRadialField)
{
    PairingAssignment p(resolve_poles(globe_graph({5, 2})).graph.vertex_count(), 0);
    p[0] = 1;
    auto model = model_for({5, 2}, &p);
    ASSERT_NE(model.ms(), 0);
    // The source has cap-sized features, so the truncated expansion needs a fine grid.
    LatLonGrid g(512, 512);
    // Compare the unlocalised field away from the caps, where it is smooth.
    auto src = sample(g, [&](double th, double ph) { return model.at({th, ph}).source; });
    double mean = integrate(src) / (4 * kPi);
    for (auto& x : src.v) x -= mean;
    auto sol = solve_u0(src);
    double worst = 0, scale = 0;
    for (int r = 0; r < g.rows(); r += 7)
        for (int c = 0; c < g.cols(); c += 5) {
            SpherePoint p{g.theta(r), g.phi(c)};
            auto u = model.raw_u0(p);
            size_t i = g.index(r, c);
            worst = std::max({worst, std::abs(u[0] - sol.u0.th[i]), std::abs(u[1] - sol.u0.ph[i])});
            scale = std::max({scale, std::abs(u[0]), std::abs(u[1])});
        }
    EXPECT_LT(worst, 1e-2 * scale);
}

TEST(Perturbation, SignAssignmentMatchesPairing)
{
    HarmonicIndex idx{5, 2};
    auto cs = critical_zeros_and_extrema(idx);
    auto gg = resolve_poles(globe_graph(idx));
    std::mt19937_64 rng(5);
    PairingAssignment p(gg.graph.vertex_count());
    for (auto& x : p) x = static_cast<int>(rng() % 2);
    auto s = sign_assignment(cs, gg, p);
    const double d = 1e-3;
    for (size_t i = 0; i < cs.s1.size(); ++i) {
        int v = cs.s1Vertex[i];
        if (v < 0) continue;
        // Sign of Y in the NE quadrant (smaller theta, larger phi).
        double ne = eval_ynm(idx, cs.s1[i].theta - d, cs.s1[i].phi + d);
        int expect = (ne > 0) == (p[v] == 0) ? 1 : -1;
        EXPECT_EQ(s[i], expect) << i;
    }
    // Flipping one pairing flips one sign.
    auto p2 = p;
    p2[cs.s1Vertex[3]] ^= 1;
    auto s2 = sign_assignment(cs, gg, p2);
    for (size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s[i] != s2[i], i == 3);
}

TEST(Assembly, MetricIdentitiesAndThreshold)
{
    auto model = model_for({5, 2});
    LatLonGrid g(128, 64);
    auto sys = assemble_perturbed(model, g, 0);
    EXPECT_GT(sys.threshold, 0);
    EXPECT_NEAR(sys.t, sys.threshold / 2, 1e-15);
    EXPECT_GT(sys.roundPoints, 0);
    for (int r = 0; r < g.rows(); ++r) {
        double s = std::sin(g.theta(r));
        for (int c = 0; c < g.cols(); ++c) {
            const Sym2& m = sys.gt.g[g.index(r, c)];
            EXPECT_NEAR(m.det(), s * s, 1e-9 * s * s);
            EXPECT_GT(m.xx, 0);
        }
    }
    EXPECT_THROW(assemble_perturbed(model, g, 1.01 * sys.threshold), std::domain_error);
}

TEST(FiniteDifference, LaplacianOfHarmonicOnRoundSphere)
{
    HarmonicIndex idx{3, 1};
    double prev = 0;
    for (int n : {64, 128}) {
        LatLonGrid g(2 * n, n);
        auto f = sample(g, [&](double th, double ph) { return eval_ynm(idx, th, ph); });
        double res = eigen_residual(MetricField::round(g), f, 12, 0.1745);
        EXPECT_LT(res, 5e-3);
        if (prev > 0) EXPECT_GT(prev / res, 3.5);
        prev = res;
    }
    LatLonGrid g(32, 16);
    auto L = laplacian(MetricField::round(g), ScalarField(g, 2.0));
    EXPECT_LT(max_abs(L), 1e-12);
}

TEST(FiniteDifference, LaplacianIsCoordinateInvariant)
{
    // A metric pulled back by phi -> phi + a(theta) has cross terms; Lap commutes with the pullback.
    LatLonGrid g(256, 128);
    auto a = [](double th) { return 0.3 * std::sin(th) * std::sin(th); };
    auto ap = [](double th) { return 0.6 * std::sin(th) * std::cos(th); };
    MetricField m(g);
    for (int r = 0; r < g.rows(); ++r) {
        double th = g.theta(r), s2 = std::sin(th) * std::sin(th), d = ap(th);
        for (int c = 0; c < g.cols(); ++c) m.g[g.index(r, c)] = {1 + s2 * d * d, s2 * d, s2};
    }
    HarmonicIndex idx{2, 1};
    auto f = sample(g, [&](double th, double ph) { return eval_ynm(idx, th, ph + a(th)); });
    EXPECT_LT(eigen_residual(m, f, 6, 0.1745), 1e-2);
    auto K = gaussian_curvature(m);
    double worst = 0;
    for (int r = 2; r + 2 < g.rows(); ++r)
        if (g.in_band(r, 0.1745))
            for (int c = 0; c < g.cols(); ++c) worst = std::max(worst, std::abs(K.at(r, c) - 1));
    EXPECT_LT(worst, 1e-2);
}

TEST(FiniteDifference, CurvatureOfRoundAndScaled)
{
    LatLonGrid g(128, 64);
    auto round = MetricField::round(g);
    auto scaled = round;
    for (auto& m : scaled.g) m = {4 * m.xx, 4 * m.xy, 4 * m.yy};
    auto K1 = gaussian_curvature(round), K4 = gaussian_curvature(scaled);
    for (int r = 2; r + 2 < g.rows(); ++r)
        if (g.in_band(r, 0.1745))
            for (int c = 0; c < g.cols(); c += 9) {
                EXPECT_NEAR(K1.at(r, c), 1, 1e-2);
                EXPECT_NEAR(K4.at(r, c), 0.25, 2.5e-3);
            }
}

TEST(Nodal, ExtractsSimpleConfigurations)
{
    LatLonGrid g(64, 32);
    auto one = extract_nodal_config(sample(g, [](double th, double ph) { return std::sin(th) * std::cos(ph); }));
    EXPECT_EQ(canonical_form(one), canonical_form(parse_ovals("A")));
    auto z = extract_nodal_config(sample(g, [](double th, double) { return std::cos(th); }));
    EXPECT_EQ(z.size(), 1);
    auto two = extract_nodal_config(sample(g, [](double th, double) { return std::cos(th) * std::cos(th) - 0.3; }));
    EXPECT_EQ(canonical_form(two), canonical_form(parse_ovals("A(B)")));
    auto pair = extract_nodal_config(sample(g, [](double th, double ph) {
        return std::sin(th) * std::sin(th) * std::cos(2 * ph) - 0.3;
    }));
    EXPECT_EQ(canonical_form(pair), canonical_form(parse_ovals("A B")));
    // Crossing nodal lines through grid nodes give alternating cells.
    LatLonGrid h(8, 4);
    EXPECT_THROW(extract_nodal_config(sample(h, [](double th, double ph) { return std::cos(th) * std::sin(ph + 0.3); })),
                 std::runtime_error);
    EXPECT_FALSE(nodal_segments(sample(g, [](double th, double) { return std::cos(th); })).empty());
}
