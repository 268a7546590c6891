#include <gtest/gtest.h>

#include "nodalforge/blueprint.hpp"

#include <random>

using namespace nodalforge;

namespace {

Blueprint single_edge()
{
    Blueprint bp;
    bp.add_edge(0, 1);
    return bp;
}

// Two copies of the line glued away from 0: one left edge, one right edge, two nodes.
Blueprint two_origins()
{
    Blueprint bp;
    bp.add_edge(-1, 0);
    bp.add_edge(0, 1);
    bp.add_node(0, 0, 1);
    bp.add_node(0, 0, 1);
    return bp;
}

// Branching line: edge (-1,0) splits into two edges (0,1).
Blueprint branching()
{
    Blueprint bp;
    bp.add_edge(-1, 0);
    bp.add_edge(0, 1);
    bp.add_edge(0, 1);
    bp.add_node(0, 0, 1);
    bp.add_node(0, 0, 2);
    return bp;
}

SimpleSubset with_segment(const Blueprint& bp, int e, Segment s)
{
    auto c = SimpleSubset::empty(bp);
    c.onEdge[e].push_back(s);
    return c;
}

int brute_force_dim(const Blueprint& bp, std::mt19937_64& rng, int samples)
{
    std::vector<std::vector<Rational>> rows;
    for (int i = 0; i < samples; ++i) rows.push_back(chain_symbols(bp, d_chain(bp, random_simple_subset(bp, rng))));
    // Whole-edge and end segments so every generator is present with high probability.
    for (int e = 0; e < bp.edge_count(); ++e) {
        Rational m = (bp.edge(e).a + bp.edge(e).b) / 2;
        rows.push_back(chain_symbols(bp, d_chain(bp, with_segment(bp, e, {bp.edge(e).a, m, false, true}))));
        rows.push_back(chain_symbols(bp, d_chain(bp, with_segment(bp, e, {m, bp.edge(e).b, true, false}))));
    }
    return bp.edge_count() + bp.node_count() - rational_rank(rows);
}

}  // namespace

TEST(Lp, SmallKnownOptimum)
{
    // max x + y s.t. x + 2y <= 4, 3x + y <= 6, x,y >= 0 -> (8/5, 6/5).
    LinearProgram lp(2);
    lp.cost = {-1, -1};
    lp.add_row({1, 2}, Relation::LessEq, 4);
    lp.add_row({3, 1}, Relation::LessEq, 6);
    auto r = solve_lp(lp);
    ASSERT_EQ(r.status, LpStatus::Optimal);
    EXPECT_EQ(r.x[0], Rational(8, 5));
    EXPECT_EQ(r.x[1], Rational(6, 5));
    LinearProgram bad(1);
    bad.add_row({1}, Relation::LessEq, -1);
    EXPECT_EQ(solve_lp(bad).status, LpStatus::Infeasible);
    LinearProgram unb(1);
    unb.cost = {-1};
    EXPECT_EQ(solve_lp(unb).status, LpStatus::Unbounded);
}

TEST(Lp, MatchesVertexEnumeration)
{
    // Random bounded 2D programs against enumeration of all constraint-pair vertices.
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> coef(-5, 5);
    for (int trial = 0; trial < 200; ++trial) {
        LinearProgram lp(2);
        lp.freeVar = {true, true};
        lp.cost = {Rational(coef(rng)), Rational(coef(rng))};
        std::vector<std::array<Rational, 3>> cons = {{1, 0, 5}, {-1, 0, 5}, {0, 1, 5}, {0, -1, 5}};
        for (int k = 0; k < 4; ++k) cons.push_back({Rational(coef(rng)), Rational(coef(rng)), Rational(coef(rng) + 3)});
        for (auto& c : cons) lp.add_row({c[0], c[1]}, Relation::LessEq, c[2]);
        auto r = solve_lp(lp);
        bool any = false;
        Rational best;
        for (size_t i = 0; i < cons.size(); ++i)
            for (size_t j = i + 1; j < cons.size(); ++j) {
                Rational det = cons[i][0] * cons[j][1] - cons[i][1] * cons[j][0];
                if (det == 0) continue;
                Rational x = (cons[i][2] * cons[j][1] - cons[i][1] * cons[j][2]) / det;
                Rational y = (cons[i][0] * cons[j][2] - cons[i][2] * cons[j][0]) / det;
                bool ok = true;
                for (auto& c : cons)
                    if (c[0] * x + c[1] * y > c[2]) ok = false;
                if (!ok) continue;
                Rational v = lp.cost[0] * x + lp.cost[1] * y;
                if (!any || v < best) best = v;
                any = true;
            }
        if (!any) {
            EXPECT_EQ(r.status, LpStatus::Infeasible);
        } else {
            ASSERT_EQ(r.status, LpStatus::Optimal);
            EXPECT_EQ(r.value, best);
        }
    }
}

TEST(Blueprint, ValidateRejectsRegularNode)
{
    Blueprint bp;
    bp.add_edge(0, 1);
    bp.add_edge(1, 2);
    bp.add_node(1, 0, 1);
    EXPECT_THROW(bp.validate(), std::invalid_argument);
    EXPECT_THROW(bp.add_node(3, 0, 1), std::invalid_argument);
    EXPECT_THROW(bp.add_edge(2, 2), std::invalid_argument);
    EXPECT_NO_THROW(two_origins().validate());
}

TEST(Blueprint, EquivalenceClasses)
{
    auto bp = two_origins();
    // Both nodes share both attachments.
    ASSERT_EQ(bp.plus_classes().size(), 1u);
    EXPECT_EQ(bp.plus_classes()[0].size(), 2u);
    ASSERT_EQ(bp.minus_classes().size(), 1u);
    auto br = branching();
    EXPECT_EQ(br.plus_classes().size(), 2u);   // different right attachments
    EXPECT_EQ(br.minus_classes().size(), 1u);  // shared left attachment
}

TEST(Blueprint, DcFigureCases)
{
    auto bp = single_edge();
    Rational p(1, 2);
    BpPoint x{0, -1, p};
    auto both = with_segment(bp, 0, {Rational(1, 4), Rational(3, 4), true, true});
    EXPECT_EQ(d_c(bp, both, x), 0);
    auto rightOnly = with_segment(bp, 0, {p, Rational(3, 4), false, true});
    EXPECT_EQ(d_c(bp, rightOnly, x), -1);
    auto leftOnly = with_segment(bp, 0, {Rational(1, 4), p, true, false});
    EXPECT_EQ(d_c(bp, leftOnly, x), 1);
    EXPECT_EQ(d_c(bp, SimpleSubset::empty(bp), x), 0);
    // Flipping membership of the point itself leaves d_C unchanged.
    auto rightClosed = with_segment(bp, 0, {p, Rational(3, 4), true, true});
    EXPECT_EQ(d_c(bp, rightClosed, x), -1);
    auto punctured = SimpleSubset::empty(bp);
    punctured.onEdge[0] = {{Rational(1, 4), p, true, false}, {p, Rational(3, 4), false, true}};
    EXPECT_EQ(d_c(bp, punctured, x), 0);
}

TEST(Blueprint, DcAtNodes)
{
    auto bp = branching();
    auto c = with_segment(bp, 0, {Rational(-1, 2), 0, true, false});
    auto chain = d_chain(bp, c);
    EXPECT_EQ(chain.size(), 3u);
    EXPECT_EQ(chain.at(BpPoint{-1, 0, 0}), 1);
    EXPECT_EQ(chain.at(BpPoint{-1, 1, 0}), 1);
    c.onEdge[1].push_back({0, Rational(1, 2), false, true});
    EXPECT_EQ(d_c(bp, c, {-1, 0, 0}), 0);
    EXPECT_EQ(d_c(bp, c, {-1, 1, 0}), 1);
}

TEST(Blueprint, DcAdditiveOnDisjointSets)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        auto bp = random_blueprint(rng, 4);
        auto c = random_simple_subset(bp, rng);
        // Split each edge's segments into two disjoint subsets.
        auto a = SimpleSubset::empty(bp), b = SimpleSubset::empty(bp);
        for (int e = 0; e < bp.edge_count(); ++e)
            for (size_t k = 0; k < c.onEdge[e].size(); ++k) (k % 2 ? a : b).onEdge[e].push_back(c.onEdge[e][k]);
        auto dc = d_chain(bp, c), da = d_chain(bp, a), db = d_chain(bp, b);
        std::map<BpPoint, int> sum = da;
        for (auto& [x, v] : db) sum[x] += v;
        for (auto it = sum.begin(); it != sum.end();)
            it = it->second == 0 ? sum.erase(it) : std::next(it);
        EXPECT_EQ(sum, dc);
    }
}

TEST(Blueprint, HomologyExamples)
{
    // Segments reaching an open end have a one-sided boundary, so a bare edge is trivial in H.
    EXPECT_EQ(homology_reduce(single_edge()).dim, 0);
    Blueprint three;
    for (int k = 0; k < 3; ++k) three.add_edge(k, k + 1);
    EXPECT_EQ(homology_reduce(three).dim, 3 * homology_reduce(single_edge()).dim);
    auto h = homology_reduce(two_origins());
    EXPECT_EQ(h.dim, 1);
    std::mt19937_64 rng(1);
    EXPECT_EQ(brute_force_dim(two_origins(), rng, 200), 1);
    // The surviving class separates the two origins.
    EXPECT_NE(h.classOf[2], h.classOf[3]);
}

TEST(Blueprint, HomologyMatchesBruteForceRank)
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        auto bp = random_blueprint(rng, 1 + trial % 5);
        auto h = homology_reduce(bp);
        EXPECT_EQ(h.dim, brute_force_dim(bp, rng, 400));
        // Every relation maps to zero in H.
        for (const auto& rel : h.relations) {
            std::vector<Rational> img(h.dim, 0);
            for (size_t s = 0; s < rel.size(); ++s)
                for (int k = 0; k < h.dim; ++k) img[k] += rel[s] * h.classOf[s][k];
            for (auto& v : img) EXPECT_EQ(v, 0);
        }
    }
}

TEST(Blueprint, BoundaryChainsAreRelations)
{
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        auto bp = random_blueprint(rng, 3);
        auto h = homology_reduce(bp);
        for (int i = 0; i < 50; ++i) {
            auto v = chain_symbols(bp, d_chain(bp, random_simple_subset(bp, rng)));
            std::vector<Rational> img(h.dim, 0);
            for (size_t s = 0; s < v.size(); ++s)
                for (int k = 0; k < h.dim; ++k) img[k] += v[s] * h.classOf[s][k];
            for (auto& x : img) EXPECT_EQ(x, 0);
        }
    }
}

TEST(Blueprint, SolvePhiSingleEdge)
{
    auto bp = single_edge();
    // Phi(t) = t fails on the clopen set X itself (F(X) = 1).
    SetFunction lin{{PiecewisePoly::polynomial(0, 1, {0, 1})}};
    EXPECT_THROW(solve_phi(bp, lin), BlueprintInfeasible);
    // On closed interior segments any phi = t + const fits.
    PointFunction shifted{lin.cumulative, {Rational(1)}, {}};
    auto seg = with_segment(bp, 0, {Rational(1, 5), Rational(3, 5), true, true});
    EXPECT_EQ(shifted.boundary_sum(bp, seg), lin(seg));
    EXPECT_EQ(shifted({0, -1, Rational(3, 5)}) - shifted({0, -1, Rational(1, 5)}), lin(seg));

    SetFunction bump{{PiecewisePoly::polynomial(0, 1, {0, 1, -1})}};
    auto sol = solve_phi(bp, bump);
    EXPECT_EQ(sol.phi.shift[0], 0);
    for (auto t : {Rational(1, 7), Rational(1, 2), Rational(9, 10)}) EXPECT_EQ(sol.phi({0, -1, t}), t * (1 - t));
    for (auto& c : single_segment_family(bp, bump)) EXPECT_EQ(sol.phi.boundary_sum(bp, c), bump(c));
}

TEST(Blueprint, SolvePhiHiddenRoundTrip)
{
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 12; ++trial) {
        auto bp = random_blueprint(rng, 1 + trial % 4);
        auto inst = hidden_phi_instance(bp, rng);
        auto sol = solve_phi(bp, inst.f);
        EXPECT_GT(sol.slack, 0);
        for (auto v : sol.phi.nodeValue) EXPECT_GT(v, 0);
        for (auto& x : sol.constraintPoints) EXPECT_GT(sol.phi(x), 0);
        for (auto& c : single_segment_family(bp, inst.f)) ASSERT_EQ(sol.phi.boundary_sum(bp, c), inst.f(c));
        for (int i = 0; i < 1000; ++i) {
            auto c = random_simple_subset(bp, rng);
            ASSERT_EQ(sol.phi.boundary_sum(bp, c), inst.f(c));
        }
    }
}

TEST(Blueprint, SolvePhiNegatedInstance)
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        auto bp = random_blueprint(rng, 1 + trial % 3);
        auto inst = hidden_phi_instance(bp, rng, true);
        try {
            solve_phi(bp, inst.f);
            FAIL() << "dip was accepted";
        } catch (const BlueprintInfeasible& ex) {
            if (ex.witness) {
                auto chain = d_chain(bp, *ex.witness);
                EXPECT_FALSE(chain.empty());
                for (auto& [x, v] : chain) EXPECT_EQ(v, 1);
                EXPECT_LE(inst.f(*ex.witness), 0);
            }
        }
    }
}

TEST(Blueprint, InteriorMinimaCubic)
{
    // Phi = t^3 - t on (-2, 2): local minimum at 1/sqrt(3), value -2/(3 sqrt 3).
    auto p = PiecewisePoly::polynomial(-2, 2, {0, -1, 0, 1});
    auto mins = interior_minima(p, false, false);
    double truth = -2.0 / (3.0 * std::sqrt(3.0));
    bool found = false;
    for (auto& m : mins)
        if (!m.exact && std::abs(m.at.get_d() - 1 / std::sqrt(3.0)) < 1e-9) {
            EXPECT_LE(m.value.get_d(), truth + 1e-15);
            EXPECT_GT(m.value.get_d(), truth - 1e-12);
            found = true;
        }
    EXPECT_TRUE(found);
    // Increasing into an open right end dips below the limit.
    auto up = PiecewisePoly::polynomial(0, 1, {0, 1});
    auto near = interior_minima(up, false, true);
    ASSERT_EQ(near.size(), 1u);
    EXPECT_LT(near[0].value, 1);
}

TEST(Blueprint, FormatRoundTrip)
{
    std::mt19937_64 rng(4);
    auto bp = random_blueprint(rng, 3);
    auto inst = hidden_phi_instance(bp, rng);
    SetFunction f2;
    auto bp2 = parse_blueprint(format_blueprint(bp, &inst.f), &f2);
    EXPECT_EQ(format_blueprint(bp2, &f2), format_blueprint(bp, &inst.f));
    EXPECT_THROW(parse_blueprint("edge 0 1 0\n"), std::invalid_argument);
    EXPECT_THROW(parse_blueprint("edge 0 0 1\nnode 0 1 0 7\n"), std::invalid_argument);
    SetFunction f3;
    auto bp3 = parse_blueprint("edge 0 0 1\npiece 0 0 0.5 0 1\npiece 0 0.5 1 1 -1\n", &f3);
    EXPECT_EQ(f3.cumulative[0](Rational(1, 2)), Rational(1, 2));
    EXPECT_NO_THROW(solve_phi(bp3, f3));
}
