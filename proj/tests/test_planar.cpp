#include <gtest/gtest.h>

#include "nodalforge/harmonics.hpp"
#include "nodalforge/planar.hpp"

#include <map>
#include <random>

using namespace nodalforge;

namespace {

int euler(const EmbeddedGraph& g) { return g.vertex_count() - g.edge_count() + g.face_count(); }

PairingAssignment assignment_from_mask(int vertices, unsigned mask)
{
    PairingAssignment p(vertices);
    for (int v = 0; v < vertices; ++v) p[v] = (mask >> v) & 1;
    return p;
}

std::set<std::string> labels_of(const OvalConfig& c, unsigned mask)
{
    std::set<std::string> y;
    for (int i = 0; i < c.size(); ++i)
        if (mask >> i & 1) y.insert(c.label(i));
    return y;
}

// Single vertex with two loops: rotation [a, a', b, b'] or [a, b, a', b'].
EmbeddedGraph two_loop_graph(bool interleaved)
{
    EmbeddedGraph g;
    g.add_vertex();
    g.add_edge(0, 0);
    g.add_edge(0, 0);
    if (interleaved) g.set_rotation(0, {0, 2, 1, 3});
    else g.set_rotation(0, {0, 1, 2, 3});
    g.finalize();
    return g;
}

}  // namespace

TEST(Planar, GridCounts)
{
    auto g1 = grid_graph(1);
    EXPECT_EQ(g1.graph.vertex_count(), 4);
    EXPECT_EQ(g1.graph.edge_count(), 4);
    EXPECT_EQ(g1.graph.face_count(), 2);
    auto g5 = grid_graph(5);
    EXPECT_EQ(g5.graph.vertex_count(), 36);
    EXPECT_EQ(g5.graph.edge_count(), 60);
    EXPECT_EQ(g5.graph.face_count() - 1, 25);
    auto g2 = grid_graph(2);
    EXPECT_EQ(g2.graph.vertex_count(), 9);
    EXPECT_EQ(g2.graph.edge_count(), 12);
    EXPECT_EQ(euler(g2.graph), 2);
    EXPECT_THROW(grid_graph(0), std::invalid_argument);
}

TEST(Planar, GridCellsAndOuterFace)
{
    auto g = grid_graph(4);
    EXPECT_NO_THROW(g.graph.validate());
    std::set<int> faces;
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) {
            int f = g.cell_face(i, j);
            EXPECT_EQ(g.graph.face(f).size(), 4u);
            EXPECT_GT(g.graph.face_area(f), 0);
            EXPECT_EQ(g.face_cell(f), std::make_pair(i, j));
            faces.insert(f);
        }
    EXPECT_EQ(faces.size(), 16u);
    EXPECT_FALSE(faces.count(g.graph.outer_face()));
    EXPECT_LT(g.graph.face_area(g.graph.outer_face()), 0);
}

TEST(Planar, DrawingToConfigExamples)
{
    auto g = grid_graph(1);
    Drawing empty = make_grid_drawing(g);
    EXPECT_TRUE(drawing_to_config(empty).empty());
    Drawing square = empty;
    square.used.assign(4, 1);
    EXPECT_EQ(drawing_to_config(square).size(), 1);
    auto fig = drawing_to_config(figure1_drawing());
    EXPECT_TRUE(is_equivalent(fig, parse_ovals("A(B C) D E")));
    EXPECT_EQ(fig.size(), 5);
}

TEST(Planar, DrawingRejectsNonRegular)
{
    auto g = grid_graph(2);
    Drawing d = make_grid_drawing(g);
    d.used[g.hedge(0, 0)] = 1;
    EXPECT_THROW(drawing_to_config(d), std::invalid_argument);
}

TEST(Planar, DrawingFormatRoundTrip)
{
    Drawing d = figure1_drawing();
    Drawing e = parse_drawing(format_drawing(d));
    EXPECT_EQ(e.gridN, 5);
    EXPECT_EQ(e.used, d.used);
}

TEST(Planar, NaiveDrawingRealizesConfig)
{
    for (int n = 0; n <= 5; ++n)
        for (auto& c : enumerate_forests(n)) {
            Drawing d = naive_drawing(c);
            EXPECT_TRUE(is_equivalent(drawing_to_config(d), c)) << to_string(c);
            // The drawing keeps the rooted nesting, not just the unrooted class.
            EXPECT_EQ(canonical_form(drawing_to_config(d)), canonical_form(c));
        }
    EXPECT_EQ(naive_drawing(parse_ovals("A")).gridN, 1);
    EXPECT_EQ(naive_drawing(parse_ovals("A(B C) D E")).gridN, 5);
}

TEST(Planar, OctahedronIsFourRegularSphereMap)
{
    auto g = octahedron_graph();
    EXPECT_EQ(g.vertex_count(), 6);
    EXPECT_EQ(g.edge_count(), 12);
    EXPECT_EQ(g.face_count(), 8);
    EXPECT_NO_THROW(g.validate());
    for (int v = 0; v < 6; ++v) EXPECT_EQ(g.degree(v), 4);
    for (int f = 0; f < g.face_count(); ++f) EXPECT_EQ(g.face(f).size(), 3u);
}

TEST(Planar, PerturbStrandsPartitionEdges)
{
    auto g = octahedron_graph();
    std::set<std::string> reachable;
    for (unsigned mask = 0; mask < 64; ++mask) {
        auto cs = perturb(g, assignment_from_mask(6, mask));
        size_t total = 0;
        for (auto& c : cs.cycles) total += c.size();
        EXPECT_EQ(total, 12u);
        std::vector<int> seen(12, 0);
        for (auto& c : cs.cycles)
            for (int e : c) ++seen[e];
        for (int s : seen) EXPECT_EQ(s, 1);
        reachable.insert(canonical_form(cs.config));
    }
    EXPECT_GE(reachable.size(), 2u);
}

TEST(Planar, PerturbTwoLoops)
{
    // Nested loops at one vertex: one pairing keeps them apart, the other merges them.
    auto g = two_loop_graph(false);
    std::set<int> counts;
    for (int p = 0; p < 2; ++p) counts.insert(perturb(g, {p}).config.size());
    EXPECT_EQ(counts, (std::set<int>{1, 2}));
}

TEST(Planar, PerturbGlobe21)
{
    auto G = resolve_poles(globe_graph({2, 1}));
    // Both crossings keep the equator apart from the meridian circle's halves: 2 ovals.
    std::set<int> sizes;
    for (unsigned mask = 0; mask < 4; ++mask) sizes.insert(perturb(G.graph, assignment_from_mask(2, mask)).config.size());
    EXPECT_TRUE(sizes.count(2));
    EXPECT_TRUE(sizes.count(1));
}

TEST(Planar, PerturbRejectsNonFourRegular)
{
    auto g = grid_graph(2);
    EXPECT_THROW(perturb(g.graph, PairingAssignment(g.graph.vertex_count(), 0)), std::invalid_argument);
}

TEST(Planar, ReduceAllOvalsIsIdentity)
{
    auto g = octahedron_graph();
    for (unsigned mask = 0; mask < 64; ++mask) {
        auto x = assignment_from_mask(6, mask);
        auto cs = perturb(g, x);
        auto y = labels_of(cs.config, (1u << cs.config.size()) - 1);
        EXPECT_EQ(reduce(g, x, y), x);
    }
}

TEST(Planar, ReduceOctahedronAgainstBruteForce)
{
    auto g = octahedron_graph();
    std::set<std::string> reachable;
    for (unsigned mask = 0; mask < 64; ++mask) reachable.insert(canonical_form(perturb(g, assignment_from_mask(6, mask)).config));
    for (unsigned mask = 0; mask < 64; ++mask) {
        auto x = assignment_from_mask(6, mask);
        auto cs = perturb(g, x);
        int k = cs.config.size();
        for (unsigned ym = 1; ym < (1u << k); ++ym) {
            auto y = labels_of(cs.config, ym);
            if (!nicely_contains(cs.config, y)) {
                EXPECT_THROW(reduce(g, x, y), std::invalid_argument);
                continue;
            }
            std::vector<int> keep;
            for (int i = 0; i < k; ++i)
                if (ym >> i & 1) keep.push_back(i);
            auto target = sub_configuration(cs.config, keep);
            auto out = reduce(g, x, y);
            auto got = perturb(g, out).config;
            EXPECT_TRUE(is_equivalent(got, target));
            // The reduced configuration is a perturbation, so brute force reaches it too.
            EXPECT_TRUE(reachable.count(canonical_form(target)));
        }
    }
}

TEST(Planar, ReduceSingletonOnGlobe42)
{
    auto G = resolve_poles(globe_graph({4, 2}));
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        PairingAssignment x(G.graph.vertex_count());
        for (auto& v : x) v = static_cast<int>(rng() & 1);
        auto cs = perturb(G.graph, x);
        for (int i = 0; i < cs.config.size(); ++i) {
            auto out = reduce(G.graph, x, {cs.config.label(i)});
            EXPECT_EQ(perturb(G.graph, out).config.size(), 1);
        }
    }
}

TEST(Planar, ReduceRejectsEmptyTarget)
{
    auto g = octahedron_graph();
    EXPECT_THROW(reduce(g, PairingAssignment(6, 0), {}), std::invalid_argument);
}

TEST(Planar, ChessboardExamples)
{
    auto one = parse_ovals("A");
    auto r1 = chessboard_redraw(one, naive_drawing(one), 4);
    EXPECT_EQ(r1.gridN, 6);
    EXPECT_EQ(chessboard_misaligned_edges(r1), 0);
    EXPECT_TRUE(is_equivalent(drawing_to_config(r1), one));

    auto nested = parse_ovals("A(B)");
    auto src = naive_drawing(nested);
    EXPECT_EQ(src.gridN, 3);
    auto r2 = chessboard_redraw(nested, src, 4);
    EXPECT_EQ(r2.gridN, 14);
    EXPECT_EQ(chessboard_misaligned_edges(r2), 0);
    EXPECT_TRUE(is_equivalent(drawing_to_config(r2), nested));

    OvalConfig none;
    auto r0 = chessboard_redraw(none, naive_drawing(none), 4);
    EXPECT_EQ(r0.edge_total(), 0);
    EXPECT_THROW(chessboard_redraw(one, naive_drawing(one), 3), std::invalid_argument);
}

TEST(Planar, ChessboardFigure1)
{
    auto fig = parse_ovals("A(B C) D E");
    auto r = chessboard_redraw(fig, figure1_drawing(), 4);
    EXPECT_EQ(r.gridN, 22);
    EXPECT_EQ(chessboard_misaligned_edges(r), 0);
    EXPECT_TRUE(is_equivalent(drawing_to_config(r), fig));
}

TEST(Planar, EmbedGridInGlobe)
{
    auto G42 = resolve_poles(globe_graph({4, 2}));
    auto h1 = grid_graph(1);
    auto emb = embed_grid_in_globe(h1, G42);
    EXPECT_EQ(emb.vertexMap.size(), 4u);

    auto G84 = resolve_poles(globe_graph({8, 4}));
    auto h2 = grid_graph(2);
    auto e2 = embed_grid_in_globe(h2, G84);
    // Induced: grid adjacency equals globe adjacency on the window.
    for (int a = 0; a < h2.graph.vertex_count(); ++a)
        for (int b = 0; b < h2.graph.vertex_count(); ++b) {
            if (a == b) continue;
            bool gridAdj = h2.edge_between(a, b) >= 0;
            bool globeAdj = false;
            for (int h : G84.graph.rotation(e2.vertexMap[a]))
                if (G84.graph.head(h) == e2.vertexMap[b]) globeAdj = true;
            EXPECT_EQ(gridAdj, globeAdj);
        }
    for (int e = 0; e < h2.graph.edge_count(); ++e) {
        int ge = e2.edgeMap[e];
        EXPECT_EQ(G84.graph.tail(2 * ge), e2.vertexMap[h2.graph.tail(2 * e)]);
        EXPECT_EQ(G84.graph.head(2 * ge), e2.vertexMap[h2.graph.head(2 * e)]);
    }
    // 3x3 grid needs 4 latitude rows.
    EXPECT_THROW(embed_grid_in_globe(grid_graph(3), G42), std::invalid_argument);
}

TEST(Planar, GridFacesMapToGlobeFaces)
{
    auto G = resolve_poles(globe_graph({11, 4}));
    auto h = grid_graph(6);
    auto emb = embed_grid_in_globe(h, G);
    for (int j = 0; j < 6; ++j)
        for (int i = 0; i < 6; ++i) {
            int f = h.cell_face(i, j);
            std::set<int> gf;
            for (int he : h.graph.face(f)) {
                int ge = emb.edgeMap[he >> 1];
                gf.insert(G.graph.face_of(2 * ge + (he & 1)));
            }
            EXPECT_EQ(gf.size(), 1u);
            EXPECT_EQ(G.graph.face(*gf.begin()).size(), 4u);
        }
}

TEST(Planar, ChoosePairingsContaining)
{
    auto G = resolve_poles(globe_graph({4, 2}));
    Drawing none;
    none.graph = G.graph;
    none.used.assign(G.graph.edge_count(), 0);
    auto p0 = choose_pairings_containing(G.graph, none);
    for (int v : p0) EXPECT_EQ(v, 0);

    auto h = grid_graph(1);
    Drawing sq = make_grid_drawing(h);
    sq.used.assign(4, 1);
    auto emb = embed_grid_in_globe(h, G);
    auto d = map_drawing(sq, emb, G.graph);
    auto p = choose_pairings_containing(G.graph, d);
    auto cs = perturb(G.graph, p);
    auto target = drawing_to_config(d);
    EXPECT_EQ(target.size(), 1);
    // The drawn square is one of the curves.
    std::set<int> curves;
    for (int e = 0; e < G.graph.edge_count(); ++e)
        if (d.used[e]) curves.insert(cs.curveOfEdge[e]);
    EXPECT_EQ(curves.size(), 1u);
    EXPECT_TRUE(nicely_contains(cs.config, {"c" + std::to_string(*curves.begin())}));
}

TEST(Planar, ChoosePairingsRejectsStraightThrough)
{
    auto G = resolve_poles(globe_graph({6, 2}));
    Drawing d;
    d.graph = G.graph;
    d.used.assign(G.graph.edge_count(), 0);
    // A full latitude circle passes straight through every crossing.
    for (int k = 0; k < G.cols(); ++k) d.used[G.lat_edge(1, k)] = 1;
    EXPECT_THROW(choose_pairings_containing(G.graph, d), std::invalid_argument);
}
