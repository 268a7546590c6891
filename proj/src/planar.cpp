#include "nodalforge/planar.hpp"
#include "nodalforge/harmonics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nodalforge {

int EmbeddedGraph::add_vertex(Vec2 pos)
{
    pos_.push_back(pos);
    rot_.emplace_back();
    return vertex_count() - 1;
}

int EmbeddedGraph::add_edge(int u, int v)
{
    if (u < 0 || v < 0 || u >= vertex_count() || v >= vertex_count())
        throw std::invalid_argument("edge endpoint out of range");
    int e = edge_count();
    tail_.push_back(u);
    tail_.push_back(v);
    rot_[u].push_back(2 * e);
    rot_[v].push_back(2 * e + 1);
    return e;
}

void EmbeddedGraph::set_rotation(int v, std::vector<int> outgoing)
{
    auto a = outgoing, b = rot_[v];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw std::invalid_argument("rotation must list exactly the half-edges leaving the vertex");
    rot_[v] = std::move(outgoing);
}

void EmbeddedGraph::sort_rotations_by_angle()
{
    for (int v = 0; v < vertex_count(); ++v) {
        auto angle = [&](int h) {
            Vec2 a = pos_[tail(h)], b = pos_[head(h)];
            return std::atan2(-(b.y - a.y), b.x - a.x);
        };
        std::sort(rot_[v].begin(), rot_[v].end(), [&](int g, int h) { return angle(g) < angle(h); });
    }
}

int EmbeddedGraph::rot_next(int h) const
{
    const auto& r = rot_[tail(h)];
    return r[(rotIndex_[h] + 1) % r.size()];
}

int EmbeddedGraph::rot_prev(int h) const
{
    const auto& r = rot_[tail(h)];
    return r[(rotIndex_[h] + r.size() - 1) % r.size()];
}

void EmbeddedGraph::finalize()
{
    rotIndex_.assign(half_edge_count(), -1);
    for (int v = 0; v < vertex_count(); ++v)
        for (int i = 0; i < degree(v); ++i) {
            int h = rot_[v][i];
            if (tail(h) != v || rotIndex_[h] != -1) throw std::logic_error("corrupt rotation system");
            rotIndex_[h] = i;
        }
    faceOf_.assign(half_edge_count(), -1);
    faces_.clear();
    for (int h0 = 0; h0 < half_edge_count(); ++h0) {
        if (faceOf_[h0] >= 0) continue;
        int f = face_count();
        faces_.emplace_back();
        for (int h = h0; faceOf_[h] < 0; h = face_next(h)) {
            faceOf_[h] = f;
            faces_[f].push_back(h);
        }
    }
    if (outerHalf_ >= half_edge_count()) outerHalf_ = 0;
}

void EmbeddedGraph::set_outer_half_edge(int h)
{
    if (h < 0 || h >= half_edge_count()) throw std::invalid_argument("outer half-edge out of range");
    outerHalf_ = h;
}

double EmbeddedGraph::face_area(int f) const
{
    double a = 0;
    for (int h : faces_[f]) {
        Vec2 p = pos_[tail(h)], q = pos_[head(h)];
        a += p.x * (-q.y) - (-p.y) * q.x;
    }
    return a / 2;
}

void EmbeddedGraph::choose_outer_by_area()
{
    for (int f = 0; f < face_count(); ++f)
        if (face_area(f) < 0) {
            outerHalf_ = faces_[f].front();
            return;
        }
    throw std::logic_error("no face with negative area; not a straight-line embedding");
}

bool EmbeddedGraph::connected() const
{
    if (vertex_count() == 0) return true;
    std::vector<char> seen(vertex_count(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int h : rot_[v]) {
            int w = head(h);
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                stack.push_back(w);
            }
        }
    }
    return count == vertex_count();
}

void EmbeddedGraph::validate() const
{
    if (static_cast<int>(rotIndex_.size()) != half_edge_count()) throw std::logic_error("graph not finalized");
    for (int h = 0; h < half_edge_count(); ++h)
        if (rot_[tail(h)][rotIndex_[h]] != h) throw std::logic_error("rotation index mismatch");
    if (!connected()) throw std::logic_error("graph is not connected");
    if (vertex_count() - edge_count() + face_count() != 2)
        throw std::logic_error("Euler check failed: V - E + F = " +
                               std::to_string(vertex_count() - edge_count() + face_count()));
}

int GridGraph::cell_face(int i, int j) const { return graph.face_of(2 * hedge(i, j) + 1); }

std::pair<int, int> GridGraph::face_cell(int f) const
{
    if (f == graph.outer_face()) return {-1, -1};
    int minx = n, miny = n;
    for (int g : graph.face(f)) {
        Vec2 p = graph.pos(graph.tail(g));
        minx = std::min(minx, static_cast<int>(p.x));
        miny = std::min(miny, static_cast<int>(p.y));
    }
    return {minx, miny};
}

int GridGraph::edge_between(int u, int v) const
{
    for (int h : graph.rotation(u))
        if (graph.head(h) == v) return EmbeddedGraph::edge_of(h);
    return -1;
}

GridGraph grid_graph(int n)
{
    if (n <= 0) throw std::invalid_argument("grid size must be positive");
    GridGraph g;
    g.n = n;
    for (int y = 0; y <= n; ++y)
        for (int x = 0; x <= n; ++x) g.graph.add_vertex({double(x), double(y)});
    for (int y = 0; y <= n; ++y)
        for (int x = 0; x < n; ++x) g.graph.add_edge(g.vertex(x, y), g.vertex(x + 1, y));
    for (int x = 0; x <= n; ++x)
        for (int y = 0; y < n; ++y) g.graph.add_edge(g.vertex(x, y), g.vertex(x, y + 1));
    g.graph.sort_rotations_by_angle();
    g.graph.finalize();
    g.graph.set_outer_half_edge(2 * g.hedge(0, 0));
    return g;
}

int Drawing::edge_total() const { return static_cast<int>(std::count(used.begin(), used.end(), 1)); }

std::vector<std::vector<int>> Drawing::cycles() const
{
    const auto& g = graph;
    for (int v = 0; v < g.vertex_count(); ++v) {
        int k = 0;
        for (int h : g.rotation(v)) k += used[EmbeddedGraph::edge_of(h)];
        if (k != 0 && k != 2)
            throw std::invalid_argument("drawing is not 2-regular at vertex " + std::to_string(v));
    }
    std::vector<char> seen(g.edge_count(), 0);
    std::vector<std::vector<int>> out;
    for (int e = 0; e < g.edge_count(); ++e) {
        if (!used[e] || seen[e]) continue;
        std::vector<int> cyc;
        int h = 2 * e;
        while (!seen[EmbeddedGraph::edge_of(h)]) {
            seen[EmbeddedGraph::edge_of(h)] = 1;
            cyc.push_back(EmbeddedGraph::edge_of(h));
            int v = g.head(h), next = -1;
            for (int o : g.rotation(v))
                if (o != (h ^ 1) && used[EmbeddedGraph::edge_of(o)]) next = o;
            h = next;
        }
        out.push_back(std::move(cyc));
    }
    return out;
}

Drawing make_grid_drawing(const GridGraph& grid)
{
    Drawing d;
    d.graph = grid.graph;
    d.used.assign(grid.graph.edge_count(), 0);
    d.gridN = grid.n;
    return d;
}

int pairing_partner(const EmbeddedGraph& g, const PairingAssignment& p, int h)
{
    int v = g.tail(h);
    if (g.degree(v) != 4) throw std::invalid_argument("vertex " + std::to_string(v) + " is not 4-valent");
    int i = g.rotation_index(h);
    int j = p[v] == 0 ? (i ^ 1) : 3 - i;
    return g.rotation(v)[j];
}

int pairing_joining(const EmbeddedGraph& g, int a, int b)
{
    int ia = g.rotation_index(a), ib = g.rotation_index(b);
    int lo = std::min(ia, ib), hi = std::max(ia, ib);
    if ((lo == 0 && hi == 1) || (lo == 2 && hi == 3)) return 0;
    if ((lo == 1 && hi == 2) || (lo == 0 && hi == 3)) return 1;
    throw std::invalid_argument("half-edges are opposite at vertex " + std::to_string(g.tail(a)) +
                                "; no non-crossing pairing joins them");
}

namespace {

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x)
    {
        while (p[x] != x) x = p[x] = p[p[x]];
        return x;
    }
    void unite(int a, int b) { p[find(a)] = find(b); }
};

// Builds the nesting forest from a face partition into regions and curve labels.
void build_config(const EmbeddedGraph& g, UnionFind& uf, CurveSystem& cs)
{
    int curves = static_cast<int>(cs.cycles.size());
    std::map<int, int> compress;
    for (int f = 0; f < g.face_count(); ++f) compress.emplace(uf.find(f), static_cast<int>(compress.size()));
    int regions = static_cast<int>(compress.size());
    if (regions != curves + 1)
        throw std::logic_error("curve system does not split the sphere into a region tree");
    std::vector<std::vector<std::pair<int, int>>> adj(regions);
    for (int k = 0; k < curves; ++k) {
        int e = cs.cycles[k].front();
        int a = compress[uf.find(g.face_of(2 * e))], b = compress[uf.find(g.face_of(2 * e + 1))];
        if (a == b) throw std::logic_error("curve has the same region on both sides");
        adj[a].push_back({k, b});
        adj[b].push_back({k, a});
    }
    int root = compress[uf.find(g.outer_face())];
    std::vector<int> configRegion(regions, -1), reachOval(regions, -1);
    cs.ovalOfCurve.assign(curves, -1);
    std::deque<int> queue{root};
    configRegion[root] = 0;
    while (!queue.empty()) {
        int r = queue.front();
        queue.pop_front();
        for (auto [k, r2] : adj[r]) {
            if (configRegion[r2] >= 0) continue;
            int o = cs.config.add("c" + std::to_string(k), reachOval[r]);
            cs.ovalOfCurve[k] = o;
            reachOval[r2] = o;
            configRegion[r2] = o + 1;
            queue.push_back(r2);
        }
    }
    if (cs.config.size() != curves) throw std::logic_error("region graph is not connected");
    cs.regionOfFace.assign(g.face_count(), 0);
    for (int f = 0; f < g.face_count(); ++f) cs.regionOfFace[f] = configRegion[compress[uf.find(f)]];
}

}  // namespace

CurveSystem drawing_curves(const Drawing& d)
{
    CurveSystem cs;
    cs.cycles = d.cycles();
    cs.curveOfEdge.assign(d.graph.edge_count(), -1);
    for (int k = 0; k < static_cast<int>(cs.cycles.size()); ++k)
        for (int e : cs.cycles[k]) cs.curveOfEdge[e] = k;
    UnionFind uf(d.graph.face_count());
    for (int e = 0; e < d.graph.edge_count(); ++e)
        if (!d.used[e]) uf.unite(d.graph.face_of(2 * e), d.graph.face_of(2 * e + 1));
    build_config(d.graph, uf, cs);
    return cs;
}

OvalConfig drawing_to_config(const Drawing& d) { return drawing_curves(d).config; }

CurveSystem perturb(const EmbeddedGraph& g, const PairingAssignment& p)
{
    if (static_cast<int>(p.size()) != g.vertex_count())
        throw std::invalid_argument("pairing assignment size does not match vertex count");
    for (int v = 0; v < g.vertex_count(); ++v)
        if (g.degree(v) != 4) throw std::invalid_argument("vertex " + std::to_string(v) + " is not 4-valent");
    CurveSystem cs;
    cs.curveOfEdge.assign(g.edge_count(), -1);
    for (int e = 0; e < g.edge_count(); ++e) {
        if (cs.curveOfEdge[e] >= 0) continue;
        int k = static_cast<int>(cs.cycles.size());
        cs.cycles.emplace_back();
        int h = 2 * e;
        do {
            cs.curveOfEdge[EmbeddedGraph::edge_of(h)] = k;
            cs.cycles[k].push_back(EmbeddedGraph::edge_of(h));
            h = pairing_partner(g, p, h ^ 1);
        } while (h != 2 * e);
    }
    UnionFind uf(g.face_count());
    for (int v = 0; v < g.vertex_count(); ++v) {
        const auto& r = g.rotation(v);
        if (p[v] == 0) uf.unite(g.face_of(r[1]), g.face_of(r[3]));
        else uf.unite(g.face_of(r[0]), g.face_of(r[2]));
    }
    build_config(g, uf, cs);
    return cs;
}

namespace {

std::string coloring_report(const OvalConfig& x, const std::set<std::string>& y)
{
    std::vector<char> inY(x.size(), 0);
    for (auto& l : y) inY[x.find(l)] = 1;
    std::string out;
    for (int i = 0; i < x.size(); ++i) {
        if (!inY[i]) continue;
        int d = 0;
        for (int q = x.parent(i); q >= 0; q = x.parent(q))
            if (!inY[q]) ++d;
        out += " " + x.label(i) + (d % 2 ? ":black" : ":white");
    }
    return out;
}

}  // namespace

PairingAssignment reduce(const EmbeddedGraph& g, const PairingAssignment& x, const std::set<std::string>& y)
{
    CurveSystem cs = perturb(g, x);
    for (auto& l : y)
        if (cs.config.find(l) < 0) throw std::invalid_argument("unknown oval label '" + l + "'");
    if (!nicely_contains(cs.config, y))
        throw std::invalid_argument("perturbation does not nicely contain the subset; colors in c_{X-Y}:" +
                                    coloring_report(cs.config, y));
    if (y.empty() && !cs.cycles.empty())
        throw std::invalid_argument("cannot reduce to the empty configuration: every perturbation has an oval");

    std::vector<char> edgeY(g.edge_count(), 0);
    for (auto& l : y) {
        int k = std::stoi(l.substr(1));
        for (int e : cs.cycles[k]) edgeY[e] = 1;
    }
    PairingAssignment cur = x;
    auto flip_at = [&](int h, int h2) {
        int a = h ^ 1, b = h2;
        cur[g.tail(a)] = pairing_joining(g, a, b);
    };

    for (;;) {
        int curves = static_cast<int>(cs.cycles.size());
        std::vector<char> curveY(curves, 0);
        for (int k = 0; k < curves; ++k)
            for (int e : cs.cycles[k])
                if (edgeY[e]) curveY[k] = 1;
        int nonY = static_cast<int>(std::count(curveY.begin(), curveY.end(), 0));
        if (nonY == 0) break;

        // Regions in breadth-first order from the outer region.
        const OvalConfig& cfg = cs.config;
        std::vector<int> curveOfOval(cfg.size());
        for (int k = 0; k < curves; ++k) curveOfOval[cs.ovalOfCurve[k]] = k;
        auto adj = cfg.region_adjacency();
        std::vector<int> order{0};
        std::vector<char> seen(cfg.region_count(), 0);
        seen[0] = 1;
        for (size_t i = 0; i < order.size(); ++i)
            for (int r : adj[order[i]])
                if (!seen[r]) {
                    seen[r] = 1;
                    order.push_back(r);
                }
        std::vector<std::vector<int>> boundary(cfg.region_count());
        for (int o = 0; o < cfg.size(); ++o) {
            boundary[cfg.outer_region(o)].push_back(curveOfOval[o]);
            boundary[cfg.inner_region(o)].push_back(curveOfOval[o]);
        }
        std::vector<std::vector<int>> facesOf(cfg.region_count());
        for (int f = 0; f < g.face_count(); ++f) facesOf[cs.regionOfFace[f]].push_back(f);

        bool done = false;
        for (int r : order) {
            const auto& b = boundary[r];
            if (b.size() < 2) continue;
            if (std::any_of(b.begin(), b.end(), [&](int k) { return curveY[k]; })) continue;
            for (int f : facesOf[r]) {
                for (int h : g.face(f)) {
                    int h2 = g.face_next(h);
                    if (cs.curveOfEdge[h >> 1] != cs.curveOfEdge[h2 >> 1]) {
                        flip_at(h, h2);
                        done = true;
                        break;
                    }
                }
                if (done) break;
            }
            if (done) break;
            throw std::logic_error("case 1 region without a face joining two curves");
        }
        if (!done) {
            for (int f = 0; f < g.face_count() && !done; ++f)
                for (int h : g.face(f)) {
                    int h2 = g.face_next(h);
                    int k1 = cs.curveOfEdge[h >> 1], k2 = cs.curveOfEdge[h2 >> 1];
                    if (k1 != k2 && curveY[k1] != curveY[k2]) {
                        flip_at(h, h2);
                        int absorbed = curveY[k1] ? k2 : k1;
                        for (int e : cs.cycles[absorbed]) edgeY[e] = 1;
                        done = true;
                        break;
                    }
                }
        }
        if (!done) throw std::logic_error("reduction found neither case; input graph is not connected?");
        cs = perturb(g, cur);
    }
    return cur;
}

bool chessboard_black(int i, int j) { return (i + j) % 2 == 0; }

Drawing chessboard_redraw(const OvalConfig& config, const Drawing& src, int M)
{
    if (M < 4) throw std::invalid_argument("chessboard redraw needs M >= 4");
    if (src.gridN <= 0) throw std::invalid_argument("source drawing must live in a grid graph");
    CurveSystem cs = drawing_curves(src);
    if (!is_equivalent(cs.config, config)) throw std::invalid_argument("source drawing does not realize the configuration");
    auto colors = canonical_two_coloring(cs.config, Color::White);
    int n = src.gridN;
    GridGraph srcGrid = grid_graph(n);
    int N = M * n + 2;
    GridGraph fine = grid_graph(N);

    std::vector<char> B(N * N, 0), B0(N * N, 0);
    auto at = [N](int i, int j) { return j * N + i; };
    for (int j = 1; j < N - 1; ++j)
        for (int i = 1; i < N - 1; ++i) {
            int a = (i - 1) / M, b = (j - 1) / M;
            int region = cs.regionOfFace[srcGrid.cell_face(a, b)];
            if (colors.color[region] == Color::Black) B0[at(i, j)] = 1;
        }
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    std::vector<char> B01 = B0;
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            if (B0[at(i, j)] || !chessboard_black(i, j)) continue;
            for (int d = 0; d < 4; ++d) {
                int i2 = i + di[d], j2 = j + dj[d];
                if (i2 >= 0 && j2 >= 0 && i2 < N && j2 < N && B0[at(i2, j2)]) B01[at(i, j)] = 1;
            }
        }
    B = B01;
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            if (B01[at(i, j)] || chessboard_black(i, j)) continue;
            bool all = true;
            for (int d = 0; d < 4; ++d) {
                int i2 = i + di[d], j2 = j + dj[d];
                // The outer face counts as a neighbor outside B.
                if (i2 < 0 || j2 < 0 || i2 >= N || j2 >= N || !B01[at(i2, j2)]) all = false;
            }
            if (all) B[at(i, j)] = 1;
        }

    Drawing out = make_grid_drawing(fine);
    auto inB = [&](int i, int j) { return i >= 0 && j >= 0 && i < N && j < N && B[at(i, j)]; };
    for (int y = 0; y <= N; ++y)
        for (int x = 0; x < N; ++x)
            if (inB(x, y - 1) != inB(x, y)) out.used[fine.hedge(x, y)] = 1;
    for (int x = 0; x <= N; ++x)
        for (int y = 0; y < N; ++y)
            if (inB(x - 1, y) != inB(x, y)) out.used[fine.vedge(x, y)] = 1;
    return out;
}

int chessboard_misaligned_edges(const Drawing& d)
{
    if (d.gridN <= 0) throw std::invalid_argument("alignment is defined for grid drawings");
    GridGraph grid = grid_graph(d.gridN);
    CurveSystem cs = drawing_curves(d);
    auto colors = canonical_two_coloring(cs.config, Color::White);
    int bad = 0;
    for (int e = 0; e < d.graph.edge_count(); ++e) {
        if (!d.used[e]) continue;
        int f0 = d.graph.face_of(2 * e), f1 = d.graph.face_of(2 * e + 1);
        bool black0 = colors.color[cs.regionOfFace[f0]] == Color::Black;
        int fb = black0 ? f0 : f1;
        auto [i, j] = grid.face_cell(fb);
        if (i < 0 || !chessboard_black(i, j)) ++bad;
    }
    return bad;
}

namespace {

struct Box {
    int w = 1, h = 1;
    std::vector<std::pair<int, int>> childPos;  // offsets of children inside the box
};

struct Packing {
    int w = 0, h = 0;
    std::vector<std::pair<int, int>> pos;
};

// Column packing of boxes with unit gaps; tries every column height limit.
Packing pack(const std::vector<Box>& items)
{
    Packing best;
    if (items.empty()) return best;
    int maxH = 0, sumH = 0;
    for (auto& b : items) {
        maxH = std::max(maxH, b.h);
        sumH += b.h + 1;
    }
    bool have = false;
    for (int limit = maxH; limit <= sumH; ++limit) {
        Packing p;
        int colX = 0, colW = 0, y = 0;
        bool first = true;
        for (auto& b : items) {
            if (!first && y + 1 + b.h > limit) {
                colX += colW + 1;
                colW = 0;
                y = 0;
                first = true;
            }
            int py = first ? 0 : y + 1;
            p.pos.push_back({colX, py});
            y = py + b.h;
            colW = std::max(colW, b.w);
            p.h = std::max(p.h, y);
            first = false;
        }
        p.w = colX + colW;
        auto key = [](const Packing& q) { return std::tuple(std::max(q.w, q.h), q.w * q.h, q.w > q.h); };
        if (!have || key(p) < key(best)) {
            best = p;
            have = true;
        }
    }
    return best;
}

Box layout(const OvalConfig& c, int oval, std::vector<Box>& boxes)
{
    std::vector<Box> kids;
    auto ch = c.children(oval);
    for (int k : ch) kids.push_back(layout(c, k, boxes));
    Box b;
    if (!kids.empty()) {
        Packing p = pack(kids);
        b.w = p.w + 2;
        b.h = p.h + 2;
        for (auto [x, y] : p.pos) b.childPos.push_back({x + 1, y + 1});
    }
    boxes[oval] = b;
    return b;
}

void place(const OvalConfig& c, int oval, int x0, int y0, const std::vector<Box>& boxes, const GridGraph& g,
           Drawing& d)
{
    const Box& b = boxes[oval];
    for (int x = x0; x < x0 + b.w; ++x) {
        d.used[g.hedge(x, y0)] = 1;
        d.used[g.hedge(x, y0 + b.h)] = 1;
    }
    for (int y = y0; y < y0 + b.h; ++y) {
        d.used[g.vedge(x0, y)] = 1;
        d.used[g.vedge(x0 + b.w, y)] = 1;
    }
    auto ch = c.children(oval);
    for (size_t i = 0; i < ch.size(); ++i)
        place(c, ch[i], x0 + b.childPos[i].first, y0 + b.childPos[i].second, boxes, g, d);
}

}  // namespace

Drawing naive_drawing(const OvalConfig& config)
{
    if (config.empty()) return make_grid_drawing(grid_graph(1));
    std::vector<Box> boxes(config.size());
    std::vector<Box> top;
    auto roots = config.roots();
    for (int r : roots) top.push_back(layout(config, r, boxes));
    Packing p = pack(top);
    GridGraph g = grid_graph(std::max(p.w, p.h));
    Drawing d = make_grid_drawing(g);
    for (size_t i = 0; i < roots.size(); ++i) place(config, roots[i], p.pos[i].first, p.pos[i].second, boxes, g, d);
    return d;
}

Drawing figure1_drawing()
{
    GridGraph g = grid_graph(5);
    Drawing d = make_grid_drawing(g);
    auto rect = [&](int x0, int y0, int x1, int y1) {
        for (int x = x0; x < x1; ++x) {
            d.used[g.hedge(x, y0)] = 1;
            d.used[g.hedge(x, y1)] = 1;
        }
        for (int y = y0; y < y1; ++y) {
            d.used[g.vedge(x0, y)] = 1;
            d.used[g.vedge(x1, y)] = 1;
        }
    };
    rect(0, 0, 3, 5);
    rect(1, 1, 2, 2);
    rect(1, 3, 2, 4);
    rect(4, 0, 5, 1);
    rect(4, 2, 5, 4);
    return d;
}

GridEmbedding embed_grid_in_globe(const GridGraph& h, const GlobeGraph& globe)
{
    if (!globe.resolved) throw std::invalid_argument("grid embedding needs the pole-resolved globe graph");
    int rows = h.n + 1, cols = h.n + 1;
    int L = globe.rows(), C = globe.cols();
    if (L < rows || C < cols + 1) {
        int m = std::max(globe.idx.m, (cols + 2) / 2);
        int n = m + rows;
        throw std::invalid_argument("globe graph (" + std::to_string(globe.idx.n) + "," + std::to_string(globe.idx.m) +
                                    ") too small for a " + std::to_string(h.n) + "x" + std::to_string(h.n) +
                                    " grid; need at least degree " + std::to_string(n) + " and order " +
                                    std::to_string(m));
    }
    GridEmbedding emb;
    emb.row0 = (L - rows) / 2;
    emb.col0 = 0;
    emb.vertexMap.assign(h.graph.vertex_count(), -1);
    emb.edgeMap.assign(h.graph.edge_count(), -1);
    for (int y = 0; y < rows; ++y)
        for (int x = 0; x < cols; ++x) emb.vertexMap[h.vertex(x, y)] = globe.crossing(emb.row0 + y, emb.col0 + x);
    for (int y = 0; y < rows; ++y)
        for (int x = 0; x < h.n; ++x) emb.edgeMap[h.hedge(x, y)] = globe.lat_edge(emb.row0 + y, emb.col0 + x);
    for (int x = 0; x < cols; ++x)
        for (int y = 0; y < h.n; ++y) emb.edgeMap[h.vedge(x, y)] = globe.mer_edge(emb.row0 + y, emb.col0 + x);
    return emb;
}

Drawing map_drawing(const Drawing& d, const GridEmbedding& emb, const EmbeddedGraph& target)
{
    Drawing out;
    out.graph = target;
    out.used.assign(target.edge_count(), 0);
    for (int e = 0; e < d.graph.edge_count(); ++e)
        if (d.used[e]) out.used[emb.edgeMap[e]] = 1;
    return out;
}

PairingAssignment choose_pairings_containing(const EmbeddedGraph& g, const Drawing& d,
                                             const std::vector<int>& faceBlack)
{
    PairingAssignment p(g.vertex_count(), 0);
    for (int v = 0; v < g.vertex_count(); ++v) {
        if (g.degree(v) != 4) continue;
        std::vector<int> on;
        for (int h : g.rotation(v))
            if (d.used[EmbeddedGraph::edge_of(h)]) on.push_back(h);
        if (on.empty()) {
            if (!faceBlack.empty()) {
                const auto& r = g.rotation(v);
                // Pairing 0 keeps corners 0 and 2 (faces left of h0 and h2) apart.
                p[v] = faceBlack[g.face_of(r[0])] ? 0 : 1;
            }
            continue;
        }
        if (on.size() != 2)
            throw std::invalid_argument("drawing is not 2-regular at vertex " + std::to_string(v));
        p[v] = pairing_joining(g, on[0], on[1]);
    }
    return p;
}

EmbeddedGraph octahedron_graph()
{
    EmbeddedGraph g;
    const double pi = std::acos(-1.0);
    auto polar = [&](double r, double deg) {
        double a = deg * pi / 180;
        return Vec2{r * std::cos(a), -r * std::sin(a)};
    };
    for (double a : {90.0, 210.0, 330.0}) g.add_vertex(polar(2, a));
    for (double a : {270.0, 30.0, 150.0}) g.add_vertex(polar(0.7, a));
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(2, 0);
    g.add_edge(3, 4);
    g.add_edge(4, 5);
    g.add_edge(5, 3);
    g.add_edge(3, 1);
    g.add_edge(3, 2);
    g.add_edge(4, 2);
    g.add_edge(4, 0);
    g.add_edge(5, 0);
    g.add_edge(5, 1);
    g.sort_rotations_by_angle();
    g.finalize();
    g.choose_outer_by_area();
    return g;
}

std::string format_drawing(const Drawing& d)
{
    if (d.gridN <= 0) throw std::invalid_argument("only grid drawings have a text format");
    std::ostringstream os;
    os << "format: 1\ngrid " << d.gridN << "\n";
    for (int e = 0; e < d.graph.edge_count(); ++e) {
        if (!d.used[e]) continue;
        Vec2 a = d.graph.pos(d.graph.tail(2 * e)), b = d.graph.pos(d.graph.head(2 * e));
        os << "(" << int(a.x) << "," << int(a.y) << ")-(" << int(b.x) << "," << int(b.y) << ")\n";
    }
    return os.str();
}

Drawing parse_drawing(const std::string& text)
{
    std::istringstream is(text);
    std::string line;
    int n = 0;
    std::vector<std::array<int, 4>> segs;
    while (std::getline(is, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        line = line.substr(first);
        if (line.rfind("format:", 0) == 0) {
            if (std::stoi(line.substr(7)) != 1) throw std::invalid_argument("unsupported drawing format");
            continue;
        }
        if (line.rfind("grid", 0) == 0) {
            n = std::stoi(line.substr(4));
            continue;
        }
        std::array<int, 4> s{};
        if (std::sscanf(line.c_str(), " (%d,%d)-(%d,%d)", &s[0], &s[1], &s[2], &s[3]) != 4)
            throw std::invalid_argument("bad drawing line: " + line);
        segs.push_back(s);
    }
    GridGraph g = grid_graph(n);
    Drawing d = make_grid_drawing(g);
    for (auto& s : segs) {
        for (int c : s)
            if (c < 0 || c > n) throw std::invalid_argument("drawing vertex outside the grid");
        int e = g.edge_between(g.vertex(s[0], s[1]), g.vertex(s[2], s[3]));
        if (e < 0) throw std::invalid_argument("drawing segment is not a grid edge");
        d.used[e] = 1;
    }
    return d;
}

}  // namespace nodalforge
