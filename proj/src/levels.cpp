#include "nodalforge/levels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <tuple>
#include <stdexcept>

namespace nodalforge {

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

struct MeshTopology {
    std::map<std::pair<int, int>, int> edgeId;
    std::vector<std::array<int, 2>> edgeVerts;
    std::vector<std::vector<int>> edgeTris;
    std::vector<std::vector<int>> vertexTris;
    std::vector<char> onMeshBoundary, inU, inClosure;
    std::vector<char> edgeInterior;  // both sides kept
};

MeshTopology build_topology(const PlField& f)
{
    MeshTopology m;
    int V = f.vertex_count();
    m.vertexTris.assign(V, {});
    for (int t = 0; t < f.triangle_count(); ++t)
        for (int k = 0; k < 3; ++k) {
            int a = f.triangles[t][k], b = f.triangles[t][(k + 1) % 3];
            if (a < 0 || a >= V || b < 0 || b >= V || a == b) throw std::invalid_argument("malformed triangle " + std::to_string(t));
            auto key = std::minmax(a, b);
            auto it = m.edgeId.find(key);
            if (it == m.edgeId.end()) {
                it = m.edgeId.emplace(key, static_cast<int>(m.edgeVerts.size())).first;
                m.edgeVerts.push_back({key.first, key.second});
                m.edgeTris.emplace_back();
            }
            m.edgeTris[it->second].push_back(t);
            m.vertexTris[a].push_back(t);
        }
    int E = static_cast<int>(m.edgeVerts.size());
    m.onMeshBoundary.assign(V, 0);
    m.edgeInterior.assign(E, 0);
    for (int e = 0; e < E; ++e) {
        if (m.edgeTris[e].size() > 2) throw std::invalid_argument("non-manifold edge in mesh");
        if (m.edgeTris[e].size() == 1) m.onMeshBoundary[m.edgeVerts[e][0]] = m.onMeshBoundary[m.edgeVerts[e][1]] = 1;
        m.edgeInterior[e] = m.edgeTris[e].size() == 2 && !f.excluded[m.edgeTris[e][0]] && !f.excluded[m.edgeTris[e][1]];
    }
    m.inU.assign(V, 0);
    m.inClosure.assign(V, 0);
    for (int v = 0; v < V; ++v) {
        bool allKept = !m.vertexTris[v].empty();
        for (int t : m.vertexTris[v]) {
            if (f.excluded[t]) allKept = false;
            else m.inClosure[v] = 1;
        }
        m.inU[v] = allKept && !m.onMeshBoundary[v];
    }
    return m;
}

// Field order with ties broken by vertex index.
bool below(const PlField& f, int a, int b)
{
    return f.values[a] < f.values[b] || (f.values[a] == f.values[b] && a < b);
}

void check_regular(const PlField& f, const MeshTopology& m, int v)
{
    // Link cycle from the opposite edges of incident triangles.
    std::map<int, std::vector<int>> adj;
    for (int t : m.vertexTris[v]) {
        const auto& tri = f.triangles[t];
        int k = tri[0] == v ? 0 : tri[1] == v ? 1 : 2;
        int a = tri[(k + 1) % 3], b = tri[(k + 2) % 3];
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& [x, n] : adj)
        if (n.size() != 2) throw std::invalid_argument("vertex " + std::to_string(v) + " has a non-manifold link");
    std::vector<int> cycle;
    int start = adj.begin()->first, prev = -1, cur = start;
    do {
        cycle.push_back(cur);
        int next = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
        prev = cur;
        cur = next;
    } while (cur != start && cycle.size() <= adj.size());
    if (cycle.size() != adj.size()) throw std::invalid_argument("vertex " + std::to_string(v) + " has a disconnected link");
    int changes = 0;
    for (size_t i = 0; i < cycle.size(); ++i)
        if (below(f, cycle[i], v) != below(f, cycle[(i + 1) % cycle.size()], v)) ++changes;
    if (changes != 2) {
        std::string kind = changes == 0 ? "extremum" : "saddle";
        throw std::invalid_argument("critical vertex " + std::to_string(v) + " (" + kind + ") in triangle " +
                                    std::to_string(m.vertexTris[v].front()) + " of the kept region");
    }
}

}  // namespace

Blueprint blueprint_from_levels(const PlField& f)
{
    if (static_cast<int>(f.excluded.size()) != f.triangle_count()) throw std::invalid_argument("excluded flags must match triangles");
    MeshTopology m = build_topology(f);
    int V = f.vertex_count(), T = f.triangle_count(), E = static_cast<int>(m.edgeVerts.size());
    for (int v = 0; v < V; ++v)
        if (m.inClosure[v] && !m.onMeshBoundary[v]) check_regular(f, m, v);

    std::vector<double> levels;
    for (int v = 0; v < V; ++v)
        if (m.inClosure[v]) levels.push_back(f.values[v]);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    int L = static_cast<int>(levels.size());

    std::vector<double> tmin(T), tmax(T);
    for (int t = 0; t < T; ++t) {
        auto& tri = f.triangles[t];
        tmin[t] = std::min({f.values[tri[0]], f.values[tri[1]], f.values[tri[2]]});
        tmax[t] = std::max({f.values[tri[0]], f.values[tri[1]], f.values[tri[2]]});
    }
    std::vector<std::vector<int>> levelVerts(L);
    for (int v = 0; v < V; ++v)
        if (m.inClosure[v]) levelVerts[std::lower_bound(levels.begin(), levels.end(), f.values[v]) - levels.begin()].push_back(v);

    // Components of the level set inside the open slab (levels[s], levels[s+1]).
    auto slab_components = [&](int s, std::vector<int>& comp) {
        comp.assign(T, -1);
        if (s < 0 || s + 1 >= L) return 0;
        double lo = levels[s], hi = levels[s + 1];
        UnionFind uf(T);
        for (int e = 0; e < E; ++e) {
            if (!m.edgeInterior[e]) continue;
            double a = f.values[m.edgeVerts[e][0]], b = f.values[m.edgeVerts[e][1]];
            if (std::min(a, b) <= lo && std::max(a, b) >= hi) uf.unite(m.edgeTris[e][0], m.edgeTris[e][1]);
        }
        std::map<int, int> ids;
        for (int t = 0; t < T; ++t)
            if (!f.excluded[t] && tmin[t] <= lo && tmax[t] >= hi)
                comp[t] = ids.emplace(uf.find(t), static_cast<int>(ids.size())).first->second;
        return static_cast<int>(ids.size());
    };

    struct Record {
        double a, b;
    };
    std::vector<Record> recs;
    struct PendingNode {
        double v;
        int left, right;
    };
    std::vector<PendingNode> pendingNodes;
    std::vector<int> compBelow, compAbove;
    int nBelow = 0;
    std::vector<int> recBelow;
    for (int i = 0; i < L; ++i) {
        double v = levels[i];
        int nAbove = slab_components(i, compAbove);
        std::vector<int> recAbove(nAbove, -1);

        // Pieces of the level set {f = v} inside U.
        std::vector<int> localW(V, -1);
        const auto& W = levelVerts[i];
        for (size_t k = 0; k < W.size(); ++k) localW[W[k]] = static_cast<int>(k);
        UnionFind uf(T + static_cast<int>(W.size()));
        std::vector<char> hasPiece(T + W.size(), 0);
        for (int t = 0; t < T; ++t) {
            if (f.excluded[t] || !(tmin[t] <= v && tmax[t] >= v)) continue;
            const auto& tri = f.triangles[t];
            int at = 0, w = -1;
            for (int k = 0; k < 3; ++k)
                if (f.values[tri[k]] == v) {
                    ++at;
                    w = tri[k];
                }
            if (at >= 2) {
                for (int k = 0; k < 3; ++k) {
                    int a = tri[k], b = tri[(k + 1) % 3];
                    if (f.values[a] == v && f.values[b] == v && m.edgeInterior[m.edgeId.at(std::minmax(a, b))])
                        throw std::invalid_argument("flat edge " + std::to_string(a) + "-" + std::to_string(b) +
                                                    " inside the kept region; perturb the field");
                }
                continue;
            }
            if (at == 0) {
                if (tmin[t] < v && v < tmax[t]) hasPiece[t] = 1;
                continue;
            }
            int o1 = -1, o2 = -1;
            for (int k = 0; k < 3; ++k)
                if (tri[k] != w) (o1 < 0 ? o1 : o2) = tri[k];
            if ((f.values[o1] - v) * (f.values[o2] - v) < 0) {
                hasPiece[t] = 1;
                if (m.inU[w]) {
                    uf.unite(t, T + localW[w]);
                    hasPiece[T + localW[w]] = 1;
                }
            }
        }
        for (int e = 0; e < E; ++e) {
            if (!m.edgeInterior[e]) continue;
            double a = f.values[m.edgeVerts[e][0]], b = f.values[m.edgeVerts[e][1]];
            if (std::min(a, b) < v && v < std::max(a, b)) uf.unite(m.edgeTris[e][0], m.edgeTris[e][1]);
        }
        std::map<int, std::set<int>> belowOf, aboveOf;  // piece root -> slab components
        auto touch = [&](int root, int t) {
            if (tmin[t] < v && compBelow.size() == static_cast<size_t>(T) && compBelow[t] >= 0) belowOf[root].insert(compBelow[t]);
            if (tmax[t] > v && compAbove[t] >= 0) aboveOf[root].insert(compAbove[t]);
        };
        std::set<int> roots;
        for (int t = 0; t < T; ++t)
            if (hasPiece[t]) {
                int r = uf.find(t);
                roots.insert(r);
                touch(r, t);
            }
        for (size_t k = 0; k < W.size(); ++k) {
            if (!hasPiece[T + k]) continue;
            int r = uf.find(T + static_cast<int>(k));
            roots.insert(r);
            for (int t : m.vertexTris[W[k]])
                if (!f.excluded[t]) touch(r, t);
        }
        std::map<int, std::vector<int>> piecesOfBelow, piecesOfAbove;
        for (int r : roots) {
            if (belowOf[r].size() != 1 || aboveOf[r].size() != 1)
                throw std::logic_error("level " + std::to_string(v) + ": a level component does not have one germ per side");
            piecesOfBelow[*belowOf[r].begin()].push_back(r);
            piecesOfAbove[*aboveOf[r].begin()].push_back(r);
        }
        for (int r : roots) {
            int A = *belowOf[r].begin(), B = *aboveOf[r].begin();
            if (piecesOfBelow[A].size() == 1 && piecesOfAbove[B].size() == 1) {
                recAbove[B] = recBelow[A];
                continue;
            }
            recs[recBelow[A]].b = v;
            if (recAbove[B] < 0) {
                recAbove[B] = static_cast<int>(recs.size());
                recs.push_back({v, v});
            }
            pendingNodes.push_back({v, recBelow[A], recAbove[B]});
        }
        for (int A = 0; A < nBelow; ++A)
            if (!piecesOfBelow.count(A)) recs[recBelow[A]].b = v;
        for (int B = 0; B < nAbove; ++B)
            if (recAbove[B] < 0) {
                recAbove[B] = static_cast<int>(recs.size());
                recs.push_back({v, v});
            }
        compBelow.swap(compAbove);
        recBelow.swap(recAbove);
        nBelow = nAbove;
    }
    Blueprint bp;
    for (const auto& r : recs) bp.add_edge(Rational(r.a), Rational(r.b));
    for (const auto& n : pendingNodes) bp.add_node(Rational(n.v), n.left, n.right);
    bp.validate();
    return bp;
}

PlField clip_band(const PlField& field, double lo, double hi)
{
    if (!(lo < hi)) throw std::invalid_argument("clip band needs lo < hi");
    PlField out;
    std::vector<int> keepId(field.vertex_count(), -1);
    std::map<std::tuple<int, int, int>, int> cutId;  // (u, v, which level) -> vertex
    struct PV {
        int id;
        int u, v;  // supporting original vertices (v = -1 for an original vertex)
    };
    auto original = [&](int u) {
        if (keepId[u] < 0) {
            keepId[u] = out.vertex_count();
            out.points.push_back(field.points[u]);
            out.values.push_back(field.values[u]);
        }
        return PV{keepId[u], u, -1};
    };
    auto cut = [&](int u, int v, int which, double level) {
        auto key = std::make_tuple(std::min(u, v), std::max(u, v), which);
        auto it = cutId.find(key);
        if (it == cutId.end()) {
            double fu = field.values[u], fv = field.values[v];
            double s = (level - fu) / (fv - fu);
            std::array<double, 3> p;
            for (int k = 0; k < 3; ++k) p[k] = field.points[u][k] + s * (field.points[v][k] - field.points[u][k]);
            it = cutId.emplace(key, out.vertex_count()).first;
            out.points.push_back(p);
            out.values.push_back(level);
        }
        return PV{it->second, std::min(u, v), std::max(u, v)};
    };
    auto support = [](const PV& a, const PV& b, int& u, int& v) {
        std::vector<int> s = {a.u};
        if (a.v >= 0) s.push_back(a.v);
        for (int x : {b.u, b.v})
            if (x >= 0 && std::find(s.begin(), s.end(), x) == s.end()) s.push_back(x);
        if (s.size() != 2) return false;
        u = s[0];
        v = s[1];
        return true;
    };
    for (int t = 0; t < field.triangle_count(); ++t) {
        std::vector<PV> poly;
        std::vector<double> val;
        for (int k = 0; k < 3; ++k) {
            int u = field.triangles[t][k];
            poly.push_back({-1, u, -1});
            val.push_back(field.values[u]);
        }
        for (int which = 0; which < 2; ++which) {
            double level = which == 0 ? lo : hi;
            auto inside = [&](double x) { return which == 0 ? x >= level : x <= level; };
            std::vector<PV> np;
            std::vector<double> nv;
            for (size_t k = 0; k < poly.size(); ++k) {
                size_t j = (k + 1) % poly.size();
                bool ik = inside(val[k]), ij = inside(val[j]);
                if (ik) {
                    np.push_back(poly[k]);
                    nv.push_back(val[k]);
                }
                if (ik != ij && val[k] != level && val[j] != level) {
                    int u, v;
                    if (!support(poly[k], poly[j], u, v)) throw std::logic_error("clip crossing off a mesh edge");
                    np.push_back({-2, u, v});
                    nv.push_back(level);
                    np.back().id = which;  // marker, resolved below
                }
            }
            poly.swap(np);
            val.swap(nv);
            if (poly.size() < 3) break;
        }
        if (poly.size() < 3) continue;
        std::vector<int> ids;
        for (size_t k = 0; k < poly.size(); ++k) {
            const auto& p = poly[k];
            if (p.v < 0) ids.push_back(original(p.u).id);
            else ids.push_back(cut(p.u, p.v, p.id, p.id == 0 ? lo : hi).id);
        }
        for (size_t k = 1; k + 1 < ids.size(); ++k) {
            out.triangles.push_back({ids[0], ids[k], ids[k + 1]});
            out.excluded.push_back(field.excluded[t]);
        }
    }
    return out;
}

PlField merge_fields(const PlField& a, const PlField& b)
{
    PlField out = a;
    int off = a.vertex_count();
    out.points.insert(out.points.end(), b.points.begin(), b.points.end());
    out.values.insert(out.values.end(), b.values.begin(), b.values.end());
    for (auto tri : b.triangles) {
        for (auto& v : tri) v += off;
        out.triangles.push_back(tri);
    }
    out.excluded.insert(out.excluded.end(), b.excluded.begin(), b.excluded.end());
    return out;
}

void exclude_star(PlField& field, int v)
{
    for (int t = 0; t < field.triangle_count(); ++t)
        for (int k = 0; k < 3; ++k)
            if (field.triangles[t][k] == v) field.excluded[t] = 1;
}

PlField cylinder_field(int nx, int ntheta, unsigned seed)
{
    if (nx < 2 || ntheta < 3) throw std::invalid_argument("cylinder mesh too coarse");
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);
    const double pi = std::acos(-1.0);
    PlField f;
    for (int i = 0; i <= nx; ++i)
        for (int j = 0; j < ntheta; ++j) {
            double x = static_cast<double>(i) / nx;
            if (i > 0 && i < nx) x += jitter(rng) / nx;
            double th = 2 * pi * j / ntheta;
            f.points.push_back({x, std::cos(th), std::sin(th)});
            f.values.push_back(x);
        }
    auto id = [&](int i, int j) { return i * ntheta + ((j % ntheta) + ntheta) % ntheta; };
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ntheta; ++j) {
            f.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            f.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    f.excluded.assign(f.triangles.size(), 0);
    return f;
}

PlField hemisphere_field(int rings, int sectors, unsigned seed)
{
    if (rings < 2 || sectors < 3) throw std::invalid_argument("hemisphere mesh too coarse");
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);
    const double pi = std::acos(-1.0);
    PlField f;
    f.points.push_back({0, 0, 1});
    f.values.push_back(0.5);
    double dpsi = pi / 2 / rings;
    for (int k = 1; k <= rings; ++k)
        for (int j = 0; j < sectors; ++j) {
            double psi = k * dpsi;
            if (k < rings) psi += jitter(rng) * dpsi;
            double ph = 2 * pi * j / sectors;
            double z = std::cos(psi);
            f.points.push_back({std::sin(psi) * std::cos(ph), std::sin(psi) * std::sin(ph), z});
            f.values.push_back(z / 2);
        }
    auto id = [&](int k, int j) { return 1 + (k - 1) * sectors + ((j % sectors) + sectors) % sectors; };
    for (int j = 0; j < sectors; ++j) f.triangles.push_back({0, id(1, j), id(1, j + 1)});
    for (int k = 1; k < rings; ++k)
        for (int j = 0; j < sectors; ++j) {
            f.triangles.push_back({id(k, j), id(k + 1, j), id(k + 1, j + 1)});
            f.triangles.push_back({id(k, j), id(k + 1, j + 1), id(k, j + 1)});
        }
    f.excluded.assign(f.triangles.size(), 0);
    return f;
}

double pants_f0(double x, double y)
{
    double rho = std::hypot(x * x - y * y - 1, 2 * x * y);
    return (2 - rho) / 1.5;
}

PlField pants_field(int half, int* saddle)
{
    if (half < 2) throw std::invalid_argument("pants mesh too coarse");
    double h = 1.8 / half;
    int n = 2 * half + 1;
    PlField f;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double x = (i - half) * h, y = (j - half) * h;
            f.points.push_back({x, y, 0});
            f.values.push_back(pants_f0(x, y));
        }
    auto id = [&](int i, int j) { return j * n + i; };
    for (int j = 0; j + 1 < n; ++j)
        for (int i = 0; i + 1 < n; ++i) {
            f.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            f.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    f.excluded.assign(f.triangles.size(), 0);
    if (saddle) *saddle = id(half, half);
    return f;
}

}  // namespace nodalforge
