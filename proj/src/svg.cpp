#include "nodalforge/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace nodalforge {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", std::abs(x) < 0.005 ? 0.0 : x);
    return buf;
}

std::string header(double w, double h)
{
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!-- format: 1 -->\n"
           "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
           "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\">\n"
           "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

// Affine map from graph coordinates into a square canvas.
struct Frame {
    double x0 = 0, y0 = 0, scale = 1, margin = 20;
    double size = 600;

    explicit Frame(const EmbeddedGraph& g)
    {
        double x1 = 0, y1 = 0;
        for (int v = 0; v < g.vertex_count(); ++v) {
            Vec2 p = g.pos(v);
            if (v == 0 || p.x < x0) x0 = p.x;
            if (v == 0 || p.y < y0) y0 = p.y;
            if (v == 0 || p.x > x1) x1 = p.x;
            if (v == 0 || p.y > y1) y1 = p.y;
        }
        double span = std::max({x1 - x0, y1 - y0, 1e-9});
        scale = (size - 2 * margin) / span;
    }
    Vec2 operator()(Vec2 p) const { return {margin + (p.x - x0) * scale, margin + (p.y - y0) * scale}; }
};

Vec2 lerp(Vec2 a, Vec2 b, double s) { return {a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)}; }

void line(std::ostringstream& os, Vec2 a, Vec2 b, const std::string& style)
{
    os << "<line x1=\"" << num(a.x) << "\" y1=\"" << num(a.y) << "\" x2=\"" << num(b.x) << "\" y2=\"" << num(b.y)
       << "\" " << style << "/>\n";
}

}  // namespace

std::string svg_drawing(const Drawing& d)
{
    const EmbeddedGraph& g = d.graph;
    Frame fr(g);
    std::ostringstream os;
    os << header(fr.size, fr.size);
    if (d.gridN > 0) {
        os << "<g fill=\"#e6e6e6\" stroke=\"none\">\n";
        for (int j = 0; j < d.gridN; ++j)
            for (int i = 0; i < d.gridN; ++i) {
                if (!chessboard_black(i, j)) continue;
                Vec2 a = fr({double(i), double(j)});
                os << "<rect x=\"" << num(a.x) << "\" y=\"" << num(a.y) << "\" width=\"" << num(fr.scale)
                   << "\" height=\"" << num(fr.scale) << "\"/>\n";
            }
        os << "</g>\n";
    }
    for (int pass = 0; pass < 2; ++pass)
        for (int e = 0; e < g.edge_count(); ++e) {
            bool used = e < static_cast<int>(d.used.size()) && d.used[e];
            if (used != (pass == 1)) continue;
            line(os, fr(g.pos(g.tail(2 * e))), fr(g.pos(g.head(2 * e))),
                 used ? "stroke=\"black\" stroke-width=\"3\" stroke-linecap=\"round\""
                      : "stroke=\"#b0b0b0\" stroke-width=\"0.6\"");
        }
    os << "</svg>\n";
    return os.str();
}

namespace {

using EdgePath = std::function<Vec2(int e, double s)>;  // s = 0 at the tail, 1 at the head

std::string render_perturbation(const EmbeddedGraph& g, const PairingAssignment& p, const EdgePath& path)
{
    CurveSystem cs = perturb(g, p);
    const int samples = 24;
    const double cut = 0.3;  // fraction of each edge replaced by the smoothing arc
    EmbeddedGraph box;  // sampled points only, to size the frame
    for (int e = 0; e < g.edge_count(); ++e)
        for (int i = 0; i <= samples; ++i) box.add_vertex(path(e, double(i) / samples));
    Frame fr(box);
    auto at = [&](int h, double s) { return fr(path(h >> 1, (h & 1) ? 1 - s : s)); };
    auto colour = [&](int e) { return std::string(kPalette[cs.curveOfEdge[e] % 8]); };
    auto polyline = [&](int e, double s0, double s1, const std::string& style) {
        std::ostringstream pts;
        for (int i = 0; i <= samples; ++i) {
            Vec2 q = fr(path(e, s0 + (s1 - s0) * i / samples));
            pts << (i ? " " : "") << num(q.x) << ',' << num(q.y);
        }
        return "<polyline points=\"" + pts.str() + "\" fill=\"none\" " + style + "/>\n";
    };
    std::ostringstream os;
    os << header(fr.size, fr.size);
    for (int e = 0; e < g.edge_count(); ++e) os << polyline(e, 0, 1, "stroke=\"#dddddd\" stroke-width=\"0.6\"");
    for (int e = 0; e < g.edge_count(); ++e)
        os << polyline(e, cut, 1 - cut, "stroke=\"" + colour(e) + "\" stroke-width=\"2\"");
    for (int v = 0; v < g.vertex_count(); ++v)
        for (int h : g.rotation(v)) {
            int o = pairing_partner(g, p, h);
            if (o < h) continue;
            Vec2 a = at(h, cut), b = at(o, cut), c = at(h, 0);
            os << "<path d=\"M" << num(a.x) << ' ' << num(a.y) << " Q" << num(c.x) << ' ' << num(c.y) << ' '
               << num(b.x) << ' ' << num(b.y) << "\" fill=\"none\" stroke=\"" << colour(g.edge_of(h))
               << "\" stroke-width=\"2\"/>\n";
        }
    os << "</svg>\n";
    return os.str();
}

}  // namespace

std::string svg_perturbation(const EmbeddedGraph& g, const PairingAssignment& p)
{
    return render_perturbation(g, p, [&](int e, double s) { return lerp(g.pos(g.tail(2 * e)), g.pos(g.head(2 * e)), s); });
}

std::string svg_perturbation(const GlobeGraph& G, const PairingAssignment& p)
{
    if (!G.resolved) throw std::invalid_argument("svg_perturbation needs a pole-resolved globe graph");
    const EmbeddedGraph& g = G.graph;
    const double pi = std::numbers::pi;
    int R = G.rows(), C = G.cols();
    auto proj = [](double th, double ph) { return Vec2{th * std::cos(ph), -th * std::sin(ph)}; };
    // Latitude arcs, meridian segments, then the edges through the north and south pole.
    return render_perturbation(g, p, [&, R, C](int e, double s) {
        int a = g.tail(2 * e), b = g.head(2 * e);
        double th = G.vTheta[a], ph = G.vPhi[a];
        if (e < R * C) return proj(th, ph + s * pi / G.idx.m);
        if (e < 2 * R * C - C) return proj(th + s * (G.vTheta[b] - th), ph);
        double ph2 = ph + pi / G.idx.m;  // the joined meridians are neighbours
        if (e < 2 * R * C - C + G.idx.m) {
            // A loop towards the north pole, the centre of the projection, stopping short of it so
            // the joined pairs stay disjoint.
            return proj(th * (1 - (2.0 / 3) * (1 - std::abs(1 - 2 * s))), ph + s * (ph2 - ph));
        }
        // The south pole is the rim of the projection: out, along the rim, back in.
        if (s < 1.0 / 3) return proj(th + 3 * s * (pi - th), ph);
        if (s < 2.0 / 3) return proj(pi, ph + (3 * s - 1) * (ph2 - ph));
        return proj(pi + (3 * s - 2) * (th - pi), ph2);
    });
}

std::string svg_nodal(const ScalarField& f)
{
    const double w = 720, h = 360;
    auto at = [&](const Vec2d& tp) { return Vec2{tp[1] / (2 * std::numbers::pi) * w, tp[0] / std::numbers::pi * h}; };
    std::ostringstream os;
    os << header(w, h);
    os << "<rect width=\"" << num(w) << "\" height=\"" << num(h) << "\" fill=\"none\" stroke=\"#888888\"/>\n";
    os << "<g stroke=\"black\" stroke-width=\"1\">\n";
    for (const auto& s : nodal_segments(f)) line(os, at(s[0]), at(s[1]), "");
    os << "</g>\n</svg>\n";
    return os.str();
}

std::string svg_decomposition(const OvalConfig& config, const BlockDecomposition& d)
{
    int n = static_cast<int>(d.blocks.size());
    std::vector<std::vector<int>> adj(n);
    for (const auto& gl : d.gluings) {
        adj[gl.a].push_back(gl.b);
        adj[gl.b].push_back(gl.a);
    }
    // Breadth-first layers from block 0 give the rows of the picture.
    std::vector<int> depth(n, -1), slot(n, 0);
    std::map<int, int> width;
    for (int s = 0; s < n; ++s) {
        if (depth[s] >= 0) continue;
        std::queue<int> q;
        depth[s] = 0;
        q.push(s);
        while (!q.empty()) {
            int b = q.front();
            q.pop();
            slot[b] = width[depth[b]]++;
            for (int o : adj[b])
                if (depth[o] < 0) {
                    depth[o] = depth[b] + 1;
                    q.push(o);
                }
        }
    }
    int maxw = 1;
    for (auto [k, c] : width) maxw = std::max(maxw, c);
    double W = 120.0 * maxw + 40, H = 100.0 * static_cast<double>(width.size()) + 40;
    auto centre = [&](int b) { return Vec2{W * (slot[b] + 0.5) / width[depth[b]], 70.0 + 100.0 * depth[b]}; };

    std::ostringstream os;
    os << header(W, H);
    for (const auto& gl : d.gluings) {
        Vec2 a = centre(gl.a), b = centre(gl.b);
        line(os, a, b, gl.dirichlet ? "stroke=\"black\" stroke-width=\"2\"" : "stroke=\"black\" stroke-dasharray=\"6 4\"");
        std::string tag = gl.dirichlet ? config.label(gl.curve) : "L" + std::to_string(gl.curve);
        Vec2 m = lerp(a, b, 0.5);
        os << "<text x=\"" << num(m.x + 4) << "\" y=\"" << num(m.y) << "\" font-size=\"11\">" << tag << "</text>\n";
    }
    for (int b = 0; b < n; ++b) {
        const auto& blk = d.blocks[b];
        Vec2 c = centre(b);
        os << "<circle cx=\"" << num(c.x) << "\" cy=\"" << num(c.y) << "\" r=\"24\" fill=\""
           << (blk.sign > 0 ? "#fde0c5" : "#c6dbef") << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << num(c.x) << "\" y=\"" << num(c.y + 4) << "\" font-size=\"11\" text-anchor=\"middle\">"
           << to_string(blk.type) << (blk.sign > 0 ? " +" : " -") << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace nodalforge
