#include "nodalforge/harmonics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nodalforge {

namespace {
const double kPi = std::acos(-1.0);
}

double legendre_p(int n, double x)
{
    if (n < 0) throw std::invalid_argument("Legendre degree must be nonnegative");
    if (!(std::abs(x) <= 1)) throw std::invalid_argument("legendre_p needs |x| <= 1");
    if (n == 0) return 1;
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

double legendre_dm(int n, int m, double x)
{
    if (m < 0 || n < 0) throw std::invalid_argument("negative Legendre index");
    if (m > n) return 0;
    double a = m + 0.5;
    double dfact = 1;
    for (int k = 2 * m - 1; k > 1; k -= 2) dfact *= k;
    int deg = n - m;
    double c0 = 1, c1 = 2 * a * x;
    if (deg == 0) return dfact;
    for (int k = 2; k <= deg; ++k) {
        double c2 = (2 * x * (k + a - 1) * c1 - (k + 2 * a - 2) * c0) / k;
        c0 = c1;
        c1 = c2;
    }
    return dfact * c1;
}

std::vector<double> f_nm_roots(int n, int m)
{
    if (m < 0 || m > n) throw std::invalid_argument("f_nm_roots needs 0 <= m <= n");
    std::vector<double> roots;
    if (m == n) return roots;
    int K = 8 * (n + 1);
    // Chebyshev points in ascending order, plus the endpoints.
    std::vector<double> xs{-1.0};
    for (int i = K - 1; i >= 0; --i) xs.push_back(std::cos(kPi * (i + 0.5) / K));
    xs.push_back(1.0);
    auto f = [&](double x) { return legendre_dm(n, m, x); };
    double xa = xs[0], fa = f(xa);
    for (size_t i = 1; i < xs.size(); ++i) {
        double xb = xs[i], fb = f(xb);
        if (fb == 0 && i + 1 < xs.size()) {
            // Exact hit on a sample: record it and continue with the sign on its right.
            roots.push_back(xb);
            xa = xb;
            fa = f(xs[i + 1]);
            continue;
        }
        if ((fa < 0) != (fb < 0)) {
            double lo = xa, hi = xb, flo = fa;
            while (hi - lo > 1e-13) {
                double mid = 0.5 * (lo + hi), fm = f(mid);
                if ((fm < 0) == (flo < 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        xa = xb;
        fa = fb;
    }
    if (static_cast<int>(roots.size()) != n - m)
        throw std::runtime_error("root isolation found " + std::to_string(roots.size()) + " roots for (n,m) = (" +
                                 std::to_string(n) + "," + std::to_string(m) + ")");
    return roots;
}

ThetaPart ynm_theta_part(HarmonicIndex idx, double theta)
{
    int n = idx.n, m = idx.m;
    double s = std::sin(theta), c = std::cos(theta);
    double F = legendre_dm(n, m, c), Fp = legendre_dm(n, m + 1, c), Fpp = legendre_dm(n, m + 2, c);
    double sm = m == 0 ? 1 : std::pow(s, m);
    double sm1 = m == 0 ? 0 : (m == 1 ? 1 : std::pow(s, m - 1));
    double sm2 = m <= 1 ? 0 : (m == 2 ? 1 : std::pow(s, m - 2));
    ThetaPart t;
    t.value = sm * F;
    // d/dtheta of F(cos theta) is -sin(theta) F'.
    t.d1 = m * sm1 * c * F - sm * s * Fp;
    t.d2 = m * ((m - 1) * sm2 * c * c - sm) * F - m * sm1 * c * s * Fp  // derivative of m s^{m-1} c F
           - (m + 1) * sm * c * Fp + sm * s * s * Fpp;                   // derivative of -s^{m+1} F'
    return t;
}

double eval_ynm(HarmonicIndex idx, double theta, double phi)
{
    return ynm_theta_part(idx, theta).value * std::sin(idx.m * phi);
}

double eigenvalue(int n)
{
    if (n < 0) throw std::invalid_argument("degree must be nonnegative");
    return double(n) * (n + 1);
}

double GlobeGraph::phi_of_col(int k) const { return k * kPi / idx.m; }

namespace {

Vec2 azimuthal(double theta, double phi) { return {theta * std::cos(phi), -theta * std::sin(phi)}; }

}  // namespace

GlobeGraph globe_graph(HarmonicIndex idx)
{
    if (idx.m < 1 || idx.m > idx.n) throw std::invalid_argument("globe graph needs 1 <= m <= n");
    if (idx.n == idx.m) throw std::invalid_argument("n = m has no latitude circles");
    GlobeGraph G;
    G.idx = idx;
    auto roots = f_nm_roots(idx.n, idx.m);
    for (auto it = roots.rbegin(); it != roots.rend(); ++it) G.latTheta.push_back(std::acos(*it));
    int R = G.rows(), C = G.cols();
    auto& g = G.graph;
    for (int j = 0; j < R; ++j)
        for (int k = 0; k < C; ++k) {
            double th = G.latTheta[j], ph = G.phi_of_col(k);
            g.add_vertex(azimuthal(th, ph));
            G.vTheta.push_back(th);
            G.vPhi.push_back(ph);
        }
    G.north = g.add_vertex({0, 0});
    G.vTheta.push_back(0);
    G.vPhi.push_back(0);
    G.south = g.add_vertex({kPi, 0});
    G.vTheta.push_back(kPi);
    G.vPhi.push_back(0);
    for (int j = 0; j < R; ++j)
        for (int k = 0; k < C; ++k) g.add_edge(G.crossing(j, k), G.crossing(j, k + 1));
    for (int j = 0; j + 1 < R; ++j)
        for (int k = 0; k < C; ++k) g.add_edge(G.crossing(j, k), G.crossing(j + 1, k));
    int nBase = g.edge_count();
    for (int k = 0; k < C; ++k) g.add_edge(G.north, G.crossing(0, k));
    int sBase = g.edge_count();
    for (int k = 0; k < C; ++k) g.add_edge(G.crossing(R - 1, k), G.south);

    for (int j = 0; j < R; ++j)
        for (int k = 0; k < C; ++k) {
            int S = j + 1 < R ? 2 * G.mer_edge(j, k) : 2 * (sBase + k);
            int E = 2 * G.lat_edge(j, k);
            int N = j > 0 ? 2 * G.mer_edge(j - 1, k) + 1 : 2 * (nBase + k) + 1;
            int W = 2 * G.lat_edge(j, k - 1) + 1;
            g.set_rotation(G.crossing(j, k), {S, E, N, W});
        }
    std::vector<int> rn, rs;
    for (int k = 0; k < C; ++k) rn.push_back(2 * (nBase + k));
    for (int k = 0; k < C; ++k) rs.push_back(2 * (sBase + (C - k) % C) + 1);
    g.set_rotation(G.north, rn);
    g.set_rotation(G.south, rs);
    g.finalize();
    g.set_outer_half_edge(2 * G.lat_edge(0, 1));
    g.validate();
    return G;
}

GlobeGraph resolve_poles(const GlobeGraph& in)
{
    if (in.resolved || in.north < 0) throw std::invalid_argument("globe graph has no poles left to resolve");
    GlobeGraph G;
    G.idx = in.idx;
    G.latTheta = in.latTheta;
    G.resolved = true;
    int R = G.rows(), C = G.cols(), m = G.idx.m;
    auto& g = G.graph;
    for (int v = 0; v < R * C; ++v) {
        g.add_vertex(in.graph.pos(v));
        G.vTheta.push_back(in.vTheta[v]);
        G.vPhi.push_back(in.vPhi[v]);
    }
    for (int e = 0; e < R * C + (R - 1) * C; ++e) g.add_edge(in.graph.tail(2 * e), in.graph.head(2 * e));
    int nBase = g.edge_count();
    for (int i = 0; i < m; ++i) g.add_edge(G.crossing(0, 2 * i), G.crossing(0, 2 * i + 1));
    int sBase = g.edge_count();
    for (int i = 0; i < m; ++i) g.add_edge(G.crossing(R - 1, 2 * i), G.crossing(R - 1, 2 * i + 1));
    auto joined = [](int base, int k) { return 2 * (base + k / 2) + (k % 2); };
    for (int j = 0; j < R; ++j)
        for (int k = 0; k < C; ++k) {
            int S = j + 1 < R ? 2 * G.mer_edge(j, k) : joined(sBase, k);
            int E = 2 * G.lat_edge(j, k);
            int N = j > 0 ? 2 * G.mer_edge(j - 1, k) + 1 : joined(nBase, k);
            int W = 2 * G.lat_edge(j, k - 1) + 1;
            g.set_rotation(G.crossing(j, k), {S, E, N, W});
        }
    g.finalize();
    g.set_outer_half_edge(2 * G.lat_edge(0, 1));
    g.validate();
    return G;
}

}  // namespace nodalforge
