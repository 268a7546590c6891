#include "nodalforge/metric.hpp"
#include "nodalforge/parallel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace nodalforge {

namespace {

constexpr double kPi = std::numbers::pi;

Vec3d cross(const Vec3d& a, const Vec3d& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot(const Vec3d& a, const Vec3d& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3d& a) { return std::sqrt(dot(a, a)); }

struct Frame {
    Vec3d x, eth, eph;
};
Frame frame_at(double th, double ph)
{
    double st = std::sin(th), ct = std::cos(th), sp = std::sin(ph), cp = std::cos(ph);
    return {{st * cp, st * sp, ct}, {ct * cp, ct * sp, -st}, {-sp, cp, 0}};
}

int sgn(double x) { return x > 0 ? 1 : x < 0 ? -1 : 0; }

// Root of g in [a,b] with g(a), g(b) of opposite sign; Newton steps with bisection fallback.
double safe_root(const std::function<std::pair<double, double>(double)>& g, double a, double b)
{
    auto [ga, da] = g(a);
    (void)da;
    double x = 0.5 * (a + b);
    for (int it = 0; it < 200; ++it) {
        auto [gx, dx] = g(x);
        if (gx == 0) return x;
        if (sgn(gx) == sgn(ga)) a = x, ga = gx;
        else b = x;
        double nx = dx != 0 ? x - gx / dx : 0.5 * (a + b);
        if (!(nx > a && nx < b)) nx = 0.5 * (a + b);
        if (std::abs(nx - x) < 1e-15 * (1 + std::abs(x))) return nx;
        x = nx;
    }
    return x;
}

}  // namespace

Sym2 metric_from_gradient(const Vec2d& u, const Vec2d& v, double areaDensity)
{
    double p = u[0] * v[0] + u[1] * v[1];
    if (!(p > 0)) throw std::invalid_argument("metric_from_gradient needs <u,v> > 0");
    if (!(areaDensity > 0)) throw std::invalid_argument("area density must be positive");
    Vec2d ju{u[1], -u[0]};
    double s = areaDensity / p;
    return {s * (v[0] * v[0] + ju[0] * ju[0]), s * (v[0] * v[1] + ju[0] * ju[1]), s * (v[1] * v[1] + ju[1] * ju[1])};
}

LatLonGrid::LatLonGrid(int nphi_, int ntheta_) : nphi(nphi_), ntheta(ntheta_)
{
    if (nphi < 4 || nphi % 2) throw std::invalid_argument("nphi must be even and at least 4");
    if (ntheta < 3) throw std::invalid_argument("ntheta must be at least 3");
}

LatLonGrid LatLonGrid::parse(const std::string& spec)
{
    auto x = spec.find('x');
    if (x == std::string::npos) throw std::invalid_argument("grid must look like WxH, got '" + spec + "'");
    try {
        size_t a = 0, b = 0;
        int w = std::stoi(spec.substr(0, x), &a), h = std::stoi(spec.substr(x + 1), &b);
        if (a != x || b != spec.size() - x - 1) throw std::invalid_argument("");
        return LatLonGrid(w, h);
    } catch (const std::logic_error&) {
        throw std::invalid_argument("grid must look like WxH, got '" + spec + "'");
    }
}

std::string LatLonGrid::to_string() const { return std::to_string(nphi) + "x" + std::to_string(ntheta); }
double LatLonGrid::dtheta() const { return kPi / ntheta; }
double LatLonGrid::dphi() const { return 2 * kPi / nphi; }

double LatLonGrid::weight(int r) const
{
    double h = dtheta();
    double lo = r == 0 ? 0 : theta(r) - h / 2, hi = r == rows() - 1 ? kPi : theta(r) + h / 2;
    return (std::cos(lo) - std::cos(hi)) * dphi();
}

bool LatLonGrid::in_band(int r, double band) const
{
    double t = theta(r);
    return t >= band - 1e-12 && t <= kPi - band + 1e-12;
}

MetricField MetricField::round(const LatLonGrid& gr)
{
    MetricField m(gr);
    for (int r = 0; r < gr.rows(); ++r) {
        double s = std::sin(gr.theta(r));
        for (int c = 0; c < gr.cols(); ++c) m.g[gr.index(r, c)] = {1, 0, s * s};
    }
    return m;
}

ScalarField sample(const LatLonGrid& grid, const std::function<double(double, double)>& f)
{
    ScalarField s(grid);
    for (int r = 0; r < grid.rows(); ++r)
        for (int c = 0; c < grid.cols(); ++c) s.at(r, c) = f(grid.theta(r), grid.phi(c));
    return s;
}

double integrate(const ScalarField& f)
{
    double total = 0;
    for (int r = 0; r < f.grid.rows(); ++r) {
        double row = 0;
        for (int c = 0; c < f.grid.cols(); ++c) row += f.at(r, c);
        total += row * f.grid.weight(r);
    }
    return total;
}

double max_abs(const ScalarField& f, double band)
{
    double m = 0;
    for (int r = 0; r < f.grid.rows(); ++r)
        if (f.grid.in_band(r, band))
            for (int c = 0; c < f.grid.cols(); ++c) m = std::max(m, std::abs(f.at(r, c)));
    return m;
}

Vec3d SpherePoint::xyz() const { return frame_at(theta, phi).x; }

SpherePoint SpherePoint::from_xyz(const Vec3d& p)
{
    double n = norm(p);
    double ph = std::atan2(p[1], p[0]);
    if (ph < 0) ph += 2 * kPi;
    return {std::acos(std::clamp(p[2] / n, -1.0, 1.0)), ph};
}

double sphere_distance(const SpherePoint& a, const SpherePoint& b)
{
    Vec3d x = a.xyz(), y = b.xyz();
    return std::atan2(norm(cross(x, y)), dot(x, y));
}

CriticalSets critical_zeros_and_extrema(HarmonicIndex idx)
{
    if (idx.m < 1 || idx.m > idx.n) throw std::invalid_argument("need 1 <= m <= n");
    CriticalSets cs;
    cs.idx = idx;
    const int n = idx.n, m = idx.m, C = 2 * m;
    auto T = [&](double th) { return ynm_theta_part(idx, th); };

    std::vector<double> lat;
    auto roots = f_nm_roots(n, m);
    for (auto it = roots.rbegin(); it != roots.rend(); ++it) {
        double th = std::acos(*it);
        for (int k = 0; k < 20; ++k) {
            auto p = T(th);
            if (p.d1 == 0) break;
            double d = p.value / p.d1;
            th -= d;
            if (std::abs(d) < 1e-15) break;
        }
        lat.push_back(th);
    }
    // Extrema of the theta part between consecutive zeros (poles included).
    std::vector<double> bounds{0};
    bounds.insert(bounds.end(), lat.begin(), lat.end());
    bounds.push_back(kPi);
    std::vector<double> ext;
    double amp = 0;
    for (size_t i = 0; i + 1 < bounds.size(); ++i) {
        double a = bounds[i], b = bounds[i + 1];
        const int S = 64;
        double prev = T(a + (b - a) * 1e-9).d1, pa = a;
        double found = -1;
        for (int k = 1; k <= S; ++k) {
            double x = a + (b - a) * k / S;
            if (k == S) x = b - (b - a) * 1e-9;
            double d = T(x).d1;
            if (sgn(d) != sgn(prev) && sgn(prev) != 0) {
                found = safe_root(
                    [&](double th) {
                        auto p = T(th);
                        return std::pair{p.d1, p.d2};
                    },
                    pa, x);
                break;
            }
            prev = d;
            pa = x;
        }
        if (found < 0) throw std::runtime_error("no extremum of the theta part in a latitude band");
        ext.push_back(found);
        amp = std::max(amp, std::abs(T(found).value));
    }

    double gmax = 0;
    auto grad = [&](double th, double ph) {
        auto p = T(th);
        double gth = p.d1 * std::sin(m * ph), gph = p.value * m * std::cos(m * ph) / std::sin(th);
        return std::hypot(gth, gph) / amp;
    };
    for (size_t j = 0; j < lat.size(); ++j)
        for (int k = 0; k < C; ++k) {
            SpherePoint p{lat[j], k * kPi / m};
            cs.s1.push_back(p);
            cs.s1Vertex.push_back(static_cast<int>(j) * C + k);
            gmax = std::max(gmax, grad(p.theta, p.phi));
        }
    cs.s1.push_back({0, 0});
    cs.s1Vertex.push_back(-1);
    cs.s1.push_back({kPi, 0});
    cs.s1Vertex.push_back(-2);
    for (double th : ext)
        for (int k = 0; k < C; ++k) {
            SpherePoint p{th, (k + 0.5) * kPi / m};
            cs.s2.push_back(p);
            gmax = std::max(gmax, grad(p.theta, p.phi));
        }
    cs.maxGradient = gmax;
    if (gmax > 1e-8) {
        std::ostringstream os;
        os << "Newton refinement left |grad Y| / max|Y| = " << gmax << " at a critical point";
        throw std::runtime_error(os.str());
    }
    return cs;
}

double min_pairwise_distance(const CriticalSets& cs)
{
    std::vector<Vec3d> all;
    for (const auto& p : cs.s1) all.push_back(p.xyz());
    for (const auto& p : cs.s2) all.push_back(p.xyz());
    double best = kPi;
    for (size_t i = 0; i < all.size(); ++i)
        for (size_t j = i + 1; j < all.size(); ++j)
            best = std::min(best, std::atan2(norm(cross(all[i], all[j])), dot(all[i], all[j])));
    return best;
}

std::array<double, 3> cutoff_profile(double r, double a, double b)
{
    if (r <= a) return {1, 0, 0};
    if (r >= b) return {0, 0, 0};
    // S(x) = 1 / (1 + exp(1/x - 1/(1-x))) with x = (b - r)/(b - a).
    double w = b - a, x = (b - r) / w;
    double g = 1 / x - 1 / (1 - x);
    if (g > 700) return {0, 0, 0};
    if (g < -700) return {1, 0, 0};
    double S = 1 / (1 + std::exp(g));
    double g1 = -1 / (x * x) - 1 / ((1 - x) * (1 - x));
    double g2 = 2 / (x * x * x) - 2 / ((1 - x) * (1 - x) * (1 - x));
    double S1 = -S * (1 - S) * g1;
    double S2 = -S1 * (1 - 2 * S) * g1 - S * (1 - S) * g2;
    return {S, -S1 / w, S2 / (w * w)};
}

CapRadii default_cap_radii(const CriticalSets& cs, double factor)
{
    double d = min_pairwise_distance(cs);
    return {factor * d, 2 * factor * d};
}

BumpSet::BumpSet(const CriticalSets& cs, CapRadii radii) : cs_(cs), radii_(radii), lambda_(nodalforge::eigenvalue(cs.idx.n))
{
    if (!(radii.u > 0 && radii.v > radii.u)) throw std::invalid_argument("cap radii need 0 < U < V");
    for (const auto& p : cs.s1) centers_.push_back(p.xyz());
    for (const auto& p : cs.s2) centers_.push_back(p.xyz());
    double d = min_pairwise_distance(cs);
    if (d < radii.u + radii.v - 1e-12) {
        std::ostringstream os;
        os << "caps overlap: U + V = " << radii.u + radii.v << " exceeds the minimal distance " << d;
        throw std::invalid_argument(os.str());
    }
    if (!(zonal(radii.u) > 0)) throw std::invalid_argument("zonal harmonic is not positive on U");
    // Cumulative radial integrals on [0, V].
    cumZ_.assign(tableN_ + 1, 0);
    cumK_.assign(tableN_ + 1, 0);
    cumZd_.resize(tableN_ + 1);
    cumKd_.resize(tableN_ + 1);
    auto iz = [&](double r) { return zonal(r) * cutoff_profile(r, radii_.u, radii_.v)[0] * std::sin(r); };
    auto ik = [&](double r) { return cutoff_profile(r, radii_.u, radii_.v)[0] * std::sin(r); };
    static const double gx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                                 0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
    static const double gw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                                 0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
    double h = radii_.v / tableN_;
    for (int i = 0; i <= tableN_; ++i) {
        double r = i * h;
        cumZd_[i] = iz(r);
        cumKd_[i] = ik(r);
        if (i == 0) continue;
        double sz = 0, sk = 0;
        for (int k = 0; k < 8; ++k) {
            double x = r - h / 2 + h / 2 * gx[k];
            sz += gw[k] * iz(x);
            sk += gw[k] * ik(x);
        }
        cumZ_[i] = cumZ_[i - 1] + sz * h / 2;
        cumK_[i] = cumK_[i - 1] + sk * h / 2;
    }
}

double BumpSet::eigenvalue() const { return lambda_; }

double BumpSet::table(const std::vector<double>& vals, const std::vector<double>& ders, double r) const
{
    if (r <= 0) return 0;
    if (r >= radii_.v) return vals.back();
    double h = radii_.v / tableN_, s = r / h;
    int i = std::min(static_cast<int>(s), tableN_ - 1);
    double x = s - i;
    // Cubic Hermite with exact derivatives.
    double h00 = (1 + 2 * x) * (1 - x) * (1 - x), h10 = x * (1 - x) * (1 - x), h01 = x * x * (3 - 2 * x),
           h11 = x * x * (x - 1);
    return h00 * vals[i] + h10 * h * ders[i] + h01 * vals[i + 1] + h11 * h * ders[i + 1];
}

double BumpSet::zonal(double r) const { return legendre_p(cs_.idx.n, std::cos(r)); }

std::array<double, 3> BumpSet::zonal_jet(double r) const
{
    int n = cs_.idx.n;
    double x = std::cos(r), s = std::sin(r);
    double p = legendre_p(n, x), p1 = legendre_dm(n, 1, x), p2 = legendre_dm(n, 2, x);
    return {p, -s * p1, s * s * p2 - x * p1};
}

double BumpSet::phi_radial(double r) const { return r >= radii_.v ? 0 : zonal(r) * cutoff_profile(r, radii_.u, radii_.v)[0]; }

double BumpSet::phi_plus_laplacian(double r) const
{
    if (r <= radii_.u || r >= radii_.v) return 0;
    auto Z = zonal_jet(r);
    auto k = cutoff_profile(r, radii_.u, radii_.v);
    double cot = std::cos(r) / std::sin(r);
    return (2 * Z[1] * k[1] + Z[0] * (k[2] + cot * k[1])) / lambda_;
}

double BumpSet::phi_integral() const { return 2 * kPi * cumZ_.back(); }
double BumpSet::psi_integral() const { return 4 * kPi - cap_count() * 2 * kPi * cumK_.back(); }
double BumpSet::cumulative_zonal(double r) const { return table(cumZ_, cumZd_, r); }
double BumpSet::cumulative_cutoff(double r) const { return table(cumK_, cumKd_, r); }

int BumpSet::cap_of(const Vec3d& x, double* rOut) const
{
    int best = -1;
    double bestR = radii_.v;
    for (int q = 0; q < cap_count(); ++q) {
        double r = std::atan2(norm(cross(x, centers_[q])), dot(x, centers_[q]));
        if (r < bestR) best = q, bestR = r;
    }
    if (rOut) *rOut = bestR;
    return best;
}

double BumpSet::phi(int q, const SpherePoint& x) const
{
    if (!is_s1(q)) throw std::out_of_range("phi_p exists only for points of S1");
    Vec3d p = x.xyz();
    return phi_radial(std::atan2(norm(cross(p, centers_[q])), dot(p, centers_[q])));
}

double BumpSet::psi(const SpherePoint& x) const
{
    Vec3d p = x.xyz();
    double s = 1;
    for (int q = 0; q < cap_count(); ++q) {
        double c = dot(p, centers_[q]);
        if (c < std::cos(radii_.v)) continue;
        s -= cutoff_profile(std::atan2(norm(cross(p, centers_[q])), c), radii_.u, radii_.v)[0];
    }
    return s;
}

ScalarField BumpSet::phi_field(int q, const LatLonGrid& grid) const
{
    return sample(grid, [&](double th, double ph) { return phi(q, {th, ph}); });
}

ScalarField BumpSet::psi_field(const LatLonGrid& grid) const
{
    return sample(grid, [&](double th, double ph) { return psi({th, ph}); });
}

BumpSet build_bumps(const CriticalSets& cs, CapRadii radii) { return BumpSet(cs, radii); }

std::vector<int> sign_assignment(const CriticalSets& cs, const GlobeGraph& resolved, const PairingAssignment& pairings)
{
    if (!resolved.resolved) throw std::invalid_argument("sign assignment needs the pole-resolved globe graph");
    if (static_cast<int>(pairings.size()) != resolved.graph.vertex_count())
        throw std::invalid_argument("pairing assignment does not match the graph");
    const HarmonicIndex idx = cs.idx;
    const int m = idx.m;
    std::vector<int> s(cs.s1.size());
    for (size_t i = 0; i < cs.s1.size(); ++i) {
        int v = cs.s1Vertex[i];
        if (v >= 0) {
            int k = v % (2 * m);
            double d1 = ynm_theta_part(idx, cs.s1[i].theta).d1;
            // Y ~ d1 (theta - theta_j) * m cos(k pi) (phi - phi_k); NE means theta < theta_j, phi > phi_k.
            int ne = -sgn(d1) * (k % 2 ? -1 : 1);
            // Pairing 0 = (S E)(N W) joins the NE and SW quadrants through the crossing.
            bool joinsNE = pairings[v] == 0;
            s[i] = (joinsNE == (ne > 0)) ? 1 : -1;
        } else {
            // The pole pairing joins meridians (0,1), cutting off the sector 0 < phi < pi/m,
            // so the pole takes the sign opposite to that sector.
            double th = v == -1 ? 1e-3 : kPi - 1e-3;
            s[i] = -sgn(ynm_theta_part(idx, th).value);
        }
    }
    return s;
}

double compute_ms(const std::vector<int>& s, const ScalarField& psi, const std::vector<ScalarField>& phis)
{
    if (s.size() != phis.size()) throw std::invalid_argument("one sign per bump is required");
    double ip = integrate(psi);
    if (!(std::abs(ip) > 0)) throw std::domain_error("the integral of psi vanishes");
    double num = 0;
    for (size_t i = 0; i < s.size(); ++i) num += s[i] * integrate(phis[i]);
    return -num / ip;
}

// ---------------------------------------------------------------------------
// Spectral Poisson solve.

namespace {

// Clenshaw-Curtis weights on x_k = cos(k pi / N), k = 0..N.
std::vector<double> clenshaw_curtis(int N)
{
    std::vector<double> w(N + 1);
    for (int k = 0; k <= N; ++k) {
        double s = 0;
        for (int j = 1; j <= N / 2; ++j) {
            double b = (2 * j == N) ? 1 : 2;
            s += b / (4.0 * j * j - 1) * std::cos(2.0 * j * k * kPi / N);
        }
        double c = (k == 0 || k == N) ? 1 : 2;
        w[k] = c / N * (1 - s);
    }
    return w;
}

// Normalized associated Legendre functions Pbar_l^m(cos th) for l = m..L, with
// int_{-1}^{1} Pbar_l^m Pbar_k^m dx = delta_lk, and their theta derivatives.
void legendre_column(int m, int L, double th, std::vector<double>& P, std::vector<double>& dP)
{
    P.assign(L + 1, 0);
    dP.assign(L + 1, 0);
    if (m > L) return;
    double x = std::cos(th), s = std::sin(th);
    double pmm = 1 / std::sqrt(2.0);
    for (int k = 1; k <= m; ++k) pmm *= std::sqrt((2.0 * k + 1) / (2.0 * k)) * s;
    P[m] = pmm;
    if (m + 1 <= L) P[m + 1] = std::sqrt(2.0 * m + 3) * x * pmm;
    for (int l = m + 2; l <= L; ++l) {
        double a = std::sqrt((4.0 * l * l - 1) / (double(l) * l - double(m) * m));
        double b = std::sqrt((double(l - 1) * (l - 1) - double(m) * m) / (4.0 * (l - 1) * (l - 1) - 1));
        P[l] = a * (x * P[l - 1] - b * P[l - 2]);
    }
    if (s == 0) return;
    for (int l = m; l <= L; ++l) {
        double prev = l > m ? P[l - 1] : 0;
        double c = l > m ? std::sqrt((2.0 * l + 1) / (2.0 * l - 1) * (double(l) * l - double(m) * m)) : 0;
        dP[l] = (l * x * P[l] - c * prev) / s;
    }
}

}  // namespace

SpectralSolve solve_u0(const ScalarField& source, int lmax)
{
    const LatLonGrid& g = source.grid;
    const int R = g.rows(), C = g.cols(), N = g.ntheta;
    if (lmax < 0) lmax = std::min(N / 2, C / 2 - 1);
    double mean = integrate(source) / (4 * kPi);
    double scale = 0;
    for (double x : source.v) scale = std::max(scale, std::abs(x));
    if (std::abs(mean) > 1e-9 * std::max(1.0, scale)) throw std::domain_error("source must have zero mean");

    // Fourier coefficients per row, plus the two poles (m = 0 only, by row averaging).
    const int M = C / 2;
    std::vector<std::vector<std::complex<double>>> F(N + 1, std::vector<std::complex<double>>(M + 1));
    {
        std::vector<double> in(C);
        std::vector<std::complex<double>> out(M + 1);
        fftw_plan plan = fftw_plan_dft_r2c_1d(C, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
        for (int r = 0; r < R; ++r) {
            for (int c = 0; c < C; ++c) in[c] = source.at(r, c);
            fftw_execute(plan);
            for (int m = 0; m <= M; ++m) F[r + 1][m] = out[m] / double(C);
        }
        fftw_destroy_plan(plan);
        F[0][0] = F[1][0];
        F[N][0] = F[N - 1][0];
    }
    auto w = clenshaw_curtis(N);
    // f(phi) = sum_m a_m cos + b_m sin with a_m = 2 Re F_m, b_m = -2 Im F_m (m > 0), a_0 = F_0.
    std::vector<std::vector<double>> A(lmax + 1, std::vector<double>(lmax + 1, 0)), B = A;
    std::vector<double> P, dP;
    for (int k = 0; k <= N; ++k) {
        double th = k * kPi / N;
        for (int m = 0; m <= std::min(lmax, M - 1); ++m) {
            double am = m == 0 ? F[k][0].real() : 2 * F[k][m].real();
            double bm = m == 0 ? 0 : -2 * F[k][m].imag();
            if (am == 0 && bm == 0) continue;
            legendre_column(m, lmax, th, P, dP);
            for (int l = m; l <= lmax; ++l) {
                A[m][l] += w[k] * am * P[l];
                B[m][l] += w[k] * bm * P[l];
            }
        }
    }
    SpectralSolve out;
    out.lmax = lmax;
    out.u0 = VectorField(g);
    double errNum = 0, errDen = 0;
    std::vector<double> cosm(C), sinm(C);
    for (int r = 0; r < R; ++r) {
        double th = g.theta(r), s = std::sin(th);
        std::vector<double> rec(C, 0);
        for (int m = 0; m <= std::min(lmax, M - 1); ++m) {
            legendre_column(m, lmax, th, P, dP);
            double pa = 0, pb = 0, ua = 0, ub = 0, va = 0, vb = 0;
            for (int l = std::max(m, 1); l <= lmax; ++l) {
                double k = -1.0 / (double(l) * (l + 1));
                pa += A[m][l] * P[l];
                pb += B[m][l] * P[l];
                ua += k * A[m][l] * dP[l];
                ub += k * B[m][l] * dP[l];
                va += k * A[m][l] * P[l];
                vb += k * B[m][l] * P[l];
            }
            for (int c = 0; c < C; ++c) {
                double cm = std::cos(m * g.phi(c)), sm = std::sin(m * g.phi(c));
                size_t i = g.index(r, c);
                out.u0.th[i] += ua * cm + ub * sm;
                out.u0.ph[i] += m * (-va * sm + vb * cm) / s;
                rec[c] += pa * cm + pb * sm;
            }
        }
        for (int c = 0; c < C; ++c) {
            double d = rec[c] - source.at(r, c);
            errNum += g.weight(r) * d * d;
            errDen += g.weight(r) * source.at(r, c) * source.at(r, c);
        }
    }
    out.divergenceMismatch = errDen > 0 ? std::sqrt(errNum / errDen) : std::sqrt(errNum);
    return out;
}

// ---------------------------------------------------------------------------
// Perturbation model.

PerturbationModel::PerturbationModel(BumpSet bumps, std::vector<int> signs) : bumps_(std::move(bumps)), s_(std::move(signs))
{
    const auto& cs = bumps_.critical();
    if (s_.size() != cs.s1.size()) throw std::invalid_argument("one sign per point of S1 is required");
    for (int x : s_)
        if (x != 1 && x != -1) throw std::invalid_argument("signs must be +1 or -1");
    double sumS = std::accumulate(s_.begin(), s_.end(), 0.0);
    ms_ = -sumS * bumps_.phi_integral() / bumps_.psi_integral();
    amp_ = 0;
    for (const auto& p : cs.s2) amp_ = std::max(amp_, std::abs(ynm_theta_part(cs.idx, p.theta).value));
    double V = bumps_.radii().v;
    for (int q = 0; q < bumps_.cap_count(); ++q) {
        double sq = bumps_.is_s1(q) ? s_[q] : 0;
        mass_.push_back(2 * kPi * (sq * bumps_.cumulative_zonal(V) - ms_ * bumps_.cumulative_cutoff(V)));
    }
    for (int q = 0; q < bumps_.cap_count(); ++q) etaCentre_.push_back(stream(q, SpherePoint::from_xyz(bumps_.center(q))));
}

double PerturbationModel::radial_field(int q, double r) const
{
    const double V = bumps_.radii().v;
    double M = mass_[q];
    if (r >= V) return M * (1 + std::cos(r)) / (4 * kPi * std::sin(r));
    if (r < 1e-12) return 0;
    double sq = bumps_.is_s1(q) ? s_[q] : 0;
    double dphi = 0;
    if (sq != 0) {
        auto Z = bumps_.zonal_jet(r);
        auto k = cutoff_profile(r, bumps_.radii().u, V);
        dphi = Z[1] * k[0] + Z[0] * k[1];
    }
    double inside = 2 * kPi *
                    (sq * (std::sin(r) * dphi / lambda() + bumps_.cumulative_zonal(r)) - ms_ * bumps_.cumulative_cutoff(r));
    return (inside - M * (1 - std::cos(r)) / 2) / (2 * kPi * std::sin(r));
}

Vec2d PerturbationModel::raw_u0(const SpherePoint& x) const
{
    Frame F = frame_at(x.theta, x.phi);
    Vec3d acc{0, 0, 0};
    const double cosV = std::cos(bumps_.radii().v);
    for (int q = 0; q < bumps_.cap_count(); ++q) {
        const Vec3d& c = bumps_.center(q);
        double cr = dot(F.x, c);
        if (cr >= cosV) {
            Vec3d w = cross(F.x, c);
            double sr = norm(w);
            if (sr < 1e-14) continue;
            double a = radial_field(q, std::atan2(sr, cr));
            for (int k = 0; k < 3; ++k) acc[k] += a * (cr * F.x[k] - c[k]) / sr;
        } else if (1 + cr > 1e-14) {
            double f = mass_[q] / (4 * kPi * (1 - cr));
            for (int k = 0; k < 3; ++k) acc[k] += f * (cr * F.x[k] - c[k]);
        }
    }
    return {dot(acc, F.eth), dot(acc, F.eph)};
}

double PerturbationModel::stream(int q, const SpherePoint& x) const
{
    const Vec3d& c = bumps_.center(q);
    Vec3d e1 = std::abs(c[2]) < 0.9 ? cross({0, 0, 1}, c) : cross({1, 0, 0}, c);
    double n1 = norm(e1);
    for (auto& v : e1) v /= n1;
    Vec3d e2 = cross(c, e1);
    auto zeta = [&](const Vec3d& y) { return std::complex<double>(dot(y, e1), dot(y, e2)) / (1 + dot(y, c)); };
    std::complex<double> z = zeta(x.xyz());
    double eta = 0;
    for (int p = 0; p < bumps_.cap_count(); ++p) {
        if (p == q) continue;
        const Vec3d& cp = bumps_.center(p);
        if (1 + dot(cp, c) < 1e-12) continue;  // antipodal centre: contributes a constant to H
        std::complex<double> zp = zeta(cp);
        eta += mass_[p] / (2 * kPi) * std::arg((z - zp) / (-zp));
    }
    return eta;
}

PerturbationModel::Local PerturbationModel::at(const SpherePoint& x) const
{
    Local L;
    Frame F = frame_at(x.theta, x.phi);
    const auto& cs = bumps_.critical();
    const int m = cs.idx.m;
    auto T = ynm_theta_part(cs.idx, x.theta);
    double sm = std::sin(m * x.phi), cm = std::cos(m * x.phi), st = std::sin(x.theta);
    L.f = T.value * sm / amp_;
    L.gradF = {T.d1 * sm / amp_, T.value * m * cm / (st * amp_)};

    const double U = bumps_.radii().u, V = bumps_.radii().v, cosV = std::cos(V);
    Vec3d u0{0, 0, 0}, gradP{0, 0, 0}, gradPhi{0, 0, 0};
    double P = ms_, src = ms_;
    int cap = -1;
    double capR = 0;
    Vec3d capDir{0, 0, 0};
    for (int q = 0; q < bumps_.cap_count(); ++q) {
        const Vec3d& c = bumps_.center(q);
        double cr = dot(F.x, c);
        if (cr >= cosV) {
            Vec3d w = cross(F.x, c);
            double sr = norm(w), r = std::atan2(sr, cr);
            Vec3d dir{0, 0, 0};
            if (sr > 1e-14)
                for (int k = 0; k < 3; ++k) dir[k] = (cr * F.x[k] - c[k]) / sr;
            auto kap = cutoff_profile(r, U, V);
            P -= ms_ * kap[0];
            src -= ms_ * kap[0];
            double dP = -ms_ * kap[1];
            if (bumps_.is_s1(q)) {
                auto Z = bumps_.zonal_jet(r);
                double sq = s_[q];
                P += sq * Z[0] * kap[0];
                double dphi = Z[1] * kap[0] + Z[0] * kap[1];
                dP += sq * dphi;
                for (int k = 0; k < 3; ++k) gradPhi[k] += sq * dphi * dir[k];
                src += sq * bumps_.phi_plus_laplacian(r);
            }
            double a = radial_field(q, r);
            for (int k = 0; k < 3; ++k) {
                gradP[k] += dP * dir[k];
                u0[k] += a * dir[k];
            }
            if (r < U) cap = q, capR = r, capDir = dir;
        } else if (1 + cr > 1e-14) {
            double f = mass_[q] / (4 * kPi * (1 - cr));
            for (int k = 0; k < 3; ++k) u0[k] += f * (cr * F.x[k] - c[k]);
        }
    }
    if (cap >= 0) {
        // u0 = -J grad(eta) on U_q; subtract -J grad(chi (eta - eta_q)).
        auto chi = cutoff_profile(capR, U / 2, U);
        if (chi[0] == 1) {
            u0 = {0, 0, 0};
            L.innerCap = cap;
        } else if (chi[0] > 0) {
            double eta = stream(cap, x) - etaCentre_[cap];
            Vec3d jdir = cross(F.x, capDir);
            for (int k = 0; k < 3; ++k) u0[k] = (1 - chi[0]) * u0[k] + eta * chi[1] * jdir[k];
        }
    }
    L.P = P;
    L.source = src;
    L.gradP = {dot(gradP, F.eth), dot(gradP, F.eph)};
    L.u0 = {dot(u0, F.eth), dot(u0, F.eph)};
    double lam = lambda();
    L.u = {-lam * L.u0[0] + dot(gradPhi, F.eth), -lam * L.u0[1] + dot(gradPhi, F.eph)};
    return L;
}

namespace {

std::vector<PerturbationModel::Local> evaluate_grid(const PerturbationModel& model, const LatLonGrid& grid)
{
    std::vector<PerturbationModel::Local> out(grid.size());
    parallel_for(grid.rows(), [&](int r) {
        for (int c = 0; c < grid.cols(); ++c) out[grid.index(r, c)] = model.at({grid.theta(r), grid.phi(c)});
    });
    return out;
}

// Smallest positive root of A + B t + C t^2 (A > 0), or +inf.
double first_root(double A, double B, double C)
{
    double inf = std::numeric_limits<double>::infinity();
    if (std::abs(C) < 1e-300) return B < 0 ? -A / B : inf;
    double disc = B * B - 4 * A * C;
    if (disc < 0) return inf;
    double sq = std::sqrt(disc);
    double q = -0.5 * (B + (B >= 0 ? sq : -sq));
    double r1 = q / C, r2 = q != 0 ? A / q : inf;
    double best = inf;
    for (double r : {r1, r2})
        if (r > 0) best = std::min(best, r);
    return best;
}

double threshold_of(const std::vector<PerturbationModel::Local>& locs, const LatLonGrid& grid, SpherePoint* worst)
{
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < grid.rows(); ++r)
        for (int c = 0; c < grid.cols(); ++c) {
            const auto& L = locs[grid.index(r, c)];
            if (L.innerCap >= 0) continue;
            double A = L.gradF[0] * L.gradF[0] + L.gradF[1] * L.gradF[1];
            double B = L.gradF[0] * (L.u[0] + L.gradP[0]) + L.gradF[1] * (L.u[1] + L.gradP[1]);
            double C = L.u[0] * L.gradP[0] + L.u[1] * L.gradP[1];
            double t = A > 0 ? first_root(A, B, C) : 0;
            if (t < best) {
                best = t;
                if (worst) *worst = {grid.theta(r), grid.phi(c)};
            }
        }
    return best;
}

}  // namespace

double positivity_threshold(const PerturbationModel& model, const LatLonGrid& grid, SpherePoint* worst)
{
    return threshold_of(evaluate_grid(model, grid), grid, worst);
}

PerturbedSystem assemble_perturbed(const PerturbationModel& model, const LatLonGrid& grid, double t)
{
    auto locs = evaluate_grid(model, grid);
    PerturbedSystem sys;
    SpherePoint worst;
    sys.threshold = threshold_of(locs, grid, &worst);
    sys.t = t > 0 ? t : sys.threshold / 2;
    if (!(sys.t < sys.threshold)) {
        std::ostringstream os;
        os << "t = " << sys.t << " violates <grad f + t u, grad f_t> > 0; the largest admissible t is "
           << sys.threshold << ", reached at theta = " << worst.theta << ", phi = " << worst.phi;
        throw std::domain_error(os.str());
    }
    sys.ft = ScalarField(grid);
    sys.gt = MetricField(grid);
    sys.v = VectorField(grid);
    for (int r = 0; r < grid.rows(); ++r) {
        double s = std::sin(grid.theta(r));
        for (int c = 0; c < grid.cols(); ++c) {
            size_t i = grid.index(r, c);
            const auto& L = locs[i];
            sys.ft.v[i] = L.f + sys.t * L.P;
            Vec2d w{L.gradF[0] + sys.t * L.gradP[0], L.gradF[1] + sys.t * L.gradP[1]};  // grad f_t
            Vec2d v{L.gradF[0] + sys.t * L.u[0], L.gradF[1] + sys.t * L.u[1]};
            sys.v.th[i] = v[0];
            sys.v.ph[i] = v[1];
            if (L.innerCap >= 0) {
                sys.gt.g[i] = {1, 0, s * s};
                ++sys.roundPoints;
                continue;
            }
            // Coordinate components: v^phi = v_hat / sin, (df_t)_phi = sin * grad_hat.
            Vec2d vc{v[0], v[1] / s}, omega{w[0] / s, w[1]};
            sys.gt.g[i] = metric_from_gradient(vc, omega, s);
        }
    }
    return sys;
}

// ---------------------------------------------------------------------------
// Finite differences.

ScalarField laplacian(const MetricField& gm, const ScalarField& f)
{
    const LatLonGrid& g = f.grid;
    const int R = g.rows(), C = g.cols();
    const double h = g.dtheta(), k = g.dphi();
    // K^ij = sqrt|g| g^ij at nodes.
    std::vector<double> Ktt(g.size()), Ktp(g.size()), Kpp(g.size()), rg(g.size());
    for (size_t i = 0; i < g.size(); ++i) {
        const Sym2& m = gm.g[i];
        double d = m.det(), s = std::sqrt(d);
        rg[i] = s;
        Ktt[i] = m.yy / s;
        Ktp[i] = -m.xy / s;
        Kpp[i] = m.xx / s;
    }
    auto F = [&](int r, int c) { return f.v[g.index(r, c)]; };
    auto dphiC = [&](int r, int c) { return (F(r, c + 1) - F(r, c - 1)) / (2 * k); };
    auto dthC = [&](int r, int c) { return (F(r + 1, c) - F(r - 1, c)) / (2 * h); };
    ScalarField out(g);
    for (int r = 1; r + 1 < R; ++r)
        for (int c = 0; c < C; ++c) {
            auto flux_t = [&](int r0) {  // at (r0 + 1/2, c)
                size_t a = g.index(r0, c), b = g.index(r0 + 1, c);
                double ktt = 0.5 * (Ktt[a] + Ktt[b]), ktp = 0.5 * (Ktp[a] + Ktp[b]);
                return ktt * (F(r0 + 1, c) - F(r0, c)) / h + ktp * 0.5 * (dphiC(r0, c) + dphiC(r0 + 1, c));
            };
            auto flux_p = [&](int c0) {  // at (r, c0 + 1/2)
                size_t a = g.index(r, c0), b = g.index(r, c0 + 1);
                double kpp = 0.5 * (Kpp[a] + Kpp[b]), ktp = 0.5 * (Ktp[a] + Ktp[b]);
                return kpp * (F(r, c0 + 1) - F(r, c0)) / k + ktp * 0.5 * (dthC(r, c0) + dthC(r, c0 + 1));
            };
            double div = (flux_t(r) - flux_t(r - 1)) / h + (flux_p(c) - flux_p(c - 1)) / k;
            out.at(r, c) = div / rg[g.index(r, c)];
        }
    return out;
}

double eigen_residual(const MetricField& g, const ScalarField& f, double lambda, double band)
{
    ScalarField L = laplacian(g, f);
    double fmax = max_abs(f), worst = 0;
    for (int r = 1; r + 1 < f.grid.rows(); ++r) {
        if (!f.grid.in_band(r, band)) continue;
        for (int c = 0; c < f.grid.cols(); ++c) worst = std::max(worst, std::abs(L.at(r, c) + lambda * f.at(r, c)));
    }
    return worst / (lambda * fmax);
}

ScalarField gaussian_curvature(const MetricField& gm)
{
    // Coframe e1 = a dth + b dph, e2 = c dph; connection form P dth + Q dph with
    // P = (b_th - a_ph)/c, Q = (c_th + P b)/a, and K = (P_ph - Q_th) / W, W = a c.
    const LatLonGrid& g = gm.grid;
    const int R = g.rows(), C = g.cols();
    const double h = g.dtheta(), k = g.dphi();
    std::vector<double> a(g.size()), b(g.size()), c(g.size()), W(g.size());
    for (size_t i = 0; i < g.size(); ++i) {
        const Sym2& m = gm.g[i];
        a[i] = std::sqrt(m.xx);
        b[i] = m.xy / a[i];
        W[i] = std::sqrt(m.det());
        c[i] = W[i] / a[i];
    }
    auto I = [&](int r, int col) { return g.index(r, col); };
    std::vector<double> P(g.size(), 0), Q(g.size(), 0);
    for (int r = 1; r + 1 < R; ++r)
        for (int col = 0; col < C; ++col) {
            size_t i = I(r, col);
            double bth = (b[I(r + 1, col)] - b[I(r - 1, col)]) / (2 * h);
            double aph = (a[I(r, col + 1)] - a[I(r, col - 1)]) / (2 * k);
            double cth = (c[I(r + 1, col)] - c[I(r - 1, col)]) / (2 * h);
            P[i] = (bth - aph) / c[i];
            Q[i] = (cth + P[i] * b[i]) / a[i];
        }
    ScalarField K(g);
    for (int r = 2; r + 2 < R; ++r)
        for (int col = 0; col < C; ++col) {
            double pph = (P[I(r, col + 1)] - P[I(r, col - 1)]) / (2 * k);
            double qth = (Q[I(r + 1, col)] - Q[I(r - 1, col)]) / (2 * h);
            K.at(r, col) = (pph - qth) / W[I(r, col)];
        }
    return K;
}

// ---------------------------------------------------------------------------
// Nodal set.

namespace {

int sgn0(double x) { return x >= 0 ? 1 : -1; }
bool alternating(int a, int b, int d, int e) { return a == d && b == e && a != b; }

// Connectivity inside a cell with alternating corners v = (TL, TR, BR, BL), decided by quadtree
// refinement of the continuum field: +1 when TL and BR connect, -1 when TR and BL connect, 0 for neither.
int resolve_cell(const std::function<double(double, double)>& field, double th0, double th1, double ph0, double ph1,
                 const std::array<double, 4>& v, int depth)
{
    if (depth > 60) {
        std::ostringstream os;
        os << "ambiguous cell near theta = " << th0 << ", phi = " << ph0 << " survives refinement";
        throw std::runtime_error(os.str());
    }
    double tm = 0.5 * (th0 + th1), pm = 0.5 * (ph0 + ph1);
    double n[3][3] = {{v[0], field(th0, pm), v[1]}, {field(tm, ph0), field(tm, pm), field(tm, ph1)}, {v[3], field(th1, pm), v[2]}};
    int parent[9];
    std::iota(parent, parent + 9, 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    auto unite = [&](int x, int y) { parent[find(x)] = find(y); };
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (j + 1 < 3 && sgn0(n[i][j]) == sgn0(n[i][j + 1])) unite(3 * i + j, 3 * i + j + 1);
            if (i + 1 < 3 && sgn0(n[i][j]) == sgn0(n[i + 1][j])) unite(3 * i + j, 3 * i + j + 3);
        }
    const double ths[3] = {th0, tm, th1}, phs[3] = {ph0, pm, ph1};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            std::array<double, 4> w{n[i][j], n[i][j + 1], n[i + 1][j + 1], n[i + 1][j]};
            if (!alternating(sgn0(w[0]), sgn0(w[1]), sgn0(w[2]), sgn0(w[3]))) continue;
            int res = resolve_cell(field, ths[i], ths[i + 1], phs[j], phs[j + 1], w, depth + 1);
            if (res > 0) unite(3 * i + j, 3 * (i + 1) + j + 1);
            if (res < 0) unite(3 * i + j + 1, 3 * (i + 1) + j);
        }
    if (find(0) == find(8)) return 1;
    if (find(2) == find(6)) return -1;
    return 0;
}

}  // namespace

OvalConfig extract_nodal_config(const ScalarField& f, const std::function<double(double, double)>& refine)
{
    const LatLonGrid& g = f.grid;
    const int R = g.rows(), C = g.cols();
    const int north = static_cast<int>(g.size()), south = north + 1, total = north + 2;
    auto sign = [&](int r, int c) { return sgn0(f.at(r, c)); };
    double avgN = 0, avgS = 0;
    for (int c = 0; c < C; ++c) avgN += f.at(0, c), avgS += f.at(R - 1, c);
    int sN = avgN >= 0 ? 1 : -1, sS = avgS >= 0 ? 1 : -1;

    std::vector<int> parent(total);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    auto unite = [&](int x, int y) { parent[find(x)] = find(y); };
    for (int r = 0; r + 1 < R; ++r)
        for (int c = 0; c < C; ++c) {
            if (!alternating(sign(r, c), sign(r, c + 1), sign(r + 1, c + 1), sign(r + 1, c))) continue;
            if (!refine) {
                std::ostringstream os;
                os << "cell at theta = " << g.theta(r) << ", phi = " << g.phi(c)
                   << " has alternating corner signs; use a finer grid";
                throw std::runtime_error(os.str());
            }
            std::array<double, 4> v{f.at(r, c), f.at(r, c + 1), f.at(r + 1, c + 1), f.at(r + 1, c)};
            int res = resolve_cell(refine, g.theta(r), g.theta(r + 1), g.phi(c), g.phi(c) + g.dphi(), v, 0);
            if (res > 0) unite(static_cast<int>(g.index(r, c)), static_cast<int>(g.index(r + 1, c + 1)));
            if (res < 0) unite(static_cast<int>(g.index(r, c + 1)), static_cast<int>(g.index(r + 1, c)));
        }
    std::vector<std::pair<int, int>> crossings;
    auto link = [&](int x, int sx, int y, int sy) {
        if (sx == sy) unite(x, y);
        else crossings.push_back({x, y});
    };
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) {
            int i = static_cast<int>(g.index(r, c));
            link(i, sign(r, c), static_cast<int>(g.index(r, c + 1)), sign(r, c + 1));
            if (r + 1 < R) link(i, sign(r, c), static_cast<int>(g.index(r + 1, c)), sign(r + 1, c));
        }
    for (int c = 0; c < C; ++c) {
        link(north, sN, static_cast<int>(g.index(0, c)), sign(0, c));
        link(south, sS, static_cast<int>(g.index(R - 1, c)), sign(R - 1, c));
    }
    std::map<int, int> comp;
    for (int x = 0; x < total; ++x) comp.emplace(find(x), static_cast<int>(comp.size()));
    int nc = static_cast<int>(comp.size());
    std::vector<std::set<int>> adj(nc);
    for (auto [x, y] : crossings) {
        int a = comp[find(x)], b = comp[find(y)];
        if (a == b) throw std::logic_error("sign change inside one component");
        adj[a].insert(b);
        adj[b].insert(a);
    }
    size_t edges = 0;
    for (const auto& s : adj) edges += s.size();
    edges /= 2;
    if (edges + 1 != static_cast<size_t>(nc)) throw std::runtime_error("nodal domains do not form a tree; use a finer grid");
    // Root at the north pole's domain; every other domain is bounded by the oval to its parent.
    OvalConfig out;
    int root = comp[find(north)];
    std::vector<int> oval(nc, -2), queue{root};
    oval[root] = -1;
    for (size_t qi = 0; qi < queue.size(); ++qi) {
        int x = queue[qi];
        for (int y : adj[x]) {
            if (oval[y] != -2) continue;
            oval[y] = out.add("n" + std::to_string(out.size() + 1), oval[x]);
            queue.push_back(y);
        }
    }
    if (static_cast<int>(queue.size()) != nc) throw std::runtime_error("nodal domains are disconnected");
    return out;
}

std::vector<std::array<Vec2d, 2>> nodal_segments(const ScalarField& f)
{
    const LatLonGrid& g = f.grid;
    std::vector<std::array<Vec2d, 2>> segs;
    auto cut = [&](Vec2d p, double fp, Vec2d q, double fq) {
        double t = fp / (fp - fq);
        return Vec2d{p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])};
    };
    for (int r = 0; r + 1 < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) {
            Vec2d P[4] = {{g.theta(r), g.phi(c)},
                          {g.theta(r), g.phi(c) + g.dphi()},
                          {g.theta(r + 1), g.phi(c) + g.dphi()},
                          {g.theta(r + 1), g.phi(c)}};
            double V[4] = {f.at(r, c), f.at(r, c + 1), f.at(r + 1, c + 1), f.at(r + 1, c)};
            std::vector<Vec2d> pts;
            for (int e = 0; e < 4; ++e) {
                int a = e, b = (e + 1) % 4;
                if ((V[a] >= 0) != (V[b] >= 0)) pts.push_back(cut(P[a], V[a], P[b], V[b]));
            }
            if (pts.size() == 2) segs.push_back({pts[0], pts[1]});
            else if (pts.size() == 4) {
                segs.push_back({pts[0], pts[1]});
                segs.push_back({pts[2], pts[3]});
            }
        }
    return segs;
}

}  // namespace nodalforge
