#include "nodalforge/blocks.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace nodalforge {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDomainTol = 1e-12;

struct GaussRule {
    std::vector<double> x, w;  // on [-1, 1]
};

const GaussRule& gauss_rule(int n)
{
    static std::map<int, GaussRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5)), dp = 0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p1 = x, p0 = 1;
            dp = n * (x * p1 - p0) / (x * x - 1);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.x[i] = x;
        r.w[i] = 2 / ((1 - x * x) * dp * dp);
    }
    return cache.emplace(n, std::move(r)).first->second;
}

// dA/df0 on the pants at rho = |z^2-1| = 1 + delta. The modulus is k = 2 sqrt(rho)/(1+rho),
// with complementary modulus |delta|/(2+delta); K = pi / (2 agm(1, k')) stays accurate near the saddle.
double pants_density(double delta)
{
    if (delta == 0) return std::numeric_limits<double>::infinity();
    double rho = 1 + delta, a = 1, b = std::abs(delta) / (2 + delta);
    while (std::abs(a - b) > 1e-15 * a) {
        double m = (a + b) / 2;
        b = std::sqrt(a * b);
        a = m;
    }
    double K = kPi / (2 * a);
    return 1.5 * 2 * rho * K / (1 + rho);
}

double pants_rho(double x, double y) { return std::abs(std::complex<double>(x, y) * std::complex<double>(x, y) - 1.0); }

}  // namespace

std::string to_string(BlockType t)
{
    switch (t) {
    case BlockType::Disk: return "disk";
    case BlockType::Cylinder: return "cylinder";
    case BlockType::Pants: return "pants";
    }
    return "?";
}

BlockType parse_block_type(const std::string& s)
{
    std::string l = s;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
    if (l == "disk") return BlockType::Disk;
    if (l == "cylinder") return BlockType::Cylinder;
    if (l == "pants") return BlockType::Pants;
    throw std::invalid_argument("unknown block type '" + s + "'");
}

int neumann_count(BlockType t) { return t == BlockType::Disk ? 0 : t == BlockType::Cylinder ? 1 : 2; }

double block_f0(BlockType t, const std::array<double, 3>& p)
{
    switch (t) {
    case BlockType::Disk: {
        double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        if (std::abs(r - 1) > 1e-9 || p[2] < -kDomainTol) throw std::invalid_argument("point is not on the closed upper hemisphere");
        return std::max(p[2], 0.0) / 2;
    }
    case BlockType::Cylinder:
        if (p[0] < -kDomainTol || p[0] > 1 + kDomainTol) throw std::invalid_argument("cylinder coordinate outside [0,1]");
        return std::clamp(p[0], 0.0, 1.0);
    case BlockType::Pants: {
        double rho = pants_rho(p[0], p[1]);
        if (rho < 0.5 - kDomainTol || rho > 2 + kDomainTol) throw std::invalid_argument("point outside the pants region");
        return std::clamp((2 - rho) / 1.5, 0.0, 1.0);
    }
    }
    return 0;
}

double block_f(BlockType t, const std::array<double, 3>& p) { return f_from_f0(block_f0(t, p)); }

std::string to_string(CriticalKind k)
{
    switch (k) {
    case CriticalKind::None: return "none";
    case CriticalKind::Max: return "max";
    case CriticalKind::Min: return "min";
    case CriticalKind::Saddle: return "saddle";
    }
    return "?";
}

std::vector<CriticalPoint> classify_critical(BlockType t, int grid)
{
    // Chart (u,v) -> model point, interior test with a margin.
    std::function<std::array<double, 3>(double, double)> chart;
    std::function<bool(double, double)> inside;
    double u0, u1, v0, v1;
    switch (t) {
    case BlockType::Disk:
        chart = [](double u, double v) { return std::array<double, 3>{u, v, std::sqrt(std::max(0.0, 1 - u * u - v * v))}; };
        inside = [](double u, double v) { return u * u + v * v < 0.98; };
        u0 = v0 = -1;
        u1 = v1 = 1;
        break;
    case BlockType::Cylinder:
        chart = [](double u, double v) { return std::array<double, 3>{u, v, 0}; };
        inside = [](double u, double) { return u > 0.01 && u < 0.99; };
        u0 = 0;
        u1 = 1;
        v0 = 0;
        v1 = 2 * kPi;
        break;
    default:
        chart = [](double u, double v) { return std::array<double, 3>{u, v, 0}; };
        inside = [](double u, double v) {
            double r = pants_rho(u, v);
            return r > 0.51 && r < 1.99;
        };
        u0 = v0 = -1.8;
        u1 = v1 = 1.8;
    }
    auto F = [&](double u, double v) { return block_f(t, chart(u, v)); };
    const double h = 1e-5;
    auto grad = [&](double u, double v) {
        return Vec2d{(F(u + h, v) - F(u - h, v)) / (2 * h), (F(u, v + h) - F(u, v - h)) / (2 * h)};
    };
    auto hess = [&](double u, double v) {
        const double k = 1e-4;
        double fuu = (F(u + k, v) - 2 * F(u, v) + F(u - k, v)) / (k * k);
        double fvv = (F(u, v + k) - 2 * F(u, v) + F(u, v - k)) / (k * k);
        double fuv = (F(u + k, v + k) - F(u + k, v - k) - F(u - k, v + k) + F(u - k, v - k)) / (4 * k * k);
        return std::array<double, 3>{fuu, fuv, fvv};
    };
    std::vector<std::vector<double>> g2(grid + 1, std::vector<double>(grid + 1, -1));
    auto at = [&](int i, int j) { return std::pair{u0 + (u1 - u0) * i / grid, v0 + (v1 - v0) * j / grid}; };
    for (int i = 0; i <= grid; ++i)
        for (int j = 0; j <= grid; ++j) {
            auto [u, v] = at(i, j);
            if (!inside(u, v)) continue;
            Vec2d g = grad(u, v);
            g2[i][j] = g[0] * g[0] + g[1] * g[1];
        }
    std::vector<CriticalPoint> out;
    for (int i = 1; i < grid; ++i)
        for (int j = 1; j < grid; ++j) {
            if (g2[i][j] < 0) continue;
            bool localMin = true;
            for (int di = -1; di <= 1 && localMin; ++di)
                for (int dj = -1; dj <= 1; ++dj)
                    if ((di || dj) && (g2[i + di][j + dj] < 0 || g2[i + di][j + dj] < g2[i][j])) localMin = false;
            if (!localMin) continue;
            auto [u, v] = at(i, j);
            bool converged = false;
            for (int it = 0; it < 50 && inside(u, v); ++it) {
                Vec2d g = grad(u, v);
                if (std::hypot(g[0], g[1]) < 1e-9) {
                    converged = true;
                    break;
                }
                auto H = hess(u, v);
                double det = H[0] * H[2] - H[1] * H[1];
                if (std::abs(det) < 1e-14) break;
                u -= (H[2] * g[0] - H[1] * g[1]) / det;
                v -= (-H[1] * g[0] + H[0] * g[1]) / det;
            }
            if (!converged || !inside(u, v)) continue;
            bool dup = false;
            for (const auto& c : out) {
                auto p = chart(u, v);
                if (std::hypot(p[0] - c.location[0], p[1] - c.location[1]) < 1e-6) dup = true;
            }
            if (dup) continue;
            auto H = hess(u, v);
            double tr = H[0] + H[2], det = H[0] * H[2] - H[1] * H[1];
            double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
            CriticalPoint c;
            c.location = chart(u, v);
            c.hessianEigen = {tr / 2 - disc, tr / 2 + disc};
            c.kind = det < 0 ? CriticalKind::Saddle : tr < 0 ? CriticalKind::Max : CriticalKind::Min;
            out.push_back(c);
        }
    return out;
}

double flux_integral(const std::function<Vec2d(Vec2d)>& u, const std::vector<Vec2d>& polyline,
                     const std::function<double(Vec2d)>& mu, int gaussPoints)
{
    const auto& r = gauss_rule(gaussPoints);
    double s = 0;
    for (size_t k = 0; k + 1 < polyline.size(); ++k) {
        Vec2d p = polyline[k], d{polyline[k + 1][0] - p[0], polyline[k + 1][1] - p[1]};
        for (int i = 0; i < gaussPoints; ++i) {
            double t = 0.5 * (r.x[i] + 1);
            Vec2d x{p[0] + t * d[0], p[1] + t * d[1]};
            Vec2d v = u(x);
            s += 0.5 * r.w[i] * mu(x) * (v[0] * d[1] - v[1] * d[0]);
        }
    }
    return s;
}

double flux_integral(const std::function<Vec2d(Vec2d)>& u, const std::function<Vec2d(double)>& gamma,
                     const std::function<Vec2d(double)>& dgamma, double t0, double t1,
                     const std::function<double(Vec2d)>& mu, int panels)
{
    return gauss_legendre(
        [&](double t) {
            Vec2d x = gamma(t), d = dgamma(t), v = u(x);
            return mu(x) * (v[0] * d[1] - v[1] * d[0]);
        },
        t0, t1, panels);
}

double gauss_legendre(const std::function<double(double)>& g, double a, double b, int panels, int points)
{
    if (!(b > a)) return 0;
    const auto& r = gauss_rule(points);
    double s = 0, w = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * w;
        for (int i = 0; i < points; ++i) s += r.w[i] * g(lo + 0.5 * w * (r.x[i] + 1));
    }
    return s * w / 2;
}

double level_area_density(BlockType t, double f0)
{
    switch (t) {
    case BlockType::Cylinder: return 2 * kPi;
    case BlockType::Disk: return 4 * kPi;  // dA = 2 pi dz and f0 = z/2
    case BlockType::Pants: return pants_density(1 - 1.5 * f0);
    }
    return 0;
}

namespace {

// Integral of g(f0) * dA/df0 over [u0,u1]; the pants density has a logarithmic
// singularity at the saddle level f0 = 2/3, removed by f0 = s +- w^4.
double level_integral(BlockType t, const std::function<double(double)>& g, double u0, double u1, int panels)
{
    if (!(u1 > u0)) return 0;
    auto dens = [&](double f0) { return g(f0) * level_area_density(t, f0); };
    if (t != BlockType::Pants) return gauss_legendre(dens, u0, u1, panels);
    const double s = 2.0 / 3.0;
    auto side = [&](double d0, double d1, int sign) {
        // f0 = s + sign * w^4, w in [d0^(1/4), d1^(1/4)]
        return gauss_legendre(
            [&](double w) {
                double w4 = w * w * w * w;
                return g(s + sign * w4) * pants_density(-1.5 * sign * w4) * 4 * w * w * w;
            },
            std::pow(d0, 0.25),
                              std::pow(d1, 0.25), panels);
    };
    double total = 0;
    if (u0 < s) total += side(s - std::min(u1, s), s - u0, -1);
    if (u1 > s) total += side(std::max(u0, s) - s, u1 - s, +1);
    return total;
}

double f0_of(double f) { return 1 - std::sqrt(std::max(0.0, 1 - f)); }

}  // namespace

double model_area(BlockType t, double f0lo, double f0hi, int panels)
{
    return level_integral(t, [](double) { return 1.0; }, f0lo, f0hi, panels);
}

BlockMeasure::BlockMeasure(BlockType t, double eps, int gridRes) : type_(t), eps_(eps), res_(gridRes)
{
    if (!(eps > 0 && eps < 0.5)) throw std::invalid_argument("collar width must lie in (0, 1/2)");
    if (gridRes < 1) throw std::invalid_argument("grid resolution must be positive");
    fmax_ = t == BlockType::Disk ? 0.75 : 1.0;
    sD_ = std::sin(eps);
    sN_ = t == BlockType::Disk ? 2.0 : std::cos(eps);
    if (t == BlockType::Disk) capLevel_ = fmax_ - eps * eps;
    int k = neumann_count(t);
    double collars = 2 * kPi * (1 - std::cos(eps)) + k * 2 * kPi * std::sin(eps);
    // Reference quadrature at sixteen times the sweep resolution.
    double J = level_integral(t, f_from_f0, f0_of(sD_), f0_of(std::min(sN_, fmax_)), 16 * res_);
    rho_ = (2 * kPi - collars) / J;
    if (!(rho_ > 0)) throw std::logic_error("collars carry more than the total integral");
}

double BlockMeasure::saddle_level() const
{
    if (type_ != BlockType::Pants) throw std::logic_error("only the pants block has a saddle");
    return f_from_f0(2.0 / 3.0);
}

double BlockMeasure::interior_integral(double a0, double a1) const
{
    return level_integral(type_, f_from_f0, f0_of(a0), f0_of(a1), res_);
}

double BlockMeasure::integral_below(double a) const
{
    a = std::min(a, fmax_);
    if (a <= 0) return 0;
    if (a <= sD_) return 2 * kPi * (1 - std::sqrt(1 - a * a));
    double s = 2 * kPi * (1 - std::cos(eps_)) + rho_ * interior_integral(sD_, std::min(a, sN_));
    if (a > sN_) s += neumann_count(type_) * 2 * kPi * (std::sin(eps_) - std::sqrt(1 - a * a));
    return s;
}

double BlockMeasure::integral_band(double a0, double a1, int leg) const
{
    double s = integral_below(a1) - integral_below(a0);
    if (leg >= 0) {
        if (type_ != BlockType::Pants) throw std::invalid_argument("legs exist only on the pants block");
        s /= 2;
    }
    return s;
}

double BlockMeasure::level_flux(double a, int legs) const
{
    if (a >= fmax_) return 0;
    if (a < sD_) return 2 * kPi * std::sqrt(1 - a * a);
    if (a > sN_) return legs * 2 * kPi * std::sqrt(1 - a * a);
    if (a > capLevel_) return integral_below(fmax_) - integral_below(a);  // eigenfunction identity on the cap
    return 0;
}

double BlockMeasure::S_band(double a0, double a1, int leg) const
{
    int legs = leg < 0 ? neumann_count(type_) : 1;
    return integral_band(a0, a1, leg) + level_flux(a1, legs) - level_flux(a0, legs);
}

AdmissibilityReport admissibility_sweep(BlockType t, int gridRes, int samples, double eps)
{
    BlockMeasure m(t, eps, gridRes);
    AdmissibilityReport rep;
    rep.type = t;
    rep.eps = eps;
    rep.density = m.density();
    rep.SofM = m.S_full();
    const double tol = 1e-6;  // equality |S| <= tol, strict S <= -tol
    bool ok = std::abs(rep.SofM) <= 1e-6;

    double lowU0 = 2, highU0 = -1;
    if (t == BlockType::Pants) {
        // Shrink the saddle neighbourhood until the path estimate is below half the smallest leg integral.
        double r = 0.3;
        for (int it = 0; it < 60; ++it, r /= 2) {
            double f0lo = (1 - r * r) / 1.5, f0hi = (1 + r * r) / 1.5;
            double fsup = f_from_f0(f0hi);
            double area = m.density() * kPi * r * r;
            double gradSup = 2 * (1 - f0lo) * (2 * r / 1.5);
            rep.pathBound = area * fsup + 2 * kPi * r * gradSup;  // the conformal factor cancels in L * |df|
            rep.minLegIntegral = m.integral_band(fsup, m.fmax(), 0);
            rep.saddleRadius = r;
            lowU0 = f_from_f0(f0lo);
            highU0 = fsup;
            if (rep.pathBound < 0.5 * rep.minLegIntegral && highU0 < m.neumann_bottom()) break;
        }
        ok = ok && rep.pathBound < 0.5 * rep.minLegIntegral;
    }

    for (int i = 1; i <= samples; ++i) {
        AdmissibilitySample s;
        s.a = m.fmax() * i / samples;
        s.S = m.S_band(0, s.a);
        if (i == samples) {
            s.region = "full";
            s.ok = std::abs(s.S) <= tol;
        } else if (s.a < m.dirichlet_top()) {
            s.region = "dirichlet";
            s.ok = std::abs(s.S) <= tol;
        } else if (s.a > m.neumann_bottom()) {
            s.region = "neumann";
            s.ok = std::abs(s.S) <= tol;
        } else if (s.a > m.top_cap_level()) {
            s.region = "cap";
            s.ok = std::abs(s.S) <= tol;
        } else if (s.a >= lowU0 && s.a <= highU0) {
            s.region = "saddle";
            s.ok = s.S + rep.pathBound <= -tol;
        } else {
            s.region = "interior";
            s.ok = s.S <= -tol;
        }
        ok = ok && s.ok;
        rep.sweep.push_back(s);
    }

    if (t == BlockType::Pants) {
        // R = {f < b} with the band [b, saddle) cut in half inside U0, plus one leg up to a1.
        double fs = m.saddle_level();
        int nb = 8, na = 16;
        for (int i = 0; i <= nb; ++i)
            for (int j = 1; j <= na; ++j) {
                PantsVariant v;
                v.b = lowU0 + (fs - lowU0) * i / nb;
                v.a1 = fs + (1 - fs) * j / na;
                double integral = m.integral_below(v.b) + 0.5 * (m.integral_below(fs) - m.integral_below(v.b)) +
                                  m.integral_band(fs, v.a1, 0);
                v.Supper = integral + m.level_flux(v.a1, 1) - m.level_flux(0, 1) + rep.pathBound;
                v.ok = v.Supper <= -tol;
                ok = ok && v.ok;
                rep.variants.push_back(v);
            }
    }
    rep.ok = ok;
    return rep;
}

BlockDecomposition decompose(const OvalConfig& config)
{
    BlockDecomposition d;
    int n = config.size();
    std::vector<std::vector<int>> boundary(config.region_count());
    for (int i = 0; i < n; ++i) {
        boundary[config.outer_region(i)].push_back(i);
        boundary[config.inner_region(i)].push_back(i);
    }
    std::vector<int> regionSign(config.region_count(), 1);
    for (int i = 0; i < n; ++i) {
        int depth = config.depth(i);
        regionSign[config.inner_region(i)] = depth % 2 == 0 ? -1 : 1;
    }
    std::function<void(int, std::vector<int>, std::vector<int>)> split = [&](int region, std::vector<int> dir,
                                                                              std::vector<int> neu) {
        if (dir.size() == 1) {
            BlockInstance b;
            b.type = neu.empty() ? BlockType::Disk : neu.size() == 1 ? BlockType::Cylinder : BlockType::Pants;
            b.region = region;
            b.dirichletOval = dir[0];
            b.neumannLoops = neu;
            b.sign = regionSign[region];
            d.blocks.push_back(b);
            return;
        }
        int loop = d.loopCount++;
        size_t half = (dir.size() + 1) / 2;
        std::vector<int> d1(dir.begin(), dir.begin() + half), d2(dir.begin() + half, dir.end());
        std::vector<int> n1{loop}, n2{loop};
        if (neu.size() >= 1) n1.insert(n1.begin(), neu[0]);
        if (neu.size() >= 2) n2.insert(n2.begin(), neu[1]);
        split(region, d1, n1);
        split(region, d2, n2);
    };
    for (int r = 0; r < config.region_count(); ++r) {
        auto dir = boundary[r];
        if (dir.empty()) continue;
        std::sort(dir.begin(), dir.end(), [&](int a, int b) { return config.label(a) < config.label(b); });
        split(r, dir, {});
    }
    for (int i = 0; i < n; ++i) {
        int a = -1, b = -1;
        for (int k = 0; k < static_cast<int>(d.blocks.size()); ++k)
            if (d.blocks[k].dirichletOval == i) (d.blocks[k].region == config.outer_region(i) ? a : b) = k;
        d.gluings.push_back({a, b, true, i});
    }
    for (int l = 0; l < d.loopCount; ++l) {
        std::vector<int> with;
        for (int k = 0; k < static_cast<int>(d.blocks.size()); ++k)
            for (int x : d.blocks[k].neumannLoops)
                if (x == l) with.push_back(k);
        d.gluings.push_back({with.size() > 0 ? with[0] : -1, with.size() > 1 ? with[1] : -1, false, l});
    }
    // Propagate signs through the gluing graph and check every constraint.
    std::vector<int> sign(d.blocks.size(), 0);
    std::vector<std::vector<std::pair<int, int>>> adj(d.blocks.size());
    for (const auto& g : d.gluings) {
        if (g.a < 0 || g.b < 0) continue;
        int rel = g.dirichlet ? -1 : 1;
        adj[g.a].push_back({g.b, rel});
        adj[g.b].push_back({g.a, rel});
    }
    bool consistent = true;
    for (size_t s = 0; s < d.blocks.size(); ++s) {
        if (sign[s]) continue;
        sign[s] = d.blocks[s].sign;
        std::vector<int> stack{static_cast<int>(s)};
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            for (auto [y, rel] : adj[x]) {
                if (!sign[y]) {
                    sign[y] = sign[x] * rel;
                    stack.push_back(y);
                } else if (sign[y] != sign[x] * rel) consistent = false;
            }
        }
    }
    for (size_t s = 0; s < d.blocks.size(); ++s) consistent = consistent && sign[s] == d.blocks[s].sign;
    d.signsConsistent = consistent;
    return d;
}

bool verify_decomposition(const OvalConfig& config, const BlockDecomposition& d, std::string* why)
{
    auto fail = [&](const std::string& m) {
        if (why) *why = m;
        return false;
    };
    int n = config.size();
    if (static_cast<int>(d.blocks.size()) != 2 * n) return fail("block count is not twice the oval count");
    std::vector<int> seen(n, 0);
    for (const auto& b : d.blocks) {
        if (b.dirichletOval < 0 || b.dirichletOval >= n) return fail("block without a Dirichlet oval");
        if (b.region != config.outer_region(b.dirichletOval) && b.region != config.inner_region(b.dirichletOval))
            return fail("Dirichlet oval does not bound the block's region");
        ++seen[b.dirichletOval];
        if (static_cast<int>(b.neumannLoops.size()) != neumann_count(b.type)) return fail("Neumann count does not match type");
    }
    for (int i = 0; i < n; ++i)
        if (seen[i] != 2) return fail("oval " + config.label(i) + " is not the Dirichlet boundary of exactly two blocks");
    // Euler characteristic per region: disk 1, cylinder 0, pants -1; region with h holes has 2 - h.
    std::vector<int> chi(config.region_count(), 0), holes(config.region_count(), 0);
    for (int i = 0; i < n; ++i) {
        ++holes[config.outer_region(i)];
        ++holes[config.inner_region(i)];
    }
    for (const auto& b : d.blocks) chi[b.region] += 1 - neumann_count(b.type);
    for (int r = 0; r < config.region_count(); ++r)
        if (holes[r] > 0 && chi[r] != 2 - holes[r]) return fail("Euler characteristic mismatch in region " + std::to_string(r));
    int dGl = 0;
    for (const auto& g : d.gluings) {
        if (g.a < 0 || g.b < 0 || g.a == g.b) return fail("unpaired gluing");
        const auto &A = d.blocks[g.a], &B = d.blocks[g.b];
        if (g.dirichlet) {
            ++dGl;
            if (A.dirichletOval != g.curve || B.dirichletOval != g.curve || A.sign != -B.sign) return fail("bad Dirichlet gluing");
        } else if (A.region != B.region || A.sign != B.sign) {
            return fail("bad Neumann gluing");
        }
    }
    if (dGl != n) return fail("Dirichlet gluings do not biject with ovals");
    if (!d.signsConsistent) return fail("sign constraints are inconsistent");
    return true;
}

std::string decomposition_json(const OvalConfig& config, const BlockDecomposition& d)
{
    nlohmann::json j;
    j["format"] = 1;
    j["configuration"] = to_string(config);
    j["oval_count"] = config.size();
    j["block_count"] = d.blocks.size();
    j["signs_consistent"] = d.signsConsistent;
    for (const auto& b : d.blocks) {
        nlohmann::json jb;
        jb["type"] = to_string(b.type);
        jb["region"] = b.region;
        jb["dirichlet"] = config.label(b.dirichletOval);
        jb["neumann_loops"] = b.neumannLoops;
        jb["sign"] = b.sign;
        j["blocks"].push_back(jb);
    }
    for (const auto& g : d.gluings) {
        nlohmann::json jg;
        jg["a"] = g.a;
        jg["b"] = g.b;
        jg["kind"] = g.dirichlet ? "dirichlet" : "neumann";
        jg["curve"] = g.dirichlet ? nlohmann::json(config.label(g.curve)) : nlohmann::json(g.curve);
        j["gluings"].push_back(jg);
    }
    return j.dump(2) + "\n";
}

}  // namespace nodalforge
