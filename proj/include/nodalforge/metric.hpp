#pragma once

#include "nodalforge/harmonics.hpp"
#include "nodalforge/ovals.hpp"
#include "nodalforge/vec.hpp"

#include <functional>
#include <string>
#include <vector>

namespace nodalforge {

// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Sym2 {
    double xx = 1, xy = 0, yy = 1;
    double det() const { return xx * yy - xy * xy; }
    Vec2d apply(const Vec2d& u) const { return {xx * u[0] + xy * u[1], xy * u[0] + yy * u[1]}; }
};

// The unique symmetric A with det A = 1 and A u = v, scaled: returns areaDensity * A.
// A = [v Ju][v Ju]^T / <u,v> with J = [[0,1],[-1,0]]. Throws invalid_argument unless <u,v> > 0.
Sym2 metric_from_gradient(const Vec2d& u, const Vec2d& v, double areaDensity = 1);

// Colatitudes theta_r = (r+1) pi / ntheta for r = 0..ntheta-2 (poles excluded), so doubling
// ntheta keeps every old row. Longitudes phi_c = 2 pi c / nphi.
struct LatLonGrid {
    int nphi = 0, ntheta = 0;

    LatLonGrid() = default;
    LatLonGrid(int nphi, int ntheta);
    // "WxH" with W = nphi and H = ntheta.
    static LatLonGrid parse(const std::string& spec);
    std::string to_string() const;

    int rows() const { return ntheta - 1; }
    int cols() const { return nphi; }
    size_t size() const { return static_cast<size_t>(rows()) * cols(); }
    size_t index(int r, int c) const { return static_cast<size_t>(r) * cols() + ((c % nphi) + nphi) % nphi; }
    double dtheta() const;
    double dphi() const;
    double theta(int r) const { return (r + 1) * dtheta(); }
    double phi(int c) const { return c * dphi(); }
    // Exact round area of the cell owned by a point of row r; the first and last rows also own the polar caps.
    double weight(int r) const;
    // Rows with theta in [band, pi - band].
    bool in_band(int r, double band) const;
};

struct ScalarField {
    LatLonGrid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const LatLonGrid& g, double fill = 0) : grid(g), v(g.size(), fill) {}
    double& at(int r, int c) { return v[grid.index(r, c)]; }
    double at(int r, int c) const { return v[grid.index(r, c)]; }
};

// Components in the orthonormal frame (e_theta, e_phi).
struct VectorField {
    LatLonGrid grid;
    std::vector<double> th, ph;

    VectorField() = default;
    explicit VectorField(const LatLonGrid& g) : grid(g), th(g.size(), 0), ph(g.size(), 0) {}
};

// Components in the coordinate frame (d theta, d phi).
struct MetricField {
    LatLonGrid grid;
    std::vector<Sym2> g;

    MetricField() = default;
    explicit MetricField(const LatLonGrid& gr) : grid(gr), g(gr.size()) {}
    static MetricField round(const LatLonGrid& gr);
};

ScalarField sample(const LatLonGrid& grid, const std::function<double(double, double)>& f);
double integrate(const ScalarField& f);
double max_abs(const ScalarField& f, double band = 0);

struct SpherePoint {
    double theta = 0, phi = 0;
    Vec3d xyz() const;
    static SpherePoint from_xyz(const Vec3d& p);
};
double sphere_distance(const SpherePoint& a, const SpherePoint& b);

// S1: zeros of Y that are critical points (globe crossings, then the north and south pole).
// S2: the extremum inside each face of the globe graph.
struct CriticalSets {
    HarmonicIndex idx;
    std::vector<SpherePoint> s1, s2;
    std::vector<int> s1Vertex;  // crossing index of the globe graph, or -1 north / -2 south
    double maxGradient = 0;     // largest |grad Y| / max|Y| over S1 and S2 after refinement
};
CriticalSets critical_zeros_and_extrema(HarmonicIndex idx);
double min_pairwise_distance(const CriticalSets& cs);

// C-infinity step: 1 for r <= a, 0 for r >= b; value and two derivatives in r.
std::array<double, 3> cutoff_profile(double r, double a, double b);

struct CapRadii {
    double u = 0, v = 0;
};
CapRadii default_cap_radii(const CriticalSets& cs, double factor = 1.0 / 3.0);

// phi_p = P_n(cos r_p) * cutoff(r_p; U, V) for p in S1, and psi = 1 - sum_q cutoff(r_q; U, V)
// over all of S1 and S2. Caps are pairwise disjoint (checked).
class BumpSet {
public:
    BumpSet(const CriticalSets& cs, CapRadii radii);

    const CriticalSets& critical() const { return cs_; }
    CapRadii radii() const { return radii_; }
    int degree() const { return cs_.idx.n; }
    double eigenvalue() const;
    int cap_count() const { return static_cast<int>(centers_.size()); }
    const Vec3d& center(int q) const { return centers_[q]; }
    bool is_s1(int q) const { return q < static_cast<int>(cs_.s1.size()); }

    // Radial profiles at geodesic distance r from a center.
    double zonal(double r) const;                     // P_n(cos r)
    std::array<double, 3> zonal_jet(double r) const;  // value, d/dr, d2/dr2
    double phi_radial(double r) const;                // phi_p(r)
    double phi_plus_laplacian(double r) const;       // phi_p + Lap(phi_p) / lambda
    // Integrals over the whole sphere.
    double phi_integral() const;
    double psi_integral() const;
    // Cap-local radial integrals int_0^r g(s) sin s ds of P_n(cos s) * cutoff and of cutoff.
    double cumulative_zonal(double r) const;
    double cumulative_cutoff(double r) const;

    // Nearest cap centre within the V radius, or -1.
    int cap_of(const Vec3d& x, double* r = nullptr) const;
    double phi(int q, const SpherePoint& x) const;
    double psi(const SpherePoint& x) const;
    ScalarField phi_field(int q, const LatLonGrid& grid) const;
    ScalarField psi_field(const LatLonGrid& grid) const;

private:
    double table(const std::vector<double>& vals, const std::vector<double>& ders, double r) const;
    CriticalSets cs_;
    CapRadii radii_;
    std::vector<Vec3d> centers_;
    double lambda_;
    int tableN_ = 4096;
    std::vector<double> cumZ_, cumZd_, cumK_, cumKd_;
};

BumpSet build_bumps(const CriticalSets& cs, CapRadii radii);

// s(p) = +1 iff lifting f at p joins the two locally positive quadrants in the way the pairing
// demands. Poles follow the fixed pole pairing of resolve_poles.
std::vector<int> sign_assignment(const CriticalSets& cs, const GlobeGraph& resolved, const PairingAssignment& pairings);

// m_s = -(sum s(p) int phi_p) / int psi by grid quadrature.
double compute_ms(const std::vector<int>& s, const ScalarField& psi, const std::vector<ScalarField>& phis);

// u0 = grad(Lap^{-1} source) in a truncated harmonic basis (degree <= lmax, default from the grid).
struct SpectralSolve {
    VectorField u0;
    double divergenceMismatch = 0;  // relative, grid L2 norm, from the spectral divergence
    int lmax = 0;
};
SpectralSolve solve_u0(const ScalarField& source, int lmax = -1);

// The continuum objects of the perturbation, evaluated pointwise:
// f = Y / max|Y|, f_t = f + t (m_s psi + sum s(p) phi_p),
// u0 with div u0 = m_s psi + sum s(p) (phi_p + Lap phi_p / lambda), vanishing on the inner caps,
// u = -lambda u0 + sum s(p) grad phi_p, and v = grad f + t u.
class PerturbationModel {
public:
    PerturbationModel(BumpSet bumps, std::vector<int> signs);

    const BumpSet& bumps() const { return bumps_; }
    const std::vector<int>& signs() const { return s_; }
    double ms() const { return ms_; }
    double lambda() const { return bumps_.eigenvalue(); }
    double amplitude() const { return amp_; }  // max |Y|
    double inner_radius() const { return bumps_.radii().u / 2; }

    struct Local {
        double f = 0, P = 0;       // f and the perturbation
        Vec2d gradF{}, gradP{};    // orthonormal components
        Vec2d u0{}, u{};           // localized u0 and u
        double source = 0;         // div u0 as constructed
        int innerCap = -1;         // cap whose inner disc contains the point
    };
    Local at(const SpherePoint& x) const;
    // Unlocalized u0 (sum of radial fields), in the orthonormal frame.
    Vec2d raw_u0(const SpherePoint& x) const;
    // Stream function of u0 on the cap U_q.
    double stream(int q, const SpherePoint& x) const;
    // Mass of the radial source piece attached to cap q.
    double cap_mass(int q) const { return mass_[q]; }

private:
    double radial_field(int q, double r) const;  // a_q(r), before localization
    BumpSet bumps_;
    std::vector<int> s_;
    double ms_ = 0, amp_ = 1;
    std::vector<double> mass_, etaCentre_;
};

struct PerturbedSystem {
    double t = 0, threshold = 0;
    ScalarField ft;
    MetricField gt;
    VectorField v;
    int roundPoints = 0;  // points inside the inner caps where g_t is set to the round metric
};
// Largest t keeping <grad f + t u, grad f_t> > 0 on the grid outside the inner caps.
double positivity_threshold(const PerturbationModel& model, const LatLonGrid& grid, SpherePoint* worst = nullptr);
// t <= 0 selects half the threshold. Throws domain_error when t is at or above the threshold.
PerturbedSystem assemble_perturbed(const PerturbationModel& model, const LatLonGrid& grid, double t);

// (1/sqrt|g|) d_i (sqrt|g| g^ij d_j f), second-order centred differences in flux form.
// The first and last rows are left at zero.
ScalarField laplacian(const MetricField& g, const ScalarField& f);
// max |Lap_g f + lambda f| / (lambda max |f|) over rows in [band, pi - band].
double eigen_residual(const MetricField& g, const ScalarField& f, double lambda, double band);

// Gaussian curvature from an orthonormal coframe (equivalent to Brioschi's formula, but
// without the division by (EG - F^2)^2). The first two and last two rows are left at zero.
ScalarField gaussian_curvature(const MetricField& g);

// Nodal configuration of f: sign components of the grid (poles joined to their rows, pole sign
// from the row average), region tree turned into a forest. A cell with alternating corner signs
// is an error unless refine (the continuum field at (theta, phi)) is given; then the cell is
// subdivided until its connectivity is decided.
OvalConfig extract_nodal_config(const ScalarField& f, const std::function<double(double, double)>& refine = {});
// Marching-squares segments of the zero set, in (theta, phi) coordinates.
std::vector<std::array<Vec2d, 2>> nodal_segments(const ScalarField& f);

}  // namespace nodalforge
