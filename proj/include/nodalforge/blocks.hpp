#pragma once

#include "nodalforge/ovals.hpp"
#include "nodalforge/vec.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace nodalforge {

enum class BlockType { Disk, Cylinder, Pants };

std::string to_string(BlockType t);
BlockType parse_block_type(const std::string& s);

// Number of Neumann boundaries of the simple block.
int neumann_count(BlockType t);

// Model coordinates: Disk takes (x,y,z) on the closed upper hemisphere,
// Cylinder takes (x, theta, -) with x in [0,1], Pants takes (x, y, -) with
// |z^2 - 1| in [1/2, 2]. Throws invalid_argument outside the model domain.
double block_f0(BlockType t, const std::array<double, 3>& p);
double block_f(BlockType t, const std::array<double, 3>& p);
// f as a function of f0.
inline double f_from_f0(double f0) { return 1 - (1 - f0) * (1 - f0); }

enum class CriticalKind { None, Max, Min, Saddle };
struct CriticalPoint {
    CriticalKind kind = CriticalKind::None;
    std::array<double, 3> location{};
    std::array<double, 2> hessianEigen{};
};
std::string to_string(CriticalKind k);
// Interior critical points of f, found by a grid search on |grad f| and Newton
// refinement with finite-difference derivatives.
std::vector<CriticalPoint> classify_critical(BlockType t, int grid = 80);


// Flux of u through the curve: integral of mu * (u wedge gamma'), positive when
// u points to the right of the direction of travel (outward for counterclockwise loops).
double flux_integral(const std::function<Vec2d(Vec2d)>& u, const std::vector<Vec2d>& polyline,
                     const std::function<double(Vec2d)>& mu, int gaussPoints = 8);
double flux_integral(const std::function<Vec2d(Vec2d)>& u, const std::function<Vec2d(double)>& gamma,
                     const std::function<Vec2d(double)>& dgamma, double t0, double t1,
                     const std::function<double(Vec2d)>& mu, int panels = 64);

// Composite Gauss-Legendre on [a,b].
double gauss_legendre(const std::function<double(double)>& g, double a, double b, int panels, int points = 8);
// dA / df0 of the model area measure at level f0.
double level_area_density(BlockType t, double f0);
// Model area of {lo <= f0 < hi}.
double model_area(BlockType t, double f0lo, double f0hi, int panels = 256);

// The measure of the admissibility argument: collars of width eps carry the
// cylinder metric, and the rest has constant density times model area,
// scaled so that the integral of f is 2 pi (the Dirichlet flux).
class BlockMeasure {
public:
    BlockMeasure(BlockType t, double eps = 0.1, int gridRes = 64);

    BlockType type() const { return type_; }
    double eps() const { return eps_; }
    double density() const { return rho_; }
    double fmax() const { return fmax_; }
    double dirichlet_top() const { return sD_; }   // f below this lies in the Dirichlet collar
    double neumann_bottom() const { return sN_; }  // f above this lies in a Neumann collar
    double saddle_level() const;                    // Pants only
    // Integral of f over {f < a}; legs of the pants above the saddle carry half each.
    double integral_below(double a) const;
    double integral_band(double a0, double a1, int leg = -1) const;
    // S of the band {a0 <= f < a1} (whole block, or one pants leg above the saddle).
    double S_band(double a0, double a1, int leg = -1) const;
    double S_full() const { return S_band(0, fmax_); }
    // Flux of grad f through the level f = a, outward from {f < a}, when the level lies in U.
    double level_flux(double a, int legs) const;
    // Disk: lower level of the neighbourhood of the maximum.
    double top_cap_level() const { return capLevel_; }

private:
    double interior_integral(double a0, double a1) const;  // model-area integral of f
    BlockType type_;
    double eps_, rho_ = 0, fmax_ = 1, sD_, sN_, capLevel_ = 2;
    int res_;
};

struct AdmissibilitySample {
    double a = 0, S = 0;
    std::string region;  // "dirichlet", "interior", "neumann", "cap", "saddle"
    bool ok = false;
};
struct PantsVariant {
    double b = 0, a1 = 0, Supper = 0;
    bool ok = false;
};
struct AdmissibilityReport {
    BlockType type = BlockType::Disk;
    double eps = 0.1, density = 0, SofM = 0;
    std::vector<AdmissibilitySample> sweep;
    // Pants: radius of the saddle neighbourhood, the path-estimation bound and the smallest leg integral.
    double saddleRadius = 0, pathBound = 0, minLegIntegral = 0;
    std::vector<PantsVariant> variants;
    bool ok = false;
};
AdmissibilityReport admissibility_sweep(BlockType t, int gridRes = 64, int samples = 200, double eps = 0.1);

struct BlockInstance {
    BlockType type = BlockType::Disk;
    int region = 0;                 // complementary region of the configuration
    int dirichletOval = -1;         // oval forming its Dirichlet boundary
    std::vector<int> neumannLoops;  // splitting loops forming its Neumann boundaries
    int sign = 1;
};
struct Gluing {
    int a = -1, b = -1;
    bool dirichlet = false;
    int curve = -1;  // oval for Dirichlet gluings, loop id for Neumann gluings
};
struct BlockDecomposition {
    std::vector<BlockInstance> blocks;
    std::vector<Gluing> gluings;
    int loopCount = 0;
    bool signsConsistent = false;
};
// Cuts the sphere along the ovals and splits each region into simple blocks.
BlockDecomposition decompose(const OvalConfig& config);
// Checks block count, the oval bijection, Neumann pairing, Euler characteristics and signs.
bool verify_decomposition(const OvalConfig& config, const BlockDecomposition& d, std::string* why = nullptr);
std::string decomposition_json(const OvalConfig& config, const BlockDecomposition& d);

}  // namespace nodalforge
