#pragma once

#include "nodalforge/harmonics.hpp"
#include "nodalforge/metric.hpp"
#include "nodalforge/ovals.hpp"
#include "nodalforge/parallel.hpp"
#include "nodalforge/planar.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace nodalforge {

struct PipelineConfig {
    LatLonGrid grid{1024, 512};
    double t = 0;                       // <= 0: half the positivity threshold
    double capFactor = 1.0 / 3.0;       // U radius over the minimal distance of S1 and S2
    int M = 4;                          // chessboard scale
    std::optional<HarmonicIndex> harmonic;  // default: the smallest (n, m) that holds the redrawn grid
    double detTolerance = 1e-9;
    double residualBand = 0.1745;       // rows within this colatitude of a pole are not scored
    bool diagnostics = true;            // residual and curvature on the assembled fields
    unsigned long long seed = 0;
    std::optional<Drawing> drawing;     // overrides the naive drawing of the target
};

// The purely combinatorial half: drawing, redraw, embedding and pairings.
struct CombinatorialPlan {
    OvalConfig target;
    Drawing drawing, redrawn, onGlobe;
    HarmonicIndex idx;
    GlobeGraph globe;  // pole-resolved
    std::vector<int> faceBlack;
    PairingAssignment chosen, reduced;
    std::set<std::string> kept;
    OvalConfig perturbed;  // configuration of perturb(globe, reduced)
    bool equivalent = false;
};

// Degree and order whose resolved globe graph holds an N x N grid.
HarmonicIndex harmonic_for_grid(int N);
// Two-colouring of the faces of a 4-regular plane graph, black on the face holding grid cell (0,0).
std::vector<int> chessboard_faces(const GlobeGraph& globe, const GridGraph& grid, const GridEmbedding& emb);
CombinatorialPlan plan_combinatorics(const OvalConfig& target, const PipelineConfig& cfg);

struct PipelineReport {
    CombinatorialPlan plan;
    std::vector<int> signs;
    double ms = 0, t = 0, threshold = 0;
    CapRadii caps;
    std::string extracted;
    bool equivalent = false;
    double detDeviation = 0;   // max |det g_t - sin^2 theta| / sin^2 theta
    double residual = -1;      // eigen_residual of f_t under g_t (-1 when skipped)
    double curvatureSup = -1;  // sup |K - 1| over the band (-1 when skipped)
    int roundPoints = 0;
    double seconds = 0;
    PerturbedSystem system;
};

// Runs every stage; errors carry the stage name as a prefix.
PipelineReport run_pipeline(const OvalConfig& target, const PipelineConfig& cfg);
PerturbationModel build_model(const CombinatorialPlan& plan, double capFactor);

std::string report_json(const PipelineReport& r);

// Row-major theta-then-phi dumps of little-endian doubles; metrics store (xx, xy, yy) per point.
void write_field_binary(const std::string& path, const ScalarField& f);
void write_metric_binary(const std::string& path, const MetricField& g);
MetricField read_metric_binary(const std::string& path, const LatLonGrid& grid);
void write_field_csv(const std::string& path, const ScalarField& f);
ScalarField read_field_binary(const std::string& path, const LatLonGrid& grid);

}  // namespace nodalforge
