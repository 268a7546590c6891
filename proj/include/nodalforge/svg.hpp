#pragma once

#include "nodalforge/blocks.hpp"
#include "nodalforge/harmonics.hpp"
#include "nodalforge/metric.hpp"
#include "nodalforge/planar.hpp"

#include <string>

namespace nodalforge {

// All emitters are deterministic: fixed precision, fixed element order, no timestamps.

// Used edges of a drawing in black over the unused ones in grey. Grid drawings also get the
// chessboard shading of their cells.
std::string svg_drawing(const Drawing& d);
// Smoothing of every 4-valent vertex of g by the pairing p, one colour per curve.
std::string svg_perturbation(const EmbeddedGraph& g, const PairingAssignment& p);
// The same for a pole-resolved globe graph, with edges along their latitude and meridian arcs.
std::string svg_perturbation(const GlobeGraph& G, const PairingAssignment& p);
// Zero set of f in the (phi, theta) rectangle.
std::string svg_nodal(const ScalarField& f);
// Blocks as labelled discs; solid links are Dirichlet gluings, dashed ones Neumann.
std::string svg_decomposition(const OvalConfig& config, const BlockDecomposition& d);

}  // namespace nodalforge
