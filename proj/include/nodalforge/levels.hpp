#pragma once

#include "nodalforge/blueprint.hpp"

#include <array>
#include <vector>

namespace nodalforge {

// Piecewise-linear scalar field on a triangulated surface. Triangles flagged
// excluded belong to the open region removed before taking the quotient.
struct PlField {
    std::vector<std::array<double, 3>> points;
    std::vector<std::array<int, 3>> triangles;
    std::vector<double> values;
    std::vector<char> excluded;

    int vertex_count() const { return static_cast<int>(values.size()); }
    int triangle_count() const { return static_cast<int>(triangles.size()); }
};

// Quotient of the kept open region by connected components of level sets.
// Throws if a vertex of the kept closure (away from the mesh boundary) is
// critical, or if an edge inside the kept region is flat.
Blueprint blueprint_from_levels(const PlField& field);

// Restricts to lo <= f <= hi, cutting triangles along the two level lines.
PlField clip_band(const PlField& field, double lo, double hi);
// Disjoint union.
PlField merge_fields(const PlField& a, const PlField& b);
// Marks every triangle incident to vertex v as excluded.
void exclude_star(PlField& field, int v);

// Test geometries for the three block models, values = f0 of the block.
PlField cylinder_field(int nx, int ntheta, unsigned seed = 1);
PlField hemisphere_field(int rings, int sectors, unsigned seed = 1);
// Square grid over the pants region; the vertex at z = 0 is returned through saddle.
PlField pants_field(int half, int* saddle = nullptr);
double pants_f0(double x, double y);

}  // namespace nodalforge
