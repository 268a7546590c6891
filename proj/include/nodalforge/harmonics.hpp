#pragma once

#include "nodalforge/planar.hpp"

#include <vector>

namespace nodalforge {

struct HarmonicIndex {
    int n = 1;  // degree
    int m = 1;  // order
};

double legendre_p(int n, double x);
// m-th derivative of P_n, through the Gegenbauer identity d^m P_n = (2m-1)!! C^{(m+1/2)}_{n-m}.
double legendre_dm(int n, int m, double x);
// The n-m roots of d^m P_n in (-1,1), ascending.
std::vector<double> f_nm_roots(int n, int m);

// sin^m(theta) d^mP_n(cos theta) and its first two theta derivatives.
struct ThetaPart {
    double value, d1, d2;
};
ThetaPart ynm_theta_part(HarmonicIndex idx, double theta);

// sin^m(theta) F_n^m(cos theta) sin(m phi) with normalization constant 1.
double eval_ynm(HarmonicIndex idx, double theta, double phi);
double eigenvalue(int n);

// Zero set of Y_n^m as an embedded graph. Latitude row j (0 = northmost)
// crosses meridian column k at phi = k pi / m. Crossing rotation, counterclockwise
// seen from outside, is [south, east, north, west].
struct GlobeGraph {
    HarmonicIndex idx;
    std::vector<double> latTheta;  // colatitude of each row
    EmbeddedGraph graph;
    std::vector<double> vTheta, vPhi;
    int north = -1, south = -1;
    bool resolved = false;

    int rows() const { return static_cast<int>(latTheta.size()); }
    int cols() const { return 2 * idx.m; }
    int crossing(int j, int k) const { return j * cols() + ((k % cols()) + cols()) % cols(); }
    int lat_edge(int j, int k) const { return j * cols() + ((k % cols()) + cols()) % cols(); }  // (j,k)->(j,k+1)
    int mer_edge(int j, int k) const { return rows() * cols() + j * cols() + ((k % cols()) + cols()) % cols(); }  // (j,k)->(j+1,k)
    double phi_of_col(int k) const;
};

GlobeGraph globe_graph(HarmonicIndex idx);
// Removes both poles, joining meridians (0,1), (2,3), ... in increasing phi.
GlobeGraph resolve_poles(const GlobeGraph& g);

}  // namespace nodalforge
