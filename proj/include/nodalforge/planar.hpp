#pragma once

#include "nodalforge/ovals.hpp"

#include <set>
#include <string>
#include <vector>

namespace nodalforge {

struct Vec2 {
    double x = 0, y = 0;
};

// Combinatorial map on the sphere. Edge e owns half-edges 2e (tail -> head)
// and 2e+1 (head -> tail). Each vertex stores its outgoing half-edges in
// counterclockwise order as seen on screen (y axis pointing down). The face
// of a half-edge is the face on its left; walking a face uses
// face_next(h) = rot_prev(twin(h)).
class EmbeddedGraph {
public:
    int add_vertex(Vec2 pos = {});
    int add_edge(int u, int v);
    void set_rotation(int v, std::vector<int> outgoing);
    void sort_rotations_by_angle();
    // Computes faces; call after the rotation system is complete.
    void finalize();
    void set_outer_half_edge(int h);
    // Outer face = the face whose straight-line traversal has negative area.
    void choose_outer_by_area();

    static int twin(int h) { return h ^ 1; }
    static int edge_of(int h) { return h >> 1; }

    int vertex_count() const { return static_cast<int>(pos_.size()); }
    int edge_count() const { return static_cast<int>(tail_.size() / 2); }
    int half_edge_count() const { return static_cast<int>(tail_.size()); }
    int tail(int h) const { return tail_[h]; }
    int head(int h) const { return tail_[h ^ 1]; }
    Vec2 pos(int v) const { return pos_[v]; }
    void set_pos(int v, Vec2 p) { pos_[v] = p; }
    int degree(int v) const { return static_cast<int>(rot_[v].size()); }
    const std::vector<int>& rotation(int v) const { return rot_[v]; }
    int rotation_index(int h) const { return rotIndex_[h]; }
    int rot_next(int h) const;
    int rot_prev(int h) const;
    int face_next(int h) const { return rot_prev(h ^ 1); }

    int face_count() const { return static_cast<int>(faces_.size()); }
    int face_of(int h) const { return faceOf_[h]; }
    const std::vector<int>& face(int f) const { return faces_[f]; }
    int outer_face() const { return faceOf_.empty() ? -1 : faceOf_[outerHalf_]; }
    int outer_half_edge() const { return outerHalf_; }
    double face_area(int f) const;

    bool connected() const;
    // Throws on a broken rotation system or a failed Euler check.
    void validate() const;

private:
    std::vector<Vec2> pos_;
    std::vector<int> tail_;
    std::vector<std::vector<int>> rot_;
    std::vector<int> rotIndex_;
    std::vector<int> faceOf_;
    std::vector<std::vector<int>> faces_;
    int outerHalf_ = 0;
};

// n x n cells, (n+1)^2 vertices at integer points, y pointing down.
struct GridGraph {
    int n = 0;
    EmbeddedGraph graph;

    int vertex(int x, int y) const { return y * (n + 1) + x; }
    int hedge(int x, int y) const { return y * n + x; }                      // (x,y)-(x+1,y)
    int vedge(int x, int y) const { return n * (n + 1) + x * n + y; }        // (x,y)-(x,y+1)
    int cell_face(int i, int j) const;
    // Cell coordinates of a face, or {-1,-1} for the outer face.
    std::pair<int, int> face_cell(int f) const;
    int edge_between(int u, int v) const;  // -1 if not adjacent
};

GridGraph grid_graph(int n);

// Subgraph of an embedded graph. gridN > 0 marks a drawing in grid_graph(gridN).
struct Drawing {
    EmbeddedGraph graph;
    std::vector<char> used;
    int gridN = 0;

    int edge_total() const;
    std::vector<std::vector<int>> cycles() const;  // throws unless 2-regular
};

Drawing make_grid_drawing(const GridGraph& grid);

using PairingAssignment = std::vector<int>;  // per vertex: 0 = (h0 h1)(h2 h3), 1 = (h0 h3)(h1 h2)

// Index of the outgoing half-edge paired with h at tail(h).
int pairing_partner(const EmbeddedGraph& g, const PairingAssignment& p, int h);
// Pairing at tail(a) that joins the rotation-adjacent half-edges a and b.
int pairing_joining(const EmbeddedGraph& g, int a, int b);

struct CurveSystem {
    OvalConfig config;
    std::vector<std::vector<int>> cycles;  // edges of curve k, labelled "c<k>"
    std::vector<int> curveOfEdge;
    std::vector<int> regionOfFace;
    std::vector<int> ovalOfCurve;  // index into config
};

OvalConfig drawing_to_config(const Drawing& d);
CurveSystem drawing_curves(const Drawing& d);
CurveSystem perturb(const EmbeddedGraph& g, const PairingAssignment& p);

PairingAssignment reduce(const EmbeddedGraph& g, const PairingAssignment& x, const std::set<std::string>& y);

Drawing chessboard_redraw(const OvalConfig& config, const Drawing& src, int M);
bool chessboard_black(int i, int j);
// Number of drawing edges whose c_X-black side is not a chessboard-black cell.
int chessboard_misaligned_edges(const Drawing& d);

// Compact nested-rectangle drawing of a configuration in the smallest square grid the packing finds.
Drawing naive_drawing(const OvalConfig& config);
// The 5x5 grid drawing of A(B C) D E used in the figure.
Drawing figure1_drawing();

struct GlobeGraph;

struct GridEmbedding {
    int row0 = 0, col0 = 0;           // first latitude row (1-based) and meridian column
    std::vector<int> vertexMap;       // grid vertex -> globe vertex
    std::vector<int> edgeMap;         // grid edge -> globe edge
};

GridEmbedding embed_grid_in_globe(const GridGraph& h, const GlobeGraph& resolved);
Drawing map_drawing(const Drawing& d, const GridEmbedding& emb, const EmbeddedGraph& target);

// faceBlack (optional, per face of gPrime): corners on black faces are cut off away from d.
PairingAssignment choose_pairings_containing(const EmbeddedGraph& gPrime, const Drawing& d,
                                             const std::vector<int>& faceBlack = {});

EmbeddedGraph octahedron_graph();

std::string format_drawing(const Drawing& d);
Drawing parse_drawing(const std::string& text);

}  // namespace nodalforge
