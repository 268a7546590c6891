#pragma once

#include "nodalforge/lp.hpp"

#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace nodalforge {

struct BpEdge {
    Rational a, b;  // open value interval
};

// A singular point: limit of the right end of `left` and of the left end of `right`.
struct BpNode {
    Rational v;
    int left = -1, right = -1;
};

class Blueprint {
public:
    int add_edge(Rational a, Rational b);
    int add_node(Rational v, int left, int right);

    int edge_count() const { return static_cast<int>(edges_.size()); }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    const BpEdge& edge(int e) const { return edges_[e]; }
    const BpNode& node(int p) const { return nodes_[p]; }
    // Nodes at the right end of e (left attachment e) and at its left end.
    const std::vector<int>& right_end_nodes(int e) const { return rightEnd_[e]; }
    const std::vector<int>& left_end_nodes(int e) const { return leftEnd_[e]; }

    // Equivalence classes of nodes: ~+ share the right attachment, ~- the left one.
    std::vector<std::vector<int>> plus_classes() const;
    std::vector<std::vector<int>> minus_classes() const;
    // Connected component of each edge.
    std::vector<int> edge_components(int* count = nullptr) const;

    // Throws unless every node is singular and attachments match values.
    void validate() const;

private:
    std::vector<BpEdge> edges_;
    std::vector<BpNode> nodes_;
    std::vector<std::vector<int>> rightEnd_, leftEnd_;
};

struct BpPoint {
    int edge = -1;  // regular point (edge, t), or
    int node = -1;  // a node
    Rational t;

    bool operator<(const BpPoint& o) const
    {
        if (node != o.node) return node < o.node;
        if (edge != o.edge) return edge < o.edge;
        return t < o.t;
    }
    bool operator==(const BpPoint& o) const { return node == o.node && edge == o.edge && t == o.t; }
};

struct Segment {
    Rational lo, hi;
    bool loClosed = false, hiClosed = false;
};

struct SimpleSubset {
    std::vector<std::vector<Segment>> onEdge;
    std::vector<char> nodeIn;

    static SimpleSubset empty(const Blueprint& bp);
    static SimpleSubset whole(const Blueprint& bp);
};

// Throws if a segment leaves its edge or closes onto an open end.
void validate_subset(const Blueprint& bp, const SimpleSubset& c);

int d_c(const Blueprint& bp, const SimpleSubset& c, const BpPoint& x);
// Support of d_C with its values.
std::map<BpPoint, int> d_chain(const Blueprint& bp, const SimpleSubset& c);

// Continuous piecewise polynomial on [breaks.front(), breaks.back()], degree <= 3,
// coefficients in the absolute variable.
struct PiecewisePoly {
    std::vector<Rational> breaks;
    std::vector<std::vector<Rational>> coeffs;  // one list per piece, lowest degree first

    Rational operator()(const Rational& t) const;
    int piece_of(const Rational& t) const;
    static PiecewisePoly polynomial(Rational lo, Rational hi, std::vector<Rational> c);
    // Linear interpolation through (xs[i], ys[i]).
    static PiecewisePoly linear(const std::vector<Rational>& xs, const std::vector<Rational>& ys);
};

// F(C) = sum over segments of Phi_e(hi) - Phi_e(lo); nodes carry no mass.
struct SetFunction {
    std::vector<PiecewisePoly> cumulative;

    Rational operator()(const SimpleSubset& c) const;
};

void validate_set_function(const Blueprint& bp, const SetFunction& f);

struct HomologyResult {
    int dim = 0;
    // Symbols: edges 0..E-1 then nodes E..E+N-1. Row k of relations is the
    // boundary chain of an end segment.
    std::vector<std::vector<Rational>> relations;
    std::vector<std::vector<Rational>> classOf;  // symbol -> coordinates in H
};

HomologyResult homology_reduce(const Blueprint& bp);
// Coordinates of a chain (point -> coefficient) in the edge/node symbol basis.
std::vector<Rational> chain_symbols(const Blueprint& bp, const std::map<BpPoint, int>& chain);

// phi(edge e, t) = Phi_e(t) + shift[e]; phi(node p) = nodeValue[p].
struct PointFunction {
    std::vector<PiecewisePoly> base;
    std::vector<Rational> shift;
    std::vector<Rational> nodeValue;

    Rational operator()(const BpPoint& x) const;
    // Sum of phi d_C over the boundary of C.
    Rational boundary_sum(const Blueprint& bp, const SimpleSubset& c) const;
};

struct PhiSolution {
    PointFunction phi;
    Rational slack;  // min over constraint points of phi, capped at 1
    std::vector<BpPoint> constraintPoints;
};

class BlueprintInfeasible : public std::runtime_error {
public:
    BlueprintInfeasible(const std::string& what, std::optional<SimpleSubset> witness)
        : std::runtime_error(what), witness(std::move(witness)) {}
    std::optional<SimpleSubset> witness;  // C with d_C(X) = {0,1} and F(C) <= 0
};

PhiSolution solve_phi(const Blueprint& bp, const SetFunction& f);

// Lower bounds for the infimum of Phi over the open interior of each piece set.
struct EdgeMinimum {
    Rational value;  // exact when exact is true, otherwise a certified lower bound
    Rational at;
    bool exact = true;
};
std::vector<EdgeMinimum> interior_minima(const PiecewisePoly& p, bool openLeft, bool openRight);

// Generators for tests and verification.
Blueprint random_blueprint(std::mt19937_64& rng, int junctions);
struct HiddenInstance {
    SetFunction f;
    PointFunction phi0;
};
// Positive piecewise-linear phi0 compatible with the nodes; negative adds a dip
// below zero on an edge with an open end.
HiddenInstance hidden_phi_instance(const Blueprint& bp, std::mt19937_64& rng, bool negative = false);
SimpleSubset random_simple_subset(const Blueprint& bp, std::mt19937_64& rng);
// Every single segment with endpoints among ends, breakpoints and midpoints of f's pieces.
std::vector<SimpleSubset> single_segment_family(const Blueprint& bp, const SetFunction& f);

std::string format_blueprint(const Blueprint& bp, const SetFunction* f = nullptr);
Blueprint parse_blueprint(const std::string& text, SetFunction* f = nullptr);

}  // namespace nodalforge
