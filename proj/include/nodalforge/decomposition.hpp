#pragma once

#include "nodalforge/blueprint.hpp"

#include <functional>
#include <vector>

namespace nodalforge {

// Truncated Taylor series: c[j] = f^(j)(t0) / j!.
class Jet {
public:
    Jet() = default;
    explicit Jet(int order, double value = 0) : c_(order + 1, 0.0) { c_[0] = value; }
    static Jet variable(double t0, int order);

    int order() const { return static_cast<int>(c_.size()) - 1; }
    double& operator[](int j) { return c_[j]; }
    double operator[](int j) const { return c_[j]; }
    double value() const { return c_[0]; }
    // j-th derivative.
    double derivative(int j) const;
    // Polynomial value at offset dt from the base point.
    double eval(double dt) const;

    Jet operator-() const;
    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator*=(double s);

private:
    std::vector<double> c_;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator+(Jet a, double s);
Jet operator-(Jet a, double s);
Jet operator-(double s, const Jet& a);
Jet operator*(Jet a, double s);
Jet operator*(double s, Jet a);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet exp(const Jet& a);
// Composition of a polynomial (coefficients in powers of s) with a jet s.
Jet compose_poly(const Jet& poly, const Jet& s);

// exp(-1/s) with s = 4(t-lo)(hi-t)/(hi-lo)^2 inside (lo,hi), zero outside.
Jet standard_bump(double lo, double hi, const Jet& t);
// Smooth step: 0 for x <= 0, 1 for x >= 1.
Jet smooth_step(const Jet& x);

struct BumpWindow {
    double lo = 0, hi = 0, weight = 1;
};

// Embedded open interval: starts on startEdge and passes the listed nodes in
// increasing value, switching to each node's right edge. chi is the sum of the
// standard bumps in `bump`, or the standard bump on (lo,hi) if empty.
struct FamilyInterval {
    int startEdge = -1;
    std::vector<int> nodes;
    double lo = 0, hi = 0;
    std::vector<BumpWindow> bump;
};

// Point of a blueprint with double coordinates: a node, or (edge, t).
struct DPoint {
    int edge = -1, node = -1;
    double t = 0;
};

using JetFunction = std::function<Jet(const Jet&)>;

// A function on the blueprint: per-edge jets extending to the closed edge, plus node values.
struct BlueprintFunction {
    std::vector<JetFunction> onEdge;
    std::vector<double> nodeValue;
    double operator()(const DPoint& x) const;
};

class FiniteOrderDecomposition {
public:
    int member_count() const { return static_cast<int>(family_.size()); }
    int order() const { return k_; }
    double epsilon() const { return eps_; }
    // Jet at the node of h_p * X_p, X_p the sum of chi over members through p.
    const Jet& node_jet(int p) const { return nodeTarget_[p]; }

    bool contains(int i, const DPoint& x) const;
    double chi(int i, const DPoint& x) const;
    double h(int i, const DPoint& x) const;
    double phi(const DPoint& x) const { return phi_(x); }
    // sum_i c_i chi_i before the final normalization by phi / phi1.
    double phi1(const DPoint& x) const;
    // Jets of phi1 and phi on edge e at t from one side (+1 right germ, -1 left germ).
    Jet phi1_jet(int e, double t, int side) const;
    Jet phi_jet(int e, double t) const;

private:
    friend FiniteOrderDecomposition decompose_finite_order(const Blueprint&, const BlueprintFunction&,
                                                           const std::vector<FamilyInterval>&, int,
                                                           const std::vector<JetFunction>&);
    int edge_at(int i, double t, int side) const;
    Jet chi_jet(int i, const Jet& t) const;
    Jet c_jet(int i, const Jet& t) const;

    const Blueprint* bp_ = nullptr;
    BlueprintFunction phi_;
    std::vector<FamilyInterval> family_;
    std::vector<JetFunction> base_;
    int k_ = 3;
    double eps_ = 0;
    std::vector<Jet> nodeTarget_;  // jet of g_p X_p at p
    std::vector<Jet> nodeG_;       // jet of g_p at p
};

// Finite-order version of the partition-of-unity decomposition on a blueprint:
// positive h_i with sum_i h_i chi_i = phi, where phi / phi1 is flat to order k at
// every node. base gives the boundary-condition coefficients (default 1).
// Throws invalid_argument on a cover violation or malformed family, and
// domain_error when the node jets of phi are incompatible to order k.
FiniteOrderDecomposition decompose_finite_order(const Blueprint& bp, const BlueprintFunction& phi,
                                                const std::vector<FamilyInterval>& family, int k = 3,
                                                const std::vector<JetFunction>& base = {});

}  // namespace nodalforge
