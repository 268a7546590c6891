#include "nodalforge/decomposition.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nodalforge {

Jet Jet::variable(double t0, int order)
{
    Jet j(order, t0);
    if (order >= 1) j[1] = 1;
    return j;
}

double Jet::derivative(int j) const
{
    double f = 1;
    for (int i = 2; i <= j; ++i) f *= i;
    return c_[j] * f;
}

double Jet::eval(double dt) const
{
    double r = 0;
    for (int j = order(); j >= 0; --j) r = r * dt + c_[j];
    return r;
}

Jet Jet::operator-() const
{
    Jet r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
}

Jet& Jet::operator+=(const Jet& o)
{
    if (o.order() < order()) c_.resize(o.c_.size());
    for (int j = 0; j <= order(); ++j) c_[j] += o.c_[j];
    return *this;
}

Jet& Jet::operator-=(const Jet& o) { return *this += -o; }

Jet& Jet::operator*=(double s)
{
    for (auto& x : c_) x *= s;
    return *this;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator+(Jet a, double s)
{
    a[0] += s;
    return a;
}
Jet operator-(Jet a, double s) { return a + (-s); }
Jet operator-(double s, const Jet& a) { return (-a) + s; }
Jet operator*(Jet a, double s) { return a *= s; }
Jet operator*(double s, Jet a) { return a *= s; }

Jet operator*(const Jet& a, const Jet& b)
{
    int n = std::min(a.order(), b.order());
    Jet r(n);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; i + j <= n; ++j) r[i + j] += a[i] * b[j];
    return r;
}

Jet operator/(const Jet& a, const Jet& b)
{
    if (b[0] == 0) throw std::domain_error("jet division by zero");
    int n = std::min(a.order(), b.order());
    Jet q(n);
    for (int j = 0; j <= n; ++j) {
        double s = a[j];
        for (int i = 0; i < j; ++i) s -= q[i] * b[j - i];
        q[j] = s / b[0];
    }
    return q;
}

Jet exp(const Jet& a)
{
    int n = a.order();
    Jet e(n, std::exp(a[0]));
    for (int j = 1; j <= n; ++j) {
        double s = 0;
        for (int i = 1; i <= j; ++i) s += i * a[i] * e[j - i];
        e[j] = s / j;
    }
    return e;
}

Jet compose_poly(const Jet& poly, const Jet& s)
{
    Jet r(s.order(), poly[poly.order()]);
    for (int j = poly.order() - 1; j >= 0; --j) r = r * s + poly[j];
    return r;
}

Jet standard_bump(double lo, double hi, const Jet& t)
{
    if (t.value() <= lo || t.value() >= hi) return Jet(t.order());
    double w = hi - lo;
    Jet s = (t - lo) * (hi - t) * (4 / (w * w));
    return exp(-(Jet(t.order(), 1.0) / s));
}

Jet smooth_step(const Jet& x)
{
    if (x.value() <= 0) return Jet(x.order());
    if (x.value() >= 1) return Jet(x.order(), 1.0);
    Jet one(x.order(), 1.0);
    Jet a = exp(-(one / x)), b = exp(-(one / (1.0 - x)));
    return a / (a + b);
}

double BlueprintFunction::operator()(const DPoint& x) const
{
    if (x.node >= 0) return nodeValue[x.node];
    return onEdge[x.edge](Jet::variable(x.t, 0)).value();
}

namespace {

double val(const Rational& r) { return r.get_d(); }

// Open intervals covering the open interval (a,b).
bool covers(double a, double b, std::vector<std::pair<double, double>> segs)
{
    std::sort(segs.begin(), segs.end());
    double reach = a;
    bool started = false;
    for (const auto& [lo, hi] : segs) {
        if (hi <= reach) continue;
        if (lo > reach || (lo == reach && started)) return false;
        reach = hi;
        started = true;
    }
    return started && reach >= b;
}

}  // namespace

int FiniteOrderDecomposition::edge_at(int i, double t, int side) const
{
    const auto& m = family_[i];
    int cur = m.startEdge;
    for (int n : m.nodes) {
        double v = val(bp_->node(n).v);
        if (side == 0 && t == v) return -1;
        if (side > 0 ? t >= v : t > v) cur = bp_->node(n).right;
        else break;
    }
    return cur;
}

bool FiniteOrderDecomposition::contains(int i, const DPoint& x) const
{
    const auto& m = family_[i];
    if (x.node >= 0) return std::find(m.nodes.begin(), m.nodes.end(), x.node) != m.nodes.end();
    return m.lo < x.t && x.t < m.hi && edge_at(i, x.t, 0) == x.edge;
}

Jet FiniteOrderDecomposition::chi_jet(int i, const Jet& t) const
{
    Jet r(t.order());
    for (const auto& w : family_[i].bump) r += standard_bump(w.lo, w.hi, t) * w.weight;
    return r;
}

Jet FiniteOrderDecomposition::c_jet(int i, const Jet& t) const
{
    Jet base = base_.empty() ? Jet(t.order(), 1.0) : base_[i](t);
    Jet r = base;
    for (int p : family_[i].nodes) {
        double v = val(bp_->node(p).v);
        Jet x = (t.value() >= v ? t - v : v - t) * (2 / eps_) - 1.0;
        Jet w = 1.0 - smooth_step(x);
        if (w.value() == 0 && x.value() >= 1) continue;
        r += w * (compose_poly(nodeG_[p], t - v) - base);
    }
    return r;
}

double FiniteOrderDecomposition::chi(int i, const DPoint& x) const
{
    if (!contains(i, x)) return 0;
    double t = x.node >= 0 ? val(bp_->node(x.node).v) : x.t;
    return chi_jet(i, Jet::variable(t, 0)).value();
}

double FiniteOrderDecomposition::phi1(const DPoint& x) const
{
    double t = x.node >= 0 ? val(bp_->node(x.node).v) : x.t;
    Jet tj = Jet::variable(t, 0);
    double s = 0;
    for (int i = 0; i < member_count(); ++i)
        if (contains(i, x)) s += (c_jet(i, tj) * chi_jet(i, tj)).value();
    return s;
}

double FiniteOrderDecomposition::h(int i, const DPoint& x) const
{
    if (!contains(i, x)) return 0;
    double t = x.node >= 0 ? val(bp_->node(x.node).v) : x.t;
    return c_jet(i, Jet::variable(t, 0)).value() * phi_(x) / phi1(x);
}

Jet FiniteOrderDecomposition::phi1_jet(int e, double t, int side) const
{
    Jet tj = Jet::variable(t, k_);
    Jet s(k_);
    for (int i = 0; i < member_count(); ++i) {
        const auto& m = family_[i];
        bool in = side > 0 ? (m.lo <= t && t < m.hi) : (m.lo < t && t <= m.hi);
        if (in && edge_at(i, t, side) == e) s += c_jet(i, tj) * chi_jet(i, tj);
    }
    return s;
}

Jet FiniteOrderDecomposition::phi_jet(int e, double t) const { return phi_.onEdge[e](Jet::variable(t, k_)); }

FiniteOrderDecomposition decompose_finite_order(const Blueprint& bp, const BlueprintFunction& phi,
                                                const std::vector<FamilyInterval>& family, int k,
                                                const std::vector<JetFunction>& base)
{
    if (k < 0) throw std::invalid_argument("order must be nonnegative");
    if (static_cast<int>(phi.onEdge.size()) != bp.edge_count() || static_cast<int>(phi.nodeValue.size()) != bp.node_count())
        throw std::invalid_argument("function does not match the blueprint");
    if (!base.empty() && base.size() != family.size()) throw std::invalid_argument("one base coefficient per member");
    FiniteOrderDecomposition d;
    d.bp_ = &bp;
    d.phi_ = phi;
    d.family_ = family;
    d.base_ = base;
    d.k_ = k;

    int N = bp.node_count();
    std::vector<std::vector<std::pair<double, double>>> onEdge(bp.edge_count());
    std::vector<std::vector<int>> through(N);
    for (int i = 0; i < static_cast<int>(family.size()); ++i) {
        auto& m = d.family_[i];
        std::string tag = "member " + std::to_string(i);
        if (m.startEdge < 0 || m.startEdge >= bp.edge_count() || !(m.lo < m.hi)) throw std::invalid_argument(tag + " is malformed");
        int cur = m.startEdge;
        double from = m.lo;
        if (from < val(bp.edge(cur).a)) throw std::invalid_argument(tag + " leaves its first edge");
        for (int p : m.nodes) {
            if (p < 0 || p >= N || bp.node(p).left != cur) throw std::invalid_argument(tag + " is not an embedded path");
            double v = val(bp.node(p).v);
            if (!(from < v)) throw std::invalid_argument(tag + " nodes are not increasing inside the interval");
            onEdge[cur].push_back({from, v});
            through[p].push_back(i);
            cur = bp.node(p).right;
            from = v;
        }
        if (!(from < m.hi) || m.hi > val(bp.edge(cur).b)) throw std::invalid_argument(tag + " leaves its last edge");
        onEdge[cur].push_back({from, m.hi});
        if (m.bump.empty()) m.bump.push_back({m.lo, m.hi, 1.0});
        std::vector<std::pair<double, double>> wins;
        for (const auto& w : m.bump) {
            if (!(w.lo < w.hi) || w.lo < m.lo || w.hi > m.hi || !(w.weight > 0)) throw std::invalid_argument(tag + " has a bad bump window");
            wins.push_back({w.lo, w.hi});
        }
        if (!covers(m.lo, m.hi, wins)) throw std::invalid_argument(tag + " bump is not positive on the interval");
    }
    for (int e = 0; e < bp.edge_count(); ++e)
        if (!covers(val(bp.edge(e).a), val(bp.edge(e).b), onEdge[e]))
            throw std::invalid_argument("family does not cover edge " + std::to_string(e));
    for (int p = 0; p < N; ++p) {
        if (through[p].empty()) throw std::invalid_argument("family does not cover node " + std::to_string(p));
        if (!(phi.nodeValue[p] > 0)) throw std::invalid_argument("function is not positive at node " + std::to_string(p));
    }

    // Jet targets: each ~+ class sums to the right germ of its shared edge, each ~- class to the left germ.
    struct ClassRow {
        std::vector<int> nodes;
        Jet target;
    };
    std::vector<ClassRow> rows;
    for (int e = 0; e < bp.edge_count(); ++e) {
        if (!bp.left_end_nodes(e).empty()) rows.push_back({bp.left_end_nodes(e), d.phi_jet(e, val(bp.edge(e).a))});
        if (!bp.right_end_nodes(e).empty()) rows.push_back({bp.right_end_nodes(e), d.phi_jet(e, val(bp.edge(e).b))});
    }
    d.nodeTarget_.assign(N, Jet(k));
    if (N > 0) {
        for (int j = 0; j <= k; ++j) {
            int R = static_cast<int>(rows.size()) + (j == 0 ? N : 0);
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(R, N);
            Eigen::VectorXd b(R);
            for (size_t r = 0; r < rows.size(); ++r) {
                for (int p : rows[r].nodes) A(r, p) = 1;
                b(r) = rows[r].target[j];
            }
            if (j == 0)
                for (int p = 0; p < N; ++p) {
                    A(rows.size() + p, p) = 1;
                    b(rows.size() + p) = phi.nodeValue[p];
                }
            Eigen::VectorXd x = A.completeOrthogonalDecomposition().solve(b);
            if ((A * x - b).norm() > 1e-9 * (1 + b.norm()))
                throw std::domain_error("node jets of the function are incompatible at order " + std::to_string(j));
            for (int p = 0; p < N; ++p) d.nodeTarget_[p][j] = x(p);
        }
    }

    double eps = std::numeric_limits<double>::infinity();
    for (int p = 0; p < N; ++p) {
        double v = val(bp.node(p).v);
        eps = std::min({eps, v - val(bp.edge(bp.node(p).left).a), val(bp.edge(bp.node(p).right).b) - v});
        for (int i : through[p]) eps = std::min({eps, v - family[i].lo, family[i].hi - v});
    }
    for (const auto& m : family)
        for (size_t q = 1; q < m.nodes.size(); ++q)
            eps = std::min(eps, (val(bp.node(m.nodes[q]).v) - val(bp.node(m.nodes[q - 1]).v)) / 2);
    d.eps_ = N > 0 ? eps / 2 : 0;

    d.nodeG_.assign(N, Jet(k));
    for (int p = 0; p < N; ++p) {
        Jet tj = Jet::variable(val(bp.node(p).v), k);
        Jet X(k);
        for (int i : through[p]) X += d.chi_jet(i, tj);
        d.nodeG_[p] = d.nodeTarget_[p] / X;
        // Keep the Taylor polynomial of g_p positive on its window.
        const Jet& g = d.nodeG_[p];
        auto tail = [&](double e) {
            double s = 0, pw = 1;
            for (int j = 1; j <= k; ++j) s += std::abs(g[j]) * (pw *= e);
            return s;
        };
        while (tail(d.eps_) > g[0] / 2) d.eps_ /= 2;
    }
    return d;
}

}  // namespace nodalforge
