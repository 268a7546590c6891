#include "nodalforge/blueprint.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

namespace nodalforge {

namespace {

Rational poly_eval(const std::vector<Rational>& c, const Rational& t)
{
    Rational s = 0;
    for (size_t i = c.size(); i-- > 0;) s = s * t + c[i];
    return s;
}

std::vector<Rational> poly_deriv(const std::vector<Rational>& c)
{
    std::vector<Rational> d;
    for (size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * static_cast<long>(i));
    return d;
}

// Coefficients of c(t0 + s) in s.
std::vector<Rational> poly_shift(const std::vector<Rational>& c, const Rational& t0)
{
    std::vector<Rational> out(c.size(), 0);
    std::vector<Rational> cur = c;
    Rational fact = 1;
    for (size_t k = 0; k < c.size(); ++k) {
        if (k > 0) fact *= static_cast<long>(k);
        out[k] = poly_eval(cur, t0) / fact;
        cur = poly_deriv(cur);
    }
    return out;
}

bool rational_sqrt(const Rational& q, Rational& root)
{
    if (q < 0) return false;
    mpz_class n = q.get_num(), d = q.get_den();
    if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t())) return false;
    mpz_class rn, rd;
    mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
    mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
    root = Rational(rn, rd);
    root.canonicalize();
    return true;
}

Rational abs_q(const Rational& q) { return q < 0 ? Rational(-q) : q; }

bool germ_left(const std::vector<Segment>& segs, const Rational& t)
{
    for (const auto& s : segs)
        if (s.lo < t && s.hi >= t) return true;
    return false;
}

bool germ_right(const std::vector<Segment>& segs, const Rational& t)
{
    for (const auto& s : segs)
        if (s.lo <= t && s.hi > t) return true;
    return false;
}

Rational random_between(std::mt19937_64& rng, const Rational& lo, const Rational& hi)
{
    long k = std::uniform_int_distribution<long>(1, 15)(rng);
    Rational r = lo + (hi - lo) * Rational(k, 16);
    r.canonicalize();
    return r;
}

Rational parse_rational(const std::string& s)
{
    auto dot = s.find('.');
    if (dot == std::string::npos) {
        Rational r(s);
        r.canonicalize();
        return r;
    }
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    mpz_class den = 1;
    for (size_t i = dot + 1; i < s.size(); ++i) den *= 10;
    Rational r(mpz_class(digits), den);
    r.canonicalize();
    return r;
}

}  // namespace

int Blueprint::add_edge(Rational a, Rational b)
{
    if (!(a < b)) throw std::invalid_argument("edge interval must satisfy a < b");
    edges_.push_back({std::move(a), std::move(b)});
    rightEnd_.emplace_back();
    leftEnd_.emplace_back();
    return edge_count() - 1;
}

int Blueprint::add_node(Rational v, int left, int right)
{
    if (left < 0 || left >= edge_count() || right < 0 || right >= edge_count())
        throw std::invalid_argument("node attachment out of range");
    if (edges_[left].b != v || edges_[right].a != v)
        throw std::invalid_argument("node value must equal the attached edge ends");
    nodes_.push_back({std::move(v), left, right});
    int p = node_count() - 1;
    rightEnd_[left].push_back(p);
    leftEnd_[right].push_back(p);
    return p;
}

std::vector<std::vector<int>> Blueprint::plus_classes() const
{
    std::vector<std::vector<int>> out;
    for (int e = 0; e < edge_count(); ++e)
        if (!leftEnd_[e].empty()) out.push_back(leftEnd_[e]);
    return out;
}

std::vector<std::vector<int>> Blueprint::minus_classes() const
{
    std::vector<std::vector<int>> out;
    for (int e = 0; e < edge_count(); ++e)
        if (!rightEnd_[e].empty()) out.push_back(rightEnd_[e]);
    return out;
}

std::vector<int> Blueprint::edge_components(int* count) const
{
    std::vector<int> parent(edge_count());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (const auto& n : nodes_) parent[find(n.left)] = find(n.right);
    std::map<int, int> ids;
    std::vector<int> comp(edge_count());
    for (int e = 0; e < edge_count(); ++e) {
        int r = find(e);
        auto it = ids.emplace(r, static_cast<int>(ids.size())).first;
        comp[e] = it->second;
    }
    if (count) *count = static_cast<int>(ids.size());
    return comp;
}

void Blueprint::validate() const
{
    for (int p = 0; p < node_count(); ++p) {
        const auto& n = nodes_[p];
        if (rightEnd_[n.left].size() < 2 && leftEnd_[n.right].size() < 2)
            throw std::invalid_argument("node " + std::to_string(p) + " is a regular point; merge its edges instead");
    }
}

SimpleSubset SimpleSubset::empty(const Blueprint& bp)
{
    SimpleSubset c;
    c.onEdge.assign(bp.edge_count(), {});
    c.nodeIn.assign(bp.node_count(), 0);
    return c;
}

SimpleSubset SimpleSubset::whole(const Blueprint& bp)
{
    SimpleSubset c = empty(bp);
    for (int e = 0; e < bp.edge_count(); ++e) c.onEdge[e].push_back({bp.edge(e).a, bp.edge(e).b, false, false});
    std::fill(c.nodeIn.begin(), c.nodeIn.end(), 1);
    return c;
}

void validate_subset(const Blueprint& bp, const SimpleSubset& c)
{
    if (static_cast<int>(c.onEdge.size()) != bp.edge_count() || static_cast<int>(c.nodeIn.size()) != bp.node_count())
        throw std::invalid_argument("subset does not match the blueprint");
    for (int e = 0; e < bp.edge_count(); ++e)
        for (const auto& s : c.onEdge[e]) {
            const auto& E = bp.edge(e);
            if (s.lo < E.a || s.hi > E.b || s.hi < s.lo) throw std::invalid_argument("segment outside its edge");
            if ((s.lo == E.a && s.loClosed) || (s.hi == E.b && s.hiClosed))
                throw std::invalid_argument("segment closed at an open edge end");
            if (s.lo == s.hi && !(s.loClosed && s.hiClosed)) throw std::invalid_argument("empty segment");
        }
}

int d_c(const Blueprint& bp, const SimpleSubset& c, const BpPoint& x)
{
    int left, right;
    if (x.node >= 0) {
        const auto& n = bp.node(x.node);
        left = germ_left(c.onEdge[n.left], bp.edge(n.left).b);
        right = germ_right(c.onEdge[n.right], bp.edge(n.right).a);
    } else {
        left = germ_left(c.onEdge[x.edge], x.t);
        right = germ_right(c.onEdge[x.edge], x.t);
    }
    return left - right;
}

std::map<BpPoint, int> d_chain(const Blueprint& bp, const SimpleSubset& c)
{
    std::map<BpPoint, int> out;
    for (int e = 0; e < bp.edge_count(); ++e)
        for (const auto& s : c.onEdge[e])
            for (const Rational& t : {s.lo, s.hi}) {
                if (t == bp.edge(e).a || t == bp.edge(e).b) continue;
                BpPoint x{e, -1, t};
                int v = d_c(bp, c, x);
                if (v != 0) out[x] = v;
            }
    for (int p = 0; p < bp.node_count(); ++p) {
        BpPoint x{-1, p, 0};
        int v = d_c(bp, c, x);
        if (v != 0) out[x] = v;
    }
    return out;
}

int PiecewisePoly::piece_of(const Rational& t) const
{
    if (breaks.size() < 2 || t < breaks.front() || t > breaks.back())
        throw std::out_of_range("piecewise polynomial evaluated outside its domain");
    auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
    int k = static_cast<int>(it - breaks.begin()) - 1;
    return std::min(k, static_cast<int>(coeffs.size()) - 1);
}

Rational PiecewisePoly::operator()(const Rational& t) const { return poly_eval(coeffs[piece_of(t)], t); }

PiecewisePoly PiecewisePoly::polynomial(Rational lo, Rational hi, std::vector<Rational> c)
{
    PiecewisePoly p;
    p.breaks = {std::move(lo), std::move(hi)};
    p.coeffs = {std::move(c)};
    return p;
}

PiecewisePoly PiecewisePoly::linear(const std::vector<Rational>& xs, const std::vector<Rational>& ys)
{
    if (xs.size() < 2 || xs.size() != ys.size()) throw std::invalid_argument("need matching breakpoints");
    PiecewisePoly p;
    p.breaks = xs;
    for (size_t i = 0; i + 1 < xs.size(); ++i) {
        Rational slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        p.coeffs.push_back({ys[i] - slope * xs[i], slope});
    }
    return p;
}

Rational SetFunction::operator()(const SimpleSubset& c) const
{
    Rational total = 0;
    for (size_t e = 0; e < c.onEdge.size(); ++e)
        for (const auto& s : c.onEdge[e]) total += cumulative[e](s.hi) - cumulative[e](s.lo);
    return total;
}

void validate_set_function(const Blueprint& bp, const SetFunction& f)
{
    if (static_cast<int>(f.cumulative.size()) != bp.edge_count())
        throw std::invalid_argument("set function needs one cumulative per edge");
    for (int e = 0; e < bp.edge_count(); ++e) {
        const auto& p = f.cumulative[e];
        if (p.breaks.size() != p.coeffs.size() + 1 || p.coeffs.empty())
            throw std::invalid_argument("malformed piecewise polynomial on edge " + std::to_string(e));
        if (p.breaks.front() != bp.edge(e).a || p.breaks.back() != bp.edge(e).b)
            throw std::invalid_argument("cumulative domain differs from edge " + std::to_string(e));
        for (size_t k = 0; k + 1 < p.breaks.size(); ++k)
            if (!(p.breaks[k] < p.breaks[k + 1])) throw std::invalid_argument("breakpoints must increase");
        for (const auto& c : p.coeffs)
            if (c.size() > 4) throw std::invalid_argument("cumulative pieces have degree at most 3");
        for (size_t k = 1; k < p.coeffs.size(); ++k)
            if (poly_eval(p.coeffs[k - 1], p.breaks[k]) != poly_eval(p.coeffs[k], p.breaks[k]))
                throw std::invalid_argument("cumulative is discontinuous on edge " + std::to_string(e));
    }
}

HomologyResult homology_reduce(const Blueprint& bp)
{
    int E = bp.edge_count(), N = bp.node_count(), S = E + N;
    HomologyResult h;
    for (int e = 0; e < E; ++e) {
        std::vector<Rational> r(S, 0), l(S, 0);
        r[e] = -1;
        for (int p : bp.right_end_nodes(e)) r[E + p] += 1;
        l[e] = 1;
        for (int p : bp.left_end_nodes(e)) l[E + p] -= 1;
        h.relations.push_back(r);
        h.relations.push_back(l);
    }
    // Reduced row echelon form; pivot symbols are expressed through free ones.
    auto m = h.relations;
    std::vector<int> pivotOfRow;
    int rank = 0;
    for (int c = 0; c < S && rank < static_cast<int>(m.size()); ++c) {
        int p = -1;
        for (int r = rank; r < static_cast<int>(m.size()); ++r)
            if (m[r][c] != 0) {
                p = r;
                break;
            }
        if (p < 0) continue;
        std::swap(m[p], m[rank]);
        Rational inv = 1 / m[rank][c];
        for (auto& v : m[rank]) v *= inv;
        for (int r = 0; r < static_cast<int>(m.size()); ++r) {
            if (r == rank || m[r][c] == 0) continue;
            Rational f = m[r][c];
            for (int j = 0; j < S; ++j) m[r][j] -= f * m[rank][j];
        }
        pivotOfRow.push_back(c);
        ++rank;
    }
    std::vector<int> freeIndex(S, -1);
    std::vector<bool> isPivot(S, false);
    for (int c : pivotOfRow) isPivot[c] = true;
    int dim = 0;
    for (int s = 0; s < S; ++s)
        if (!isPivot[s]) freeIndex[s] = dim++;
    h.dim = dim;
    h.classOf.assign(S, std::vector<Rational>(dim, 0));
    for (int s = 0; s < S; ++s)
        if (!isPivot[s]) h.classOf[s][freeIndex[s]] = 1;
    for (int r = 0; r < rank; ++r) {
        int s = pivotOfRow[r];
        for (int f = 0; f < S; ++f)
            if (!isPivot[f] && m[r][f] != 0) h.classOf[s][freeIndex[f]] = -m[r][f];
    }
    return h;
}

std::vector<Rational> chain_symbols(const Blueprint& bp, const std::map<BpPoint, int>& chain)
{
    std::vector<Rational> v(bp.edge_count() + bp.node_count(), 0);
    for (const auto& [x, c] : chain) {
        if (x.node >= 0) v[bp.edge_count() + x.node] += c;
        else v[x.edge] += c;
    }
    return v;
}

Rational PointFunction::operator()(const BpPoint& x) const
{
    if (x.node >= 0) return nodeValue[x.node];
    return base[x.edge](x.t) + shift[x.edge];
}

Rational PointFunction::boundary_sum(const Blueprint& bp, const SimpleSubset& c) const
{
    Rational s = 0;
    for (const auto& [x, d] : d_chain(bp, c)) s += (*this)(x) * d;
    return s;
}

std::vector<EdgeMinimum> interior_minima(const PiecewisePoly& p, bool openLeft, bool openRight)
{
    std::vector<EdgeMinimum> out;
    auto add = [&](const Rational& t) { out.push_back({p(t), t, true}); };
    for (size_t k = 1; k + 1 < p.breaks.size(); ++k) add(p.breaks[k]);
    for (size_t k = 0; k < p.coeffs.size(); ++k) {
        const Rational &lo = p.breaks[k], &hi = p.breaks[k + 1];
        auto d = poly_deriv(p.coeffs[k]);
        while (!d.empty() && d.back() == 0) d.pop_back();
        if (d.empty()) {
            Rational mid = (lo + hi) / 2;
            add(mid);
            continue;
        }
        if (d.size() == 2) {
            Rational r = -d[0] / d[1];
            if (lo < r && r < hi) add(r);
        } else if (d.size() == 3) {
            Rational disc = d[1] * d[1] - 4 * d[2] * d[0];
            if (disc < 0) continue;
            Rational root;
            if (rational_sqrt(disc, root)) {
                for (Rational r : {Rational((-d[1] - root) / (2 * d[2])), Rational((-d[1] + root) / (2 * d[2]))})
                    if (lo < r && r < hi) add(r);
                continue;
            }
            // Irrational critical points: isolate by bisection on sign changes of the
            // derivative, then bound the value from below over the bracket.
            std::vector<Rational> cuts = {lo, hi};
            Rational vertex = -d[1] / (2 * d[2]);
            if (lo < vertex && vertex < hi) cuts.insert(cuts.begin() + 1, vertex);
            for (size_t i = 0; i + 1 < cuts.size(); ++i) {
                Rational l = cuts[i], r = cuts[i + 1];
                Rational fl = poly_eval(d, l), fr = poly_eval(d, r);
                if (fl * fr > 0 || fl == 0 || fr == 0) continue;
                for (int it = 0; it < 80; ++it) {
                    Rational m = (l + r) / 2;
                    Rational fm = poly_eval(d, m);
                    if ((fm < 0) == (fl < 0)) {
                        l = m;
                        fl = fm;
                    } else {
                        r = m;
                    }
                }
                // |Phi'| on [l,r] is at most |Phi'(l)| + |Phi''|max (r-l).
                auto dd = poly_deriv(d);
                Rational bound2 = abs_q(dd[0]) + abs_q(dd.size() > 1 ? dd[1] : Rational(0)) * std::max(abs_q(l), abs_q(r));
                Rational bound1 = abs_q(poly_eval(d, l)) + bound2 * (r - l);
                Rational value = std::min(p(l), p(r)) - bound1 * (r - l);
                out.push_back({value, l, false});
            }
        }
    }
    // At an open end phi tends to zero; approaching from below makes it negative nearby.
    auto below_near = [&](bool right) {
        int k = right ? static_cast<int>(p.coeffs.size()) - 1 : 0;
        Rational end = right ? p.breaks.back() : p.breaks.front();
        Rational other = right ? p.breaks[k] : p.breaks[1];
        auto sh = poly_shift(p.coeffs[k], end);
        int sign = 0;
        for (size_t j = 1; j < sh.size() && sign == 0; ++j) {
            if (sh[j] == 0) continue;
            sign = sh[j] > 0 ? 1 : -1;
            if (right && j % 2 == 1) sign = -sign;
        }
        if (sign >= 0) return;
        Rational endVal = poly_eval(p.coeffs[k], end);
        Rational t = (end + other) / 2;
        for (int it = 0; it < 400 && !(p(t) < endVal); ++it) t = (t + end) / 2;
        add(t);
    };
    if (openLeft) below_near(false);
    if (openRight) below_near(true);
    return out;
}

namespace {

// Searches C with d_C(X) = {0,1} and F(C) <= 0: per edge empty, a prefix ending at a
// candidate minimum, or the whole edge; a nonempty edge forces the edges below its
// left-end nodes to be whole.
std::optional<SimpleSubset> find_witness(const Blueprint& bp, const SetFunction& f,
                                         const std::vector<std::vector<EdgeMinimum>>& minima)
{
    int E = bp.edge_count();
    std::vector<std::optional<Rational>> prefixAt(E);
    for (int e = 0; e < E; ++e) {
        for (const auto& m : minima[e]) {
            Rational v = f.cumulative[e](m.at);
            if (!prefixAt[e] || v < f.cumulative[e](*prefixAt[e])) prefixAt[e] = m.at;
        }
    }
    auto value = [&](const std::vector<int>& st) {
        Rational s = 0;
        for (int e = 0; e < E; ++e) {
            const auto& phi = f.cumulative[e];
            if (st[e] == 1) s += phi(*prefixAt[e]) - phi(bp.edge(e).a);
            if (st[e] == 2) s += phi(bp.edge(e).b) - phi(bp.edge(e).a);
        }
        return s;
    };
    auto build = [&](const std::vector<int>& st) {
        SimpleSubset c = SimpleSubset::empty(bp);
        for (int e = 0; e < E; ++e) {
            if (st[e] == 1) c.onEdge[e].push_back({bp.edge(e).a, *prefixAt[e], false, true});
            if (st[e] == 2) c.onEdge[e].push_back({bp.edge(e).a, bp.edge(e).b, false, false});
        }
        return c;
    };
    auto admissible = [&](const std::vector<int>& st) {
        for (int e = 0; e < E; ++e) {
            if (st[e] == 1 && !prefixAt[e]) return false;
            if (st[e] == 0) continue;
            for (int p : bp.left_end_nodes(e))
                if (st[bp.node(p).left] != 2) return false;
        }
        return true;
    };
    auto good = [&](const std::vector<int>& st) {
        if (!admissible(st) || value(st) > 0) return false;
        auto chain = d_chain(bp, build(st));
        if (chain.empty()) return false;
        for (const auto& kv : chain)
            if (kv.second != 1) return false;
        return true;
    };
    std::vector<int> st(E, 0);
    // Down-closures of a single edge.
    for (int e = 0; e < E; ++e)
        for (int top : {1, 2}) {
            std::fill(st.begin(), st.end(), 0);
            std::vector<int> stack = {e};
            st[e] = top;
            while (!stack.empty()) {
                int x = stack.back();
                stack.pop_back();
                for (int p : bp.left_end_nodes(x)) {
                    int y = bp.node(p).left;
                    if (st[y] != 2) {
                        st[y] = 2;
                        stack.push_back(y);
                    }
                }
            }
            if (good(st)) return build(st);
        }
    if (E <= 9) {
        long total = 1;
        for (int e = 0; e < E; ++e) total *= 3;
        for (long code = 1; code < total; ++code) {
            long c = code;
            for (int e = 0; e < E; ++e, c /= 3) st[e] = static_cast<int>(c % 3);
            if (good(st)) return build(st);
        }
    }
    return std::nullopt;
}

}  // namespace

PhiSolution solve_phi(const Blueprint& bp, const SetFunction& f)
{
    bp.validate();
    validate_set_function(bp, f);
    int E = bp.edge_count(), N = bp.node_count();
    // Variables: node values, edge shifts, slack.
    int V = N + E + 1, S = N + E;
    std::vector<std::vector<Rational>> eqA;
    std::vector<Rational> eqB;
    for (int e = 0; e < E; ++e) {
        const auto& phi = f.cumulative[e];
        std::vector<Rational> r(V, 0), l(V, 0);
        for (int p : bp.right_end_nodes(e)) r[p] += 1;
        r[N + e] = -1;
        eqA.push_back(r);
        eqB.push_back(phi(bp.edge(e).b));
        for (int p : bp.left_end_nodes(e)) l[p] += 1;
        l[N + e] = -1;
        eqA.push_back(l);
        eqB.push_back(phi(bp.edge(e).a));
    }
    std::vector<Rational> particular;
    if (!solve_linear(eqA, eqB, particular))
        throw BlueprintInfeasible("set function does not vanish on a clopen component", std::nullopt);

    std::vector<std::vector<EdgeMinimum>> minima(E);
    PhiSolution sol;
    LinearProgram lp(V);
    for (int i = 0; i < V; ++i) lp.freeVar[i] = true;
    for (size_t r = 0; r < eqA.size(); ++r) lp.add_row(eqA[r], Relation::Equal, eqB[r]);
    for (int p = 0; p < N; ++p) {
        std::vector<Rational> a(V, 0);
        a[p] = 1;
        a[S] = -1;
        lp.add_row(a, Relation::GreaterEq, 0);
        sol.constraintPoints.push_back({-1, p, 0});
    }
    for (int e = 0; e < E; ++e) {
        minima[e] = interior_minima(f.cumulative[e], bp.left_end_nodes(e).empty(), bp.right_end_nodes(e).empty());
        for (const auto& m : minima[e]) {
            std::vector<Rational> a(V, 0);
            a[N + e] = 1;
            a[S] = -1;
            lp.add_row(a, Relation::GreaterEq, -m.value);
            sol.constraintPoints.push_back({e, -1, m.at});
        }
    }
    {
        std::vector<Rational> a(V, 0);
        a[S] = 1;
        lp.add_row(a, Relation::LessEq, 1);
    }
    std::vector<std::vector<Rational>> objectives;
    std::vector<Rational> maxSlack(V, 0);
    maxSlack[S] = -1;
    objectives.push_back(maxSlack);
    lp.cost = maxSlack;
    auto first = solve_lp(lp);
    if (first.status != LpStatus::Optimal || first.x[S] <= 0) {
        auto witness = find_witness(bp, f, minima);
        throw BlueprintInfeasible(witness ? "positivity fails: found C with d_C(X) = {0,1} and F(C) <= 0"
                                          : "no positive solution exists for the point inequalities",
                                  witness);
    }
    for (int i = 0; i < S; ++i) {
        std::vector<Rational> o(V, 0);
        o[i] = 1;
        objectives.push_back(o);
    }
    auto res = solve_lexicographic(lp, objectives);
    if (res.status != LpStatus::Optimal) throw std::logic_error("lexicographic refinement failed");
    sol.slack = res.x[S];
    sol.phi.base = f.cumulative;
    sol.phi.nodeValue.assign(res.x.begin(), res.x.begin() + N);
    sol.phi.shift.assign(res.x.begin() + N, res.x.begin() + S);
    return sol;
}

Blueprint random_blueprint(std::mt19937_64& rng, int junctions)
{
    struct Strand {
        Rational a, b;
    };
    std::vector<Strand> strands;
    std::vector<std::array<int, 2>> links;  // (left strand, right strand) node pairs
    std::vector<Rational> linkValue;
    std::vector<int> active;
    auto coin = [&](int num, int den) { return std::uniform_int_distribution<int>(0, den - 1)(rng) < num; };
    auto start = [&](Rational a) {
        strands.push_back({a, a});
        active.push_back(static_cast<int>(strands.size()) - 1);
        return static_cast<int>(strands.size()) - 1;
    };
    int initial = coin(1, 2) ? 2 : 1;
    for (int i = 0; i < initial; ++i) start(rat(-i, 2));
    for (int j = 1; j <= junctions; ++j) {
        Rational half = rat(2 * j - 1, 2);
        if (active.size() >= 2 && coin(1, 4)) {
            int k = std::uniform_int_distribution<int>(0, static_cast<int>(active.size()) - 1)(rng);
            strands[active[k]].b = half;
            active.erase(active.begin() + k);
        }
        if (coin(1, 4)) start(half);
        if (active.empty()) start(half);
        int nin = (active.size() >= 2 && coin(1, 2)) ? 2 : 1;
        std::shuffle(active.begin(), active.end(), rng);
        std::vector<int> ins(active.end() - nin, active.end());
        active.resize(active.size() - nin);
        int nout = coin(1, 2) ? 2 : 1;
        std::vector<int> outs;
        for (int o = 0; o < nout; ++o) outs.push_back(start(Rational(j)));
        for (int i : ins) strands[i].b = Rational(j);
        for (int i : ins)
            for (int o : outs) {
                links.push_back({i, o});
                linkValue.push_back(Rational(j));
            }
        if (nin == 1 && nout == 1) {
            links.push_back({ins[0], outs[0]});
            linkValue.push_back(Rational(j));
            if (coin(1, 3)) {
                links.push_back({ins[0], outs[0]});
                linkValue.push_back(Rational(j));
            }
        }
    }
    for (int i : active) strands[i].b = Rational(junctions + 1);
    Blueprint bp;
    for (auto& s : strands) bp.add_edge(s.a, s.b);
    for (size_t k = 0; k < links.size(); ++k) bp.add_node(linkValue[k], links[k][0], links[k][1]);
    bp.validate();
    return bp;
}

HiddenInstance hidden_phi_instance(const Blueprint& bp, std::mt19937_64& rng, bool negative)
{
    HiddenInstance h;
    int E = bp.edge_count(), N = bp.node_count();
    h.phi0.nodeValue.resize(N);
    for (int p = 0; p < N; ++p) h.phi0.nodeValue[p] = rat(std::uniform_int_distribution<int>(1, 12)(rng), 4);
    int dipEdge = -1;
    if (negative) {
        std::vector<int> open;
        for (int e = 0; e < E; ++e)
            if (bp.left_end_nodes(e).empty() || bp.right_end_nodes(e).empty()) open.push_back(e);
        if (open.empty()) throw std::invalid_argument("no edge with an open end for the dip");
        dipEdge = open[std::uniform_int_distribution<size_t>(0, open.size() - 1)(rng)];
    }
    for (int e = 0; e < E; ++e) {
        const auto& E_ = bp.edge(e);
        Rational left = 0, right = 0;
        for (int p : bp.left_end_nodes(e)) left += h.phi0.nodeValue[p];
        for (int p : bp.right_end_nodes(e)) right += h.phi0.nodeValue[p];
        std::vector<Rational> xs = {E_.a}, ys = {left};
        int inner = std::uniform_int_distribution<int>(1, 2)(rng);
        std::set<Rational> pts;
        while (static_cast<int>(pts.size()) < inner) pts.insert(random_between(rng, E_.a, E_.b));
        for (const auto& t : pts) {
            xs.push_back(t);
            ys.push_back(rat(std::uniform_int_distribution<int>(2, 16)(rng), 4));
        }
        if (e == dipEdge) ys[1] = Rational(-1);
        xs.push_back(E_.b);
        ys.push_back(right);
        h.f.cumulative.push_back(PiecewisePoly::linear(xs, ys));
    }
    h.phi0.base = h.f.cumulative;
    h.phi0.shift.assign(E, 0);
    return h;
}

SimpleSubset random_simple_subset(const Blueprint& bp, std::mt19937_64& rng)
{
    SimpleSubset c = SimpleSubset::empty(bp);
    auto coin = [&]() { return std::uniform_int_distribution<int>(0, 1)(rng) == 1; };
    for (int e = 0; e < bp.edge_count(); ++e) {
        if (!coin()) continue;
        const auto& E = bp.edge(e);
        int k = std::uniform_int_distribution<int>(1, 3)(rng);
        std::vector<Rational> pts;
        for (int i = 0; i < 2 * k; ++i) {
            int roll = std::uniform_int_distribution<int>(0, 5)(rng);
            if (roll == 0) pts.push_back(E.a);
            else if (roll == 1) pts.push_back(E.b);
            else pts.push_back(random_between(rng, E.a, E.b));
        }
        std::sort(pts.begin(), pts.end());
        for (int i = 0; i < k; ++i) {
            Segment s{pts[2 * i], pts[2 * i + 1], coin(), coin()};
            if (s.lo == E.a) s.loClosed = false;
            if (s.hi == E.b) s.hiClosed = false;
            if (s.lo == s.hi) {
                if (s.lo == E.a || s.lo == E.b) continue;
                s.loClosed = s.hiClosed = true;
            }
            // Keep segments pairwise disjoint so the subset is a plain union.
            if (!c.onEdge[e].empty()) {
                auto& prev = c.onEdge[e].back();
                if (prev.hi == s.lo && prev.hiClosed && s.loClosed) s.loClosed = false;
                if (prev.hi == s.lo && s.lo == s.hi) continue;
            }
            c.onEdge[e].push_back(s);
        }
    }
    for (auto& v : c.nodeIn) v = coin();
    return c;
}

std::vector<SimpleSubset> single_segment_family(const Blueprint& bp, const SetFunction& f)
{
    std::vector<SimpleSubset> out;
    for (int e = 0; e < bp.edge_count(); ++e) {
        const auto& br = f.cumulative[e].breaks;
        std::set<Rational> pts(br.begin(), br.end());
        for (size_t k = 0; k + 1 < br.size(); ++k) pts.insert((br[k] + br[k + 1]) / 2);
        std::vector<Rational> v(pts.begin(), pts.end());
        const auto& E = bp.edge(e);
        for (size_t i = 0; i < v.size(); ++i)
            for (size_t j = i; j < v.size(); ++j)
                for (int mask = 0; mask < 4; ++mask) {
                    Segment s{v[i], v[j], bool(mask & 1), bool(mask & 2)};
                    if ((s.lo == E.a && s.loClosed) || (s.hi == E.b && s.hiClosed)) continue;
                    if (i == j && mask != 3) continue;
                    SimpleSubset c = SimpleSubset::empty(bp);
                    c.onEdge[e].push_back(s);
                    out.push_back(c);
                }
    }
    return out;
}

std::string format_blueprint(const Blueprint& bp, const SetFunction* f)
{
    std::ostringstream os;
    os << "format: 1\n";
    for (int e = 0; e < bp.edge_count(); ++e) os << "edge " << e << " " << bp.edge(e).a << " " << bp.edge(e).b << "\n";
    for (int p = 0; p < bp.node_count(); ++p)
        os << "node " << p << " " << bp.node(p).v << " " << bp.node(p).left << " " << bp.node(p).right << "\n";
    if (f)
        for (int e = 0; e < bp.edge_count(); ++e) {
            const auto& pp = f->cumulative[e];
            for (size_t k = 0; k < pp.coeffs.size(); ++k) {
                os << "piece " << e << " " << pp.breaks[k] << " " << pp.breaks[k + 1];
                for (const auto& c : pp.coeffs[k]) os << " " << c;
                os << "\n";
            }
        }
    return os.str();
}

Blueprint parse_blueprint(const std::string& text, SetFunction* f)
{
    std::istringstream in(text);
    std::string line;
    Blueprint bp;
    std::map<int, int> edgeIds;
    std::map<int, PiecewisePoly> pieces;
    int lineNo = 0;
    auto fail = [&](const std::string& msg) {
        throw std::invalid_argument("line " + std::to_string(lineNo) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineNo;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind)) continue;
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        try {
            if (kind == "format:") {
                if (tok.size() != 1 || tok[0] != "1") fail("unsupported format version");
            } else if (kind == "edge") {
                if (tok.size() != 3) fail("expected: edge id a b");
                int id = std::stoi(tok[0]);
                if (edgeIds.count(id)) fail("duplicate edge id");
                edgeIds[id] = bp.add_edge(parse_rational(tok[1]), parse_rational(tok[2]));
            } else if (kind == "node") {
                if (tok.size() != 4) fail("expected: node id v leftEdge rightEdge");
                int l = std::stoi(tok[2]), r = std::stoi(tok[3]);
                if (!edgeIds.count(l) || !edgeIds.count(r)) fail("node refers to an unknown edge");
                bp.add_node(parse_rational(tok[1]), edgeIds[l], edgeIds[r]);
            } else if (kind == "piece") {
                if (tok.size() < 4 || tok.size() > 7) fail("expected: piece edge lo hi c0 [c1 c2 c3]");
                int e = std::stoi(tok[0]);
                auto& pp = pieces[e];
                Rational lo = parse_rational(tok[1]), hi = parse_rational(tok[2]);
                if (pp.breaks.empty()) pp.breaks.push_back(lo);
                else if (pp.breaks.back() != lo) fail("pieces must be contiguous");
                pp.breaks.push_back(hi);
                std::vector<Rational> c;
                for (size_t i = 3; i < tok.size(); ++i) c.push_back(parse_rational(tok[i]));
                pp.coeffs.push_back(c);
            } else {
                fail("unknown record '" + kind + "'");
            }
        } catch (const std::invalid_argument& ex) {
            std::string msg = ex.what();
            if (msg.rfind("line ", 0) == 0) throw;
            fail(msg);
        }
    }
    bp.validate();
    if (f) {
        f->cumulative.clear();
        if (!pieces.empty()) {
            for (const auto& [id, e] : edgeIds) {
                if (!pieces.count(id)) throw std::invalid_argument("edge " + std::to_string(id) + " has no cumulative");
                (void)e;
            }
            f->cumulative.resize(bp.edge_count());
            for (const auto& [id, e] : edgeIds) f->cumulative[e] = pieces[id];
            validate_set_function(bp, *f);
        }
    }
    return bp;
}

}  // namespace nodalforge
