#include "nodalforge/lp.hpp"

#include <stdexcept>

namespace nodalforge {

namespace {

struct Tableau {
    int m = 0, n = 0;  // rows, columns (excluding rhs)
    std::vector<std::vector<Rational>> t;  // m rows of n+1 entries, rhs last
    std::vector<Rational> z;              // reduced costs, n+1 entries, -objective last
    std::vector<int> basis;

    void pivot(int r, int c)
    {
        Rational p = t[r][c];
        for (auto& v : t[r]) v /= p;
        for (int i = 0; i < m; ++i) {
            if (i == r || t[i][c] == 0) continue;
            Rational f = t[i][c];
            for (int j = 0; j <= n; ++j)
                if (t[r][j] != 0) t[i][j] -= f * t[r][j];
        }
        if (z[c] != 0) {
            Rational f = z[c];
            for (int j = 0; j <= n; ++j)
                if (t[r][j] != 0) z[j] -= f * t[r][j];
        }
        basis[r] = c;
    }

    void load_cost(const std::vector<Rational>& c)
    {
        z.assign(n + 1, 0);
        for (int j = 0; j < n; ++j) z[j] = c[j];
        for (int i = 0; i < m; ++i) {
            Rational f = z[basis[i]];
            if (f == 0) continue;
            for (int j = 0; j <= n; ++j) z[j] -= f * t[i][j];
        }
    }

    // Returns false when unbounded. allowed[j] restricts entering columns.
    bool run(const std::vector<bool>& allowed)
    {
        for (;;) {
            int enter = -1;
            for (int j = 0; j < n; ++j)
                if (allowed[j] && z[j] < 0) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;
            int leave = -1;
            Rational best;
            for (int i = 0; i < m; ++i) {
                if (t[i][enter] <= 0) continue;
                Rational ratio = t[i][n] / t[i][enter];
                if (leave < 0 || ratio < best || (ratio == best && basis[i] < basis[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
    }
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp)
{
    // Column layout: split variables, then slacks, then artificials.
    std::vector<int> posCol(lp.vars), negCol(lp.vars, -1);
    int cols = 0;
    for (int i = 0; i < lp.vars; ++i) {
        posCol[i] = cols++;
        if (lp.freeVar[i]) negCol[i] = cols++;
    }
    int m = static_cast<int>(lp.rows.size());
    std::vector<int> slackCol(m, -1);
    for (int r = 0; r < m; ++r)
        if (lp.rows[r].rel != Relation::Equal) slackCol[r] = cols++;
    int firstArt = cols;
    cols += m;

    Tableau tb;
    tb.m = m;
    tb.n = cols;
    tb.t.assign(m, std::vector<Rational>(cols + 1, 0));
    tb.basis.assign(m, 0);
    for (int r = 0; r < m; ++r) {
        const auto& row = lp.rows[r];
        if (static_cast<int>(row.a.size()) != lp.vars) throw std::invalid_argument("LP row has the wrong width");
        auto& tr = tb.t[r];
        for (int i = 0; i < lp.vars; ++i) {
            tr[posCol[i]] = row.a[i];
            if (negCol[i] >= 0) tr[negCol[i]] = -row.a[i];
        }
        if (row.rel == Relation::LessEq) tr[slackCol[r]] = 1;
        if (row.rel == Relation::GreaterEq) tr[slackCol[r]] = -1;
        tr[cols] = row.b;
        if (row.b < 0)
            for (auto& v : tr) v = -v;
        tr[firstArt + r] = 1;
        tb.basis[r] = firstArt + r;
    }

    LpResult res;
    std::vector<Rational> phase1(cols, 0);
    for (int r = 0; r < m; ++r) phase1[firstArt + r] = 1;
    tb.load_cost(phase1);
    std::vector<bool> all(cols, true);
    tb.run(all);
    if (-tb.z[cols] != 0) {
        res.status = LpStatus::Infeasible;
        return res;
    }
    // Drive artificials out of the basis; drop rows that are redundant.
    for (int r = 0; r < tb.m; ++r) {
        if (tb.basis[r] < firstArt) continue;
        int c = -1;
        for (int j = 0; j < firstArt; ++j)
            if (tb.t[r][j] != 0) {
                c = j;
                break;
            }
        if (c >= 0) {
            tb.pivot(r, c);
        } else {
            tb.t.erase(tb.t.begin() + r);
            tb.basis.erase(tb.basis.begin() + r);
            --tb.m;
            --r;
        }
    }
    std::vector<Rational> cost(cols, 0);
    for (int i = 0; i < lp.vars; ++i) {
        cost[posCol[i]] = lp.cost[i];
        if (negCol[i] >= 0) cost[negCol[i]] = -lp.cost[i];
    }
    tb.load_cost(cost);
    std::vector<bool> allowed(cols, false);
    for (int j = 0; j < firstArt; ++j) allowed[j] = true;
    if (!tb.run(allowed)) {
        res.status = LpStatus::Unbounded;
        return res;
    }
    std::vector<Rational> val(cols, 0);
    for (int r = 0; r < tb.m; ++r) val[tb.basis[r]] = tb.t[r][cols];
    res.status = LpStatus::Optimal;
    res.x.assign(lp.vars, 0);
    for (int i = 0; i < lp.vars; ++i) {
        res.x[i] = val[posCol[i]];
        if (negCol[i] >= 0) res.x[i] -= val[negCol[i]];
    }
    res.value = 0;
    for (int i = 0; i < lp.vars; ++i) res.value += lp.cost[i] * res.x[i];
    return res;
}

LpResult solve_lexicographic(LinearProgram lp, const std::vector<std::vector<Rational>>& objectives)
{
    LpResult res;
    res.status = LpStatus::Infeasible;
    for (const auto& obj : objectives) {
        lp.cost = obj;
        res = solve_lp(lp);
        if (res.status != LpStatus::Optimal) return res;
        lp.add_row(obj, Relation::Equal, res.value);
    }
    return res;
}

int rational_rank(std::vector<std::vector<Rational>> m)
{
    int rows = static_cast<int>(m.size());
    if (rows == 0) return 0;
    int cols = static_cast<int>(m[0].size());
    int rank = 0;
    for (int c = 0; c < cols && rank < rows; ++c) {
        int p = -1;
        for (int r = rank; r < rows; ++r)
            if (m[r][c] != 0) {
                p = r;
                break;
            }
        if (p < 0) continue;
        std::swap(m[p], m[rank]);
        for (int r = rank + 1; r < rows; ++r) {
            if (m[r][c] == 0) continue;
            Rational f = m[r][c] / m[rank][c];
            for (int j = c; j < cols; ++j) m[r][j] -= f * m[rank][j];
        }
        ++rank;
    }
    return rank;
}

bool solve_linear(std::vector<std::vector<Rational>> a, std::vector<Rational> b, std::vector<Rational>& x)
{
    int rows = static_cast<int>(a.size());
    int cols = rows ? static_cast<int>(a[0].size()) : 0;
    std::vector<int> pivotCol;
    int rank = 0;
    for (int c = 0; c < cols && rank < rows; ++c) {
        int p = -1;
        for (int r = rank; r < rows; ++r)
            if (a[r][c] != 0) {
                p = r;
                break;
            }
        if (p < 0) continue;
        std::swap(a[p], a[rank]);
        std::swap(b[p], b[rank]);
        Rational inv = 1 / a[rank][c];
        for (int j = c; j < cols; ++j) a[rank][j] *= inv;
        b[rank] *= inv;
        for (int r = 0; r < rows; ++r) {
            if (r == rank || a[r][c] == 0) continue;
            Rational f = a[r][c];
            for (int j = c; j < cols; ++j) a[r][j] -= f * a[rank][j];
            b[r] -= f * b[rank];
        }
        pivotCol.push_back(c);
        ++rank;
    }
    for (int r = rank; r < rows; ++r)
        if (b[r] != 0) return false;
    x.assign(cols, 0);
    for (int r = 0; r < rank; ++r) x[pivotCol[r]] = b[r];
    return true;
}

}  // namespace nodalforge
