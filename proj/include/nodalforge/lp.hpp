#pragma once

#include <gmpxx.h>

#include <vector>

namespace nodalforge {

using Rational = mpq_class;

// n/d in canonical form; mpq_class(n, d) alone does not reduce.
inline Rational rat(long n, long d = 1)
{
    Rational r(n, d);
    r.canonicalize();
    return r;
}

enum class Relation { LessEq, Equal, GreaterEq };
enum class LpStatus { Optimal, Infeasible, Unbounded };

// minimize c.x subject to rows, x_i >= 0 unless freeVar[i].
struct LinearProgram {
    int vars = 0;
    std::vector<Rational> cost;
    struct Row {
        std::vector<Rational> a;
        Relation rel = Relation::Equal;
        Rational b;
    };
    std::vector<Row> rows;
    std::vector<bool> freeVar;

    explicit LinearProgram(int n = 0) : vars(n), cost(n), freeVar(n, false) {}
    void add_row(std::vector<Rational> a, Relation rel, Rational b) { rows.push_back({std::move(a), rel, std::move(b)}); }
};

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    std::vector<Rational> x;
    Rational value;
};

// Two-phase dense simplex with Bland's rule, exact.
LpResult solve_lp(const LinearProgram& lp);

// Minimizes each objective in turn, fixing the optimum before the next.
LpResult solve_lexicographic(LinearProgram lp, const std::vector<std::vector<Rational>>& objectives);

// Rank of a rational matrix by exact elimination.
int rational_rank(std::vector<std::vector<Rational>> m);
// One solution of A x = b (free variables set to zero), or empty if inconsistent.
bool solve_linear(std::vector<std::vector<Rational>> a, std::vector<Rational> b, std::vector<Rational>& x);

}  // namespace nodalforge
