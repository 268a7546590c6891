#include "verify.hpp"

#include "nodalforge/blocks.hpp"
#include "nodalforge/blueprint.hpp"
#include "nodalforge/harmonics.hpp"
#include "nodalforge/metric.hpp"
#include "nodalforge/ovals.hpp"
#include "nodalforge/planar.hpp"

#include "json.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>

namespace nodalforge::cli {

namespace {

using nlohmann::ordered_json;

// One named property: how many instances were checked, how many failed, and the worst value seen.
struct Check {
    std::string name;
    long long count = 0, failures = 0;
    double worst = 0;
    std::string firstFailure;

    void record(bool ok, const std::string& what = {})
    {
        ++count;
        if (!ok && failures++ == 0) firstFailure = what;
    }
    void measure(double v) { worst = std::max(worst, v); }
    ordered_json json() const
    {
        ordered_json j{{"name", name}, {"passed", failures == 0}, {"count", count}, {"failures", failures}};
        if (worst != 0) j["worst"] = worst;
        if (!firstFailure.empty()) j["first_failure"] = firstFailure;
        return j;
    }
};

struct Suite {
    std::deque<Check> checks;  // stable references while checks are added
    Check& add(std::string name)
    {
        checks.emplace_back().name = std::move(name);
        return checks.back();
    }
    ordered_json json() const
    {
        ordered_json j{{"passed", passed()}, {"checks", ordered_json::array()}};
        for (const auto& c : checks) j["checks"].push_back(c.json());
        return j;
    }
    bool passed() const
    {
        for (const auto& c : checks)
            if (c.failures) return false;
        return true;
    }
};

// (u, v) with <u,v> log-uniform in (1e-6, 1e6), angle below 1.2 rad and |v|/|u| within 10^(+-1.5).
std::pair<Vec2d, Vec2d> random_pair(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> U(0, 1);
    double ip = std::pow(10.0, -6 + 12 * U(rng));
    double ang = 1.2 * (2 * U(rng) - 1);
    double ratio = std::pow(10.0, 3 * U(rng) - 1.5);
    double nu = std::sqrt(ip / (std::cos(ang) * ratio)), nv = ratio * nu;
    double rot = 2 * std::numbers::pi * U(rng);
    Vec2d u{nu * std::cos(rot), nu * std::sin(rot)};
    Vec2d v{nv * std::cos(rot + ang), nv * std::sin(rot + ang)};
    return {u, v};
}

Suite pointwise(const VerifyOptions& opt)
{
    Suite s;
    Check& det = s.add("det_is_one");
    Check& maps = s.add("maps_u_to_v");
    Check& spd = s.add("positive_definite");
    std::mt19937_64 rng(opt.seed);
    long long n = opt.cases > 0 ? opt.cases : 100000;
    for (long long i = 0; i < n; ++i) {
        auto [u, v] = random_pair(rng);
        Sym2 a = metric_from_gradient(u, v);
        double d = std::abs(a.det() - 1);
        det.measure(d);
        det.record(d <= 1e-9, "case " + std::to_string(i));
        Vec2d au = a.apply(u);
        double r = std::hypot(au[0] - v[0], au[1] - v[1]) / std::hypot(v[0], v[1]);
        maps.measure(r);
        maps.record(r <= 1e-9, "case " + std::to_string(i));
        spd.record(a.xx > 0 && a.det() > 0, "case " + std::to_string(i));
    }
    Check& bad = s.add("rejects_nonpositive_pairing");
    try {
        metric_from_gradient({1, 0}, {0, 1});
        bad.record(false, "orthogonal pair accepted");
    } catch (const std::invalid_argument&) {
        bad.record(true);
    }
    return s;
}

std::vector<std::set<std::string>> label_subsets(const OvalConfig& c)
{
    std::vector<std::set<std::string>> out;
    for (unsigned mask = 1; mask < (1u << c.size()); ++mask) {
        std::set<std::string> y;
        for (int i = 0; i < c.size(); ++i)
            if (mask >> i & 1) y.insert(c.label(i));
        out.push_back(std::move(y));
    }
    return out;
}

void reduce_exhaustive(const EmbeddedGraph& g, Check& check)
{
    int V = g.vertex_count();
    for (unsigned long mask = 0; mask < (1ul << V); ++mask) {
        PairingAssignment x(V);
        for (int k = 0; k < V; ++k) x[k] = static_cast<int>(mask >> k & 1);
        OvalConfig cx = perturb(g, x).config;
        for (const auto& y : label_subsets(cx)) {
            if (!nicely_contains(cx, y)) continue;
            std::vector<int> keep;
            for (int i = 0; i < cx.size(); ++i)
                if (y.count(cx.label(i))) keep.push_back(i);
            bool ok = is_equivalent(perturb(g, reduce(g, x, y)).config, sub_configuration(cx, keep));
            check.record(ok, "pairing mask " + std::to_string(mask));
        }
    }
}

Suite planar(const VerifyOptions& opt)
{
    Suite s;
    reduce_exhaustive(octahedron_graph(), s.add("reduce_octahedron"));
    reduce_exhaustive(resolve_poles(globe_graph({4, 2})).graph, s.add("reduce_globe_4_2"));
    Check& align = s.add("chessboard_alignment");
    Check& equiv = s.add("chessboard_equivalence");
    int maxOvals = opt.cases > 0 ? opt.cases : 4;
    for (int n = 1; n <= maxOvals; ++n)
        for (const auto& c : enumerate_forests(n)) {
            Drawing r = chessboard_redraw(c, naive_drawing(c), 4);
            align.record(chessboard_misaligned_edges(r) == 0, to_string(c));
            equiv.record(is_equivalent(drawing_to_config(r), c), to_string(c));
        }
    return s;
}

Blueprint bounded_blueprint(std::mt19937_64& rng)
{
    for (;;) {
        Blueprint bp = random_blueprint(rng, std::uniform_int_distribution<int>(1, 3)(rng));
        if (bp.node_count() <= 6 && bp.edge_count() <= 12) return bp;
    }
}

Suite blueprint(const VerifyOptions& opt)
{
    Suite s;
    Check& single = s.add("single_segments_exact");
    Check& multi = s.add("random_subsets_exact");
    Check& positive = s.add("phi_positive");
    Check& infeasible = s.add("negated_instances_infeasible");
    std::mt19937_64 rng(opt.seed);
    int n = opt.cases > 0 ? opt.cases : 20;
    for (int i = 0; i < n; ++i) {
        Blueprint bp = bounded_blueprint(rng);
        HiddenInstance inst = hidden_phi_instance(bp, rng);
        std::string tag = "instance " + std::to_string(i);
        try {
            PhiSolution sol = solve_phi(bp, inst.f);
            bool pos = sol.slack > 0;
            for (const auto& v : sol.phi.nodeValue) pos = pos && v > 0;
            positive.record(pos, tag);
            for (const auto& c : single_segment_family(bp, inst.f)) single.record(sol.phi.boundary_sum(bp, c) == inst.f(c), tag);
            for (int k = 0; k < 100; ++k) {
                SimpleSubset c = random_simple_subset(bp, rng);
                multi.record(sol.phi.boundary_sum(bp, c) == inst.f(c), tag);
            }
        } catch (const std::exception& e) {
            positive.record(false, tag + ": " + e.what());
        }
    }
    for (int i = 0; i < std::max(1, n / 10); ++i) {
        Blueprint bp = bounded_blueprint(rng);
        HiddenInstance inst = hidden_phi_instance(bp, rng, true);
        try {
            solve_phi(bp, inst.f);
            infeasible.record(false, "negated instance " + std::to_string(i) + " accepted");
        } catch (const BlueprintInfeasible&) {
            infeasible.record(true);
        }
    }
    return s;
}

Suite blocks(const VerifyOptions& opt)
{
    Suite s;
    Check& sweep = s.add("admissibility_sweep");
    Check& crit = s.add("critical_classification");
    for (auto [t, kind] : {std::pair{BlockType::Disk, CriticalKind::Max}, std::pair{BlockType::Cylinder, CriticalKind::None},
                           std::pair{BlockType::Pants, CriticalKind::Saddle}}) {
        AdmissibilityReport rep = admissibility_sweep(t, 64, 50);
        sweep.record(rep.ok, to_string(t));
        auto cps = classify_critical(t);
        CriticalKind got = cps.empty() ? CriticalKind::None : cps.front().kind;
        crit.record(cps.size() <= 1 && got == kind, to_string(t) + " gave " + to_string(got));
    }
    Check& dec = s.add("decompose_all_forests");
    int maxOvals = opt.cases > 0 ? opt.cases : 6;
    for (int n = 1; n <= maxOvals; ++n)
        for (const auto& c : enumerate_forests(n)) {
            BlockDecomposition d = decompose(c);
            std::string why;
            bool ok = static_cast<int>(d.blocks.size()) == 2 * n && d.signsConsistent && verify_decomposition(c, d, &why);
            dec.record(ok, to_string(c) + " " + why);
        }
    return s;
}

Suite harmonics(const VerifyOptions& opt)
{
    Suite s;
    Check& roots = s.add("root_counts");
    for (int n = 1; n <= 15; ++n)
        for (int m = 0; m <= n; ++m) {
            auto r = f_nm_roots(n, m);
            bool ok = static_cast<int>(r.size()) == n - m;
            for (double x : r) ok = ok && std::abs(legendre_dm(n, m, x)) <= 1e-8 * (1 + std::abs(legendre_dm(n, m, 0.3)));
            roots.record(ok, std::to_string(n) + "," + std::to_string(m));
        }
    Check& fd = s.add("round_laplacian_residual");
    int maxN = opt.cases > 0 ? opt.cases : 8;
    LatLonGrid grid(512, 256);
    MetricField round = MetricField::round(grid);
    for (int n = 1; n <= maxN; ++n)
        for (int m = 1; m <= n; ++m) {
            ScalarField f = sample(grid, [&](double th, double ph) { return eval_ynm({n, m}, th, ph); });
            double r = eigen_residual(round, f, eigenvalue(n), 0.1745);
            fd.measure(r);
            fd.record(r <= 1e-3, std::to_string(n) + "," + std::to_string(m));
        }
    return s;
}

}  // namespace

std::string run_verify(const std::string& suite, const VerifyOptions& opt, bool& passed)
{
    static const std::vector<std::pair<std::string, std::function<Suite(const VerifyOptions&)>>> all = {
        {"pointwise", pointwise}, {"planar", planar}, {"blueprint", blueprint}, {"blocks", blocks}, {"harmonics", harmonics}};
    ordered_json j{{"format", 1}, {"suite", suite}, {"seed", opt.seed}};
    if (opt.cases > 0) j["cases"] = opt.cases;
    passed = true;
    bool found = false;
    for (const auto& [name, run] : all) {
        if (suite != "all" && suite != name) continue;
        found = true;
        Suite s = run(opt);
        passed = passed && s.passed();
        j["suites"][name] = s.json();
    }
    if (!found) throw std::invalid_argument("unknown suite '" + suite + "'");
    j["passed"] = passed;
    return j.dump(2) + "\n";
}

}  // namespace nodalforge::cli
