// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any criterion fails.
#include "nodalforge/blocks.hpp"
#include "nodalforge/blueprint.hpp"
#include "nodalforge/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace nodalforge;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<void(Outcome&)>& body)
{
    Outcome o;
    auto t0 = Clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail << " exception: " << e.what();
    }
    if (!o.pass) ++failures;
    std::printf("%s %d %s:%s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.str().c_str(), seconds_since(t0));
    std::fflush(stdout);
}

void pointwise(Outcome& o)
{
    auto t0 = Clock::now();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(0, 1);
    const int n = 1000000;
    double worstDet = 0, worstMap = 0;
    long bad = 0;
    for (int i = 0; i < n; ++i) {
        // <u,v> log-uniform in (1e-6, 1e6), angle within 1.2 rad, |v|/|u| within 10^(+-1.5), random rotation.
        double ip = std::pow(10.0, -6 + 12 * U(rng));
        double ang = 1.2 * (2 * U(rng) - 1);
        double ratio = std::pow(10.0, 3 * U(rng) - 1.5);
        double nu = std::sqrt(ip / (std::cos(ang) * ratio)), nv = ratio * nu;
        double rot = 2 * std::numbers::pi * U(rng);
        Vec2d u{nu * std::cos(rot), nu * std::sin(rot)};
        Vec2d v{nv * std::cos(rot + ang), nv * std::sin(rot + ang)};
        Sym2 a = metric_from_gradient(u, v);
        // Sym2 stores a single off-diagonal entry, so symmetry is exact by construction.
        double d = std::abs(a.det() - 1);
        Vec2d au = a.apply(u);
        double m = std::hypot(au[0] - v[0], au[1] - v[1]) / std::hypot(v[0], v[1]);
        worstDet = std::max(worstDet, d);
        worstMap = std::max(worstMap, m);
        if (d > 1e-9 || m > 1e-9 || !(a.xx > 0 && a.yy > 0 && a.det() > 0)) ++bad;
    }
    double s = seconds_since(t0);
    o.pass = bad == 0 && s < 10;
    o.detail << " " << n << " samples, " << bad << " violations, max|det A - 1| = " << worstDet
             << ", max|Au - v|/|v| = " << worstMap << ", " << s << " s (limit 10)";
}

void reduction(Outcome& o)
{
    auto t0 = Clock::now();
    long cases = 0, bad = 0;
    for (const EmbeddedGraph& g : {octahedron_graph(), resolve_poles(globe_graph({4, 2})).graph}) {
        int V = g.vertex_count();
        for (unsigned long mask = 0; mask < (1ul << V); ++mask) {
            PairingAssignment x(V);
            for (int k = 0; k < V; ++k) x[k] = static_cast<int>(mask >> k & 1);
            OvalConfig cx = perturb(g, x).config;
            for (unsigned ym = 1; ym < (1u << cx.size()); ++ym) {
                std::set<std::string> y;
                std::vector<int> keep;
                for (int i = 0; i < cx.size(); ++i)
                    if (ym >> i & 1) {
                        y.insert(cx.label(i));
                        keep.push_back(i);
                    }
                if (!nicely_contains(cx, y)) continue;
                ++cases;
                if (!is_equivalent(perturb(g, reduce(g, x, y)).config, sub_configuration(cx, keep))) ++bad;
            }
        }
    }
    double s = seconds_since(t0);
    o.pass = bad == 0 && cases > 0 && s < 60;
    o.detail << " octahedron + globe(4,2): " << cases << " (pairing, subset) cases, " << bad << " mismatches, " << s
             << " s (limit 60)";
}

void redraw(Outcome& o)
{
    auto t0 = Clock::now();
    int cases = 0, misaligned = 0, inequivalent = 0;
    for (int n = 1; n <= 4; ++n)
        for (const auto& c : enumerate_forests(n)) {
            Drawing r = chessboard_redraw(c, naive_drawing(c), 4);
            ++cases;
            misaligned += chessboard_misaligned_edges(r) != 0;
            inequivalent += !is_equivalent(drawing_to_config(r), c);
        }
    double s = seconds_since(t0);
    o.pass = misaligned == 0 && inequivalent == 0 && s < 60;
    o.detail << " " << cases << " configurations with <= 4 ovals, " << misaligned << " with misaligned edges, "
             << inequivalent << " inequivalent, " << s << " s (limit 60)";
}

Blueprint bounded_blueprint(std::mt19937_64& rng)
{
    for (;;) {
        Blueprint bp = random_blueprint(rng, std::uniform_int_distribution<int>(1, 3)(rng));
        if (bp.node_count() <= 6 && bp.edge_count() <= 12) return bp;
    }
}

void blueprints(Outcome& o)
{
    auto t0 = Clock::now();
    std::mt19937_64 rng(4);
    int solved = 0, rejected = 0;
    long singles = 0, multis = 0, mismatches = 0;
    for (int i = 0; i < 200; ++i) {
        Blueprint bp = bounded_blueprint(rng);
        HiddenInstance inst = hidden_phi_instance(bp, rng);
        try {
            PhiSolution sol = solve_phi(bp, inst.f);
            bool positive = sol.slack > 0;
            for (const auto& v : sol.phi.nodeValue) positive = positive && v > 0;
            solved += positive;
            for (const auto& c : single_segment_family(bp, inst.f)) {
                ++singles;
                mismatches += sol.phi.boundary_sum(bp, c) != inst.f(c);
            }
            for (int k = 0; k < 1000; ++k) {
                SimpleSubset c = random_simple_subset(bp, rng);
                ++multis;
                mismatches += sol.phi.boundary_sum(bp, c) != inst.f(c);
            }
        } catch (const BlueprintInfeasible&) {
        }
    }
    for (int i = 0; i < 20; ++i) {
        Blueprint bp = bounded_blueprint(rng);
        HiddenInstance inst = hidden_phi_instance(bp, rng, true);
        try {
            solve_phi(bp, inst.f);
        } catch (const BlueprintInfeasible&) {
            ++rejected;
        }
    }
    double s = seconds_since(t0);
    o.pass = solved == 200 && mismatches == 0 && rejected == 20 && s < 120;
    o.detail << " " << solved << "/200 solved with phi > 0, " << singles << " single-segment and " << multis
             << " multi-component subsets, " << mismatches << " mismatches, " << rejected << "/20 negated instances infeasible, "
             << s << " s (limit 120)";
}

void harmonics(Outcome& o)
{
    const double band = 0.1745;  // "away from poles": 10 degrees
    LatLonGrid coarse(512, 256), fine(1024, 512);
    MetricField rc = MetricField::round(coarse), rf = MetricField::round(fine);
    double worst = 0, minRatio = 1e300;
    int worstN = 0, worstM = 0, ratioN = 0, ratioM = 0, below = 0;
    for (int n = 1; n <= 8; ++n)
        for (int m = 1; m <= n; ++m) {
            auto y = [&](double th, double ph) { return eval_ynm({n, m}, th, ph); };
            double r0 = eigen_residual(rc, sample(coarse, y), eigenvalue(n), band);
            double r1 = eigen_residual(rf, sample(fine, y), eigenvalue(n), band);
            if (r0 > worst) worst = r0, worstN = n, worstM = m;
            if (r0 / r1 < minRatio) minRatio = r0 / r1, ratioN = n, ratioM = m;
            below += r0 / r1 < 4;
        }
    int rootErrors = 0;
    for (int n = 1; n <= 15; ++n)
        for (int m = 0; m <= n; ++m) rootErrors += static_cast<int>(f_nm_roots(n, m).size()) != n - m;
    o.pass = worst <= 1e-3 && below == 0 && rootErrors == 0;
    o.detail << " max residual at 512x256 " << worst << " (Y_" << worstN << "^" << worstM << ", limit 1e-3); min doubling ratio "
             << minRatio << " (Y_" << ratioN << "^" << ratioM << "), " << below << "/36 pairs below 4; root count errors "
             << rootErrors;
}

void pipeline(Outcome& o)
{
    struct Target {
        const char* name;
        OvalConfig config;
        std::optional<Drawing> drawing;
    };
    std::vector<Target> targets = {{"single oval", parse_ovals("A"), {}},
                                   {"two siblings", parse_ovals("A B"), {}},
                                   {"nested pair", parse_ovals("A(B)"), {}},
                                   {"figure-1", drawing_to_config(figure1_drawing()), figure1_drawing()}};
    LatLonGrid coarse(512, 256), fine(1024, 512);
    for (const auto& tg : targets) {
        PipelineConfig cfg;
        cfg.drawing = tg.drawing;
        // One t for both grids: half the smaller of the two grid thresholds.
        CombinatorialPlan plan = plan_combinatorics(tg.config, cfg);
        PerturbationModel model = build_model(plan, cfg.capFactor);
        cfg.t = 0.5 * std::min(positivity_threshold(model, coarse), positivity_threshold(model, fine));

        cfg.grid = coarse;
        PipelineReport rc = run_pipeline(tg.config, cfg);
        cfg.grid = fine;
        auto t0 = Clock::now();
        PipelineReport rf = run_pipeline(tg.config, cfg);
        double s = seconds_since(t0);
        double ratio = rc.residual / rf.residual;
        bool ok = rc.equivalent && rf.equivalent && rc.detDeviation <= 1e-9 && rf.detDeviation <= 1e-9 && ratio >= 4 && s < 300;
        o.pass = o.pass && ok;
        o.detail << " [" << tg.name << " (" << plan.idx.n << "," << plan.idx.m << ") t=" << cfg.t
                 << ": equivalent=" << (rc.equivalent && rf.equivalent) << " det dev "
                 << std::max(rc.detDeviation, rf.detDeviation) << ", residual " << rc.residual << " -> " << rf.residual
                 << " ratio " << ratio << ", " << s << " s]";
    }
}

void blocks(Outcome& o)
{
    int strictBad = 0, equalBad = 0, samples = 0, classBad = 0;
    for (auto [t, kind] : {std::pair{BlockType::Disk, CriticalKind::Max}, std::pair{BlockType::Cylinder, CriticalKind::None},
                           std::pair{BlockType::Pants, CriticalKind::Saddle}}) {
        AdmissibilityReport rep = admissibility_sweep(t, 64, 50);
        for (const auto& s : rep.sweep) {
            ++samples;
            if (s.region == "interior") strictBad += s.S > -1e-6;
            else if (s.region == "saddle") strictBad += s.S + rep.pathBound > -1e-6;
            else equalBad += std::abs(s.S) > 1e-6;
        }
        for (const auto& v : rep.variants) strictBad += v.Supper > -1e-6;
        auto cps = classify_critical(t);
        CriticalKind got = cps.empty() ? CriticalKind::None : cps.front().kind;
        classBad += cps.size() > 1 || got != kind;
    }
    int configs = 0, decBad = 0;
    for (int n = 1; n <= 6; ++n)
        for (const auto& c : enumerate_forests(n)) {
            ++configs;
            BlockDecomposition d = decompose(c);
            decBad += static_cast<int>(d.blocks.size()) != 2 * n || !d.signsConsistent || !verify_decomposition(c, d);
        }
    o.pass = strictBad == 0 && equalBad == 0 && classBad == 0 && decBad == 0;
    o.detail << " " << samples << " sweep samples: " << strictBad << " strict and " << equalBad
             << " equality violations; classification mismatches " << classBad << "; " << configs
             << " configurations with <= 6 ovals, " << decBad << " bad decompositions";
}

double curvature_sup(const MetricField& g, double band)
{
    ScalarField K = gaussian_curvature(g);
    double s = 0;
    for (int r = 2; r + 2 < g.grid.rows(); ++r)
        if (g.grid.in_band(r, band))
            for (int c = 0; c < g.grid.cols(); ++c) s = std::max(s, std::abs(K.at(r, c) - 1));
    return s;
}

void curvature(Outcome& o)
{
    const double band = 0.1745;
    LatLonGrid grid(1024, 512);
    double round = curvature_sup(MetricField::round(grid), band);
    CombinatorialPlan plan = plan_combinatorics(parse_ovals("A"), PipelineConfig{});
    PerturbationModel model = build_model(plan, 1.0 / 3.0);
    double dev[3];
    const double ts[3] = {1e-3, 2e-3, 4e-3};
    for (int i = 0; i < 3; ++i) dev[i] = curvature_sup(assemble_perturbed(model, grid, ts[i]).gt, band);
    double r1 = dev[1] / dev[0], r2 = dev[2] / dev[1];
    o.pass = round <= 1e-3 && r1 <= 3 && r2 <= 3;
    o.detail << " round sup|K-1| = " << round << " (limit 1e-3); single oval (" << plan.idx.n << "," << plan.idx.m
             << ") at 1024x512: sup|K-1| = " << dev[0] << ", " << dev[1] << ", " << dev[2] << " for t = 1e-3, 2e-3, 4e-3; ratios "
             << r1 << ", " << r2 << " (limit 2 x 1.5 = 3)";
}

}  // namespace

int main()
{
    report(1, "pointwise metric formula", pointwise);
    report(2, "reduction oracle", reduction);
    report(3, "chessboard redraw", redraw);
    report(4, "blueprint solver", blueprints);
    report(5, "harmonics", harmonics);
    report(6, "end-to-end pipeline", pipeline);
    report(7, "blocks", blocks);
    report(8, "curvature diagnostic", curvature);
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
