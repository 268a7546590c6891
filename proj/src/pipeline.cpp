#include "nodalforge/pipeline.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace nodalforge {

namespace {

// Runs one stage, prefixing any error with its name while keeping the error category.
template <class F>
auto stage(const char* name, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string(name) + ": " + e.what());
    } catch (const std::domain_error& e) {
        throw std::domain_error(std::string(name) + ": " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(name) + ": " + e.what());
    }
}

}  // namespace

HarmonicIndex harmonic_for_grid(int N)
{
    if (N < 1) throw std::invalid_argument("grid size must be positive");
    int m = (N + 3) / 2;  // 2m >= N + 2 meridians
    return {m + N + 1, m};  // n - m >= N + 1 latitude rows
}

std::vector<int> chessboard_faces(const GlobeGraph& globe, const GridGraph& grid, const GridEmbedding& emb)
{
    const EmbeddedGraph& g = globe.graph;
    int he = grid.graph.face(grid.cell_face(0, 0)).front();
    int seed = g.face_of(2 * emb.edgeMap[he >> 1] + (he & 1));
    std::vector<int> colour(g.face_count(), -1);
    colour[seed] = 1;
    std::queue<int> q;
    q.push(seed);
    while (!q.empty()) {
        int f = q.front();
        q.pop();
        for (int h : g.face(f)) {
            int o = g.face_of(h ^ 1);
            if (colour[o] < 0) {
                colour[o] = 1 - colour[f];
                q.push(o);
            } else if (colour[o] == colour[f]) {
                throw std::logic_error("faces of the globe graph are not two-colourable");
            }
        }
    }
    return colour;
}

CombinatorialPlan plan_combinatorics(const OvalConfig& target, const PipelineConfig& cfg)
{
    if (target.empty()) throw std::invalid_argument("draw: at least one oval required, since f must vanish somewhere");
    CombinatorialPlan p;
    p.target = target;
    p.drawing = stage("draw", [&] {
        Drawing d = cfg.drawing ? *cfg.drawing : naive_drawing(target);
        if (!is_equivalent(drawing_to_config(d), target))
            throw std::invalid_argument("the drawing does not realize the target configuration");
        return d;
    });
    p.redrawn = stage("redraw", [&] { return chessboard_redraw(target, p.drawing, cfg.M); });
    p.idx = cfg.harmonic ? *cfg.harmonic : harmonic_for_grid(p.redrawn.gridN);
    stage("embed", [&] {
        p.globe = resolve_poles(globe_graph(p.idx));
        GridGraph grid = grid_graph(p.redrawn.gridN);
        GridEmbedding emb = embed_grid_in_globe(grid, p.globe);
        p.onGlobe = map_drawing(p.redrawn, emb, p.globe.graph);
        p.faceBlack = chessboard_faces(p.globe, grid, emb);
        return 0;
    });
    p.chosen = stage("choose_pairings", [&] { return choose_pairings_containing(p.globe.graph, p.onGlobe, p.faceBlack); });
    stage("reduce", [&] {
        CurveSystem cs = perturb(p.globe.graph, p.chosen);
        for (int e = 0; e < p.globe.graph.edge_count(); ++e)
            if (p.onGlobe.used[e]) p.kept.insert("c" + std::to_string(cs.curveOfEdge[e]));
        p.reduced = reduce(p.globe.graph, p.chosen, p.kept);
        p.perturbed = perturb(p.globe.graph, p.reduced).config;
        p.equivalent = is_equivalent(p.perturbed, target);
        return 0;
    });
    return p;
}

PerturbationModel build_model(const CombinatorialPlan& plan, double capFactor)
{
    CriticalSets cs = stage("critical_points", [&] { return critical_zeros_and_extrema(plan.idx); });
    BumpSet bumps = stage("bumps", [&] { return BumpSet(cs, default_cap_radii(cs, capFactor)); });
    auto s = stage("signs", [&] { return sign_assignment(cs, plan.globe, plan.reduced); });
    return PerturbationModel(std::move(bumps), std::move(s));
}

PipelineReport run_pipeline(const OvalConfig& target, const PipelineConfig& cfg)
{
    auto start = std::chrono::steady_clock::now();
    PipelineReport r;
    r.plan = plan_combinatorics(target, cfg);
    if (!r.plan.equivalent)
        throw std::runtime_error("reduce: perturbation gives " + to_string(r.plan.perturbed) + ", expected " +
                                 to_string(target));
    PerturbationModel model = build_model(r.plan, cfg.capFactor);
    r.signs = model.signs();
    r.ms = model.ms();
    r.caps = model.bumps().radii();
    r.system = stage("assemble", [&] { return assemble_perturbed(model, cfg.grid, cfg.t); });
    r.t = r.system.t;
    r.threshold = r.system.threshold;
    r.roundPoints = r.system.roundPoints;
    auto ft = [&](double th, double ph) {
        auto L = model.at({th, ph});
        return L.f + r.t * L.P;
    };
    OvalConfig got = stage("extract", [&] { return extract_nodal_config(r.system.ft, ft); });
    r.extracted = to_string(got);
    r.equivalent = is_equivalent(got, target);

    const LatLonGrid& g = cfg.grid;
    for (int row = 0; row < g.rows(); ++row) {
        double s2 = std::sin(g.theta(row)) * std::sin(g.theta(row));
        for (int c = 0; c < g.cols(); ++c)
            r.detDeviation = std::max(r.detDeviation, std::abs(r.system.gt.g[g.index(row, c)].det() - s2) / s2);
    }
    if (cfg.diagnostics) {
        r.residual = eigen_residual(r.system.gt, r.system.ft, model.lambda(), cfg.residualBand);
        ScalarField K = gaussian_curvature(r.system.gt);
        r.curvatureSup = 0;
        for (int row = 2; row + 2 < g.rows(); ++row)
            if (g.in_band(row, cfg.residualBand))
                for (int c = 0; c < g.cols(); ++c) r.curvatureSup = std::max(r.curvatureSup, std::abs(K.at(row, c) - 1));
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::string report_json(const PipelineReport& r)
{
    using nlohmann::ordered_json;
    ordered_json j;
    j["format"] = 1;
    j["target"] = to_string(r.plan.target);
    j["harmonic"] = {{"n", r.plan.idx.n}, {"m", r.plan.idx.m}};
    j["redrawn_grid"] = r.plan.redrawn.gridN;
    j["perturbation"] = to_string(r.plan.perturbed);
    j["kept_curves"] = r.plan.kept.size();
    std::string pairings, signs;
    for (int x : r.plan.reduced) pairings += static_cast<char>('0' + x);
    for (int x : r.signs) signs += x > 0 ? '+' : '-';
    j["pairings"] = pairings;  // one digit per crossing of the resolved globe graph
    j["signs"] = signs;        // S1 crossings, then the north and south pole
    j["m_s"] = r.ms + 0.0;     // no negative zero
    j["cap_radii"] = {{"U", r.caps.u}, {"V", r.caps.v}};
    j["grid"] = r.system.ft.grid.to_string();
    j["t"] = r.t;
    j["t_threshold"] = r.threshold;
    j["round_points"] = r.roundPoints;
    j["extracted"] = r.extracted;
    j["equivalent"] = r.equivalent;
    j["det_deviation"] = r.detDeviation;
    if (r.residual >= 0) j["eigen_residual"] = r.residual;
    if (r.curvatureSup >= 0) j["curvature_sup_dev"] = r.curvatureSup;
    return j.dump(2) + "\n";
}

namespace {

void put_le(std::ostream& os, double x)
{
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    char buf[8];
    for (int k = 0; k < 8; ++k) buf[k] = static_cast<char>((bits >> (8 * k)) & 0xff);
    os.write(buf, 8);
}

double get_le(std::istream& is, const std::string& path)
{
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char*>(buf), 8)) throw std::runtime_error(path + " is shorter than the grid");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(buf[k]) << (8 * k);
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
}

}  // namespace

void write_field_binary(const std::string& path, const ScalarField& f)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    for (double x : f.v) put_le(os, x);
}

ScalarField read_field_binary(const std::string& path, const LatLonGrid& grid)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path);
    ScalarField f(grid);
    for (double& x : f.v) x = get_le(is, path);
    return f;
}

void write_metric_binary(const std::string& path, const MetricField& g)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    for (const Sym2& a : g.g) {
        put_le(os, a.xx);
        put_le(os, a.xy);
        put_le(os, a.yy);
    }
}

MetricField read_metric_binary(const std::string& path, const LatLonGrid& grid)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path);
    MetricField g(grid);
    for (Sym2& a : g.g) {
        a.xx = get_le(is, path);
        a.xy = get_le(is, path);
        a.yy = get_le(is, path);
    }
    return g;
}

void write_field_csv(const std::string& path, const ScalarField& f)
{
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "theta,phi,value\n";
    os.precision(17);
    for (int r = 0; r < f.grid.rows(); ++r)
        for (int c = 0; c < f.grid.cols(); ++c) os << f.grid.theta(r) << ',' << f.grid.phi(c) << ',' << f.at(r, c) << '\n';
}

}  // namespace nodalforge
