// Command-line driver: thin wrappers over the library with file I/O and SVG output.
#include "verify.hpp"

#include "nodalforge/blocks.hpp"
#include "nodalforge/pipeline.hpp"
#include "nodalforge/svg.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace nodalforge;
using nlohmann::ordered_json;

namespace {

struct Options {
    std::string grid = "1024x512";
    double t = 0;
    int M = 4;
    unsigned long long seed = 0;
    int threads = 0;
    std::string out = ".";
};

std::string slurp(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void emit(const Options& o, const std::string& name, const std::string& text)
{
    fs::create_directories(o.out);
    std::ofstream os(fs::path(o.out) / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (fs::path(o.out) / name).string());
    os << text;
}

bool is_drawing_file(const std::string& path) { return fs::path(path).extension() == ".drawing"; }

// "octahedron" or "globe:n,m" (poles resolved).
struct NamedGraph {
    EmbeddedGraph graph;
    std::optional<GlobeGraph> globe;

    std::string svg(const PairingAssignment& p) const { return globe ? svg_perturbation(*globe, p) : svg_perturbation(graph, p); }
};

NamedGraph graph_by_name(const std::string& spec)
{
    if (spec == "octahedron") return {octahedron_graph(), std::nullopt};
    int n = 0, m = 0;
    if (std::sscanf(spec.c_str(), "globe:%d,%d", &n, &m) == 2) {
        GlobeGraph G = resolve_poles(globe_graph({n, m}));
        return {G.graph, G};
    }
    throw std::invalid_argument("unknown graph '" + spec + "' (octahedron or globe:n,m)");
}

// A 0/1 string with one digit per vertex, or random from the seed when empty.
PairingAssignment pairings_from(const std::string& bits, int V, unsigned long long seed)
{
    PairingAssignment p(V);
    if (bits.empty()) {
        std::mt19937_64 rng(seed);
        for (auto& x : p) x = static_cast<int>(rng() & 1);
        return p;
    }
    if (static_cast<int>(bits.size()) != V) throw std::invalid_argument("expected " + std::to_string(V) + " pairing digits");
    for (int k = 0; k < V; ++k) {
        if (bits[k] != '0' && bits[k] != '1') throw std::invalid_argument("pairing digits must be 0 or 1");
        p[k] = bits[k] - '0';
    }
    return p;
}

std::string bits_of(const PairingAssignment& p)
{
    std::string s;
    for (int x : p) s += static_cast<char>('0' + x);
    return s;
}

int cmd_draw(const Options& o, const std::string& file)
{
    OvalConfig c = parse_ovals(slurp(file));
    Drawing d = naive_drawing(c);
    emit(o, "drawing.drawing", format_drawing(d));
    emit(o, "drawing.svg", svg_drawing(d));
    ordered_json j{{"format", 1}, {"configuration", to_string(c)}, {"grid", d.gridN}, {"edges", d.edge_total()},
                   {"equivalent", is_equivalent(drawing_to_config(d), c)}};
    std::cout << j.dump(2) << "\n";
    return j["equivalent"] ? 0 : 1;
}

int cmd_redraw(const Options& o, const std::string& file)
{
    Drawing src;
    OvalConfig c;
    if (is_drawing_file(file)) {
        src = parse_drawing(slurp(file));
        c = drawing_to_config(src);
    } else {
        c = parse_ovals(slurp(file));
        src = naive_drawing(c);
    }
    Drawing r = chessboard_redraw(c, src, o.M);
    emit(o, "redrawn.drawing", format_drawing(r));
    emit(o, "redrawn.svg", svg_drawing(r));
    int bad = chessboard_misaligned_edges(r);
    bool eq = is_equivalent(drawing_to_config(r), c);
    ordered_json j{{"format", 1}, {"configuration", to_string(c)}, {"M", o.M}, {"grid", r.gridN},
                   {"misaligned_edges", bad}, {"equivalent", eq}};
    std::cout << j.dump(2) << "\n";
    return bad == 0 && eq ? 0 : 1;
}

int cmd_perturb(const Options& o, const std::string& graph, const std::string& bits)
{
    NamedGraph ng = graph_by_name(graph);
    const EmbeddedGraph& g = ng.graph;
    PairingAssignment p = pairings_from(bits, g.vertex_count(), o.seed);
    CurveSystem cs = perturb(g, p);
    emit(o, "perturbation.svg", ng.svg(p));
    ordered_json j{{"format", 1}, {"graph", graph}, {"pairings", bits_of(p)}, {"configuration", to_string(cs.config)},
                   {"curves", cs.cycles.size()}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_reduce(const Options& o, const std::string& graph, const std::string& bits, const std::string& keepList)
{
    NamedGraph ng = graph_by_name(graph);
    const EmbeddedGraph& g = ng.graph;
    PairingAssignment x = pairings_from(bits, g.vertex_count(), o.seed);
    std::set<std::string> keep;
    std::stringstream ss(keepList);
    for (std::string tok; std::getline(ss, tok, ',');)
        if (!tok.empty()) keep.insert(tok);
    OvalConfig before = perturb(g, x).config;
    PairingAssignment y = reduce(g, x, keep);
    OvalConfig after = perturb(g, y).config;
    std::vector<int> idx;
    for (int i = 0; i < before.size(); ++i)
        if (keep.count(before.label(i))) idx.push_back(i);
    bool eq = is_equivalent(after, sub_configuration(before, idx));
    emit(o, "reduced.svg", ng.svg(y));
    ordered_json j{{"format", 1}, {"graph", graph}, {"pairings", bits_of(x)}, {"configuration", to_string(before)},
                   {"keep", keep}, {"reduced_pairings", bits_of(y)}, {"reduced_configuration", to_string(after)},
                   {"equivalent", eq}};
    std::cout << j.dump(2) << "\n";
    return eq ? 0 : 1;
}

int cmd_blocks(const Options& o, const std::string& file)
{
    OvalConfig c = parse_ovals(slurp(file));
    BlockDecomposition d = decompose(c);
    std::string why;
    bool ok = verify_decomposition(c, d, &why);
    std::string json = decomposition_json(c, d);
    emit(o, "blocks.json", json);
    emit(o, "blocks.svg", svg_decomposition(c, d));
    std::cout << json;
    if (!ok) std::cerr << "blocks: " << why << "\n";
    return ok ? 0 : 1;
}

int cmd_synth(const Options& o, const std::string& file, const std::string& drawingFile, bool csv)
{
    PipelineConfig cfg;
    cfg.grid = LatLonGrid::parse(o.grid);
    cfg.t = o.t;
    cfg.M = o.M;
    cfg.seed = o.seed;
    OvalConfig target = parse_ovals(slurp(file));
    if (!drawingFile.empty()) cfg.drawing = parse_drawing(slurp(drawingFile));
    PipelineReport r = run_pipeline(target, cfg);

    fs::create_directories(o.out);
    write_field_binary((fs::path(o.out) / "f_t.bin").string(), r.system.ft);
    write_metric_binary((fs::path(o.out) / "g_t.bin").string(), r.system.gt);
    if (csv) write_field_csv((fs::path(o.out) / "f_t.csv").string(), r.system.ft);
    emit(o, "redrawn.svg", svg_drawing(r.plan.redrawn));
    emit(o, "perturbation.svg", svg_perturbation(r.plan.globe, r.plan.reduced));
    emit(o, "nodal.svg", svg_nodal(r.system.ft));
    std::string report = report_json(r);
    emit(o, "report.json", report);
    std::cout << report;
    bool ok = r.equivalent && r.detDeviation <= cfg.detTolerance;
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"nodalforge: nodal sets of perturbed spherical harmonics and compatible metrics"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--grid", o.grid, "Latitude-longitude grid WxH")->capture_default_str();
        sub->add_option("--t", o.t, "Perturbation size (0: half the positivity threshold)");
        sub->add_option("--M", o.M, "Chessboard scale")->capture_default_str();
        sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
        sub->add_option("--threads", o.threads, "Worker threads (0: NODALFORGE_THREADS or 1)");
        sub->add_option("--out", o.out, "Output directory")->capture_default_str();
    };

    std::string file, graph, bits, keep, drawingFile, suite;
    bool csv = false;
    cli::VerifyOptions vo;

    auto* draw = app.add_subcommand("draw", "Naive grid drawing of a configuration");
    draw->add_option("config", file, ".ovals file")->required();
    auto* redraw = app.add_subcommand("redraw", "Chessboard-aligned redraw");
    redraw->add_option("input", file, ".ovals or .drawing file")->required();
    auto* pert = app.add_subcommand("perturb", "Smooth every crossing of a 4-regular graph");
    pert->add_option("graph", graph, "octahedron or globe:n,m")->required();
    pert->add_option("--pairings", bits, "One 0/1 digit per vertex (default: random from the seed)");
    auto* red = app.add_subcommand("reduce", "Re-pair crossings so only the kept curves remain");
    red->add_option("graph", graph, "octahedron or globe:n,m")->required();
    red->add_option("--pairings", bits, "One 0/1 digit per vertex (default: random from the seed)");
    red->add_option("--keep", keep, "Comma-separated curve labels, e.g. c0,c2")->required();
    auto* blk = app.add_subcommand("blocks", "Simple-block decomposition");
    blk->add_option("config", file, ".ovals file")->required();
    auto* syn = app.add_subcommand("synth", "Full pipeline: eigenfunction and metric realizing a configuration");
    syn->add_option("config", file, ".ovals file")->required();
    syn->add_option("--drawing", drawingFile, "Grid drawing to start from instead of the naive one");
    syn->add_flag("--csv", csv, "Also write f_t as CSV");
    auto* ver = app.add_subcommand("verify", "Property suites");
    ver->add_option("suite", suite, "pointwise, blueprint, planar, blocks, harmonics or all")->required();
    ver->add_option("--cases", vo.cases, "Instance count (suite specific)");
    for (auto* sub : {draw, redraw, pert, red, blk, syn, ver}) common(sub);

    CLI11_PARSE(app, argc, argv);
    set_thread_count(o.threads);
    try {
        if (*draw) return cmd_draw(o, file);
        if (*redraw) return cmd_redraw(o, file);
        if (*pert) return cmd_perturb(o, graph, bits);
        if (*red) return cmd_reduce(o, graph, bits, keep);
        if (*blk) return cmd_blocks(o, file);
        if (*syn) return cmd_synth(o, file, drawingFile, csv);
        if (*ver) {
            vo.seed = o.seed;
            bool passed = false;
            std::string json = cli::run_verify(suite, vo, passed);
            emit(o, "verify.json", json);
            std::cout << json;
            return passed ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
