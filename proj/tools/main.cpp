// monodromy-lab: classify equilibria, scan bifurcation diagrams, compute
// period lattices and monodromy matrices of integrable two-degree-of-freedom
// systems. JSON reports on stdout; exit 0 success, 2 input error, 3
// numerical inconclusiveness.

#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mlab/catalog.h"
#include "mlab/errors.h"
#include "mlab/geom.h"
#include "mlab/lattice.h"
#include "mlab/log.h"
#include "mlab/model.h"
#include "mlab/svgplot.h"
#include "mlab/williamson.h"

namespace {

using nlohmann::json;
using namespace mlab;

/// Input problems that are not CLI11 syntax errors (bad file, wrong arity).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json state_json(const State& x) {
    json a = json::array();
    for (Eigen::Index i = 0; i < x.size(); ++i) a.push_back(x[i]);
    return a;
}

json value_json(const ValuePoint& c) { return json::array({c.c1, c.c2}); }

json matrix_json(const Mat2i& m) {
    return json::array({json::array({m.a, m.b}), json::array({m.c, m.d})});
}

json complex_json(const std::complex<double>& z) {
    return json::array({z.real(), z.imag()});
}

json report_json(const WilliamsonReport& rep) {
    json eig = json::array();
    for (const auto& z : rep.eigenvalues) eig.push_back(complex_json(z));
    return json{{"point", state_json(rep.point)},
                {"type", to_string(rep.type)},
                {"eigenvalues", eig},
                {"combination", json::array({rep.combination[0], rep.combination[1]})},
                {"residual", rep.residual}};
}

std::vector<double> parse_reals(const std::string& text, std::size_t expected,
                                const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            while (used < item.size() && std::isspace((unsigned char)item[used]))
                ++used;
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw UsageError("could not parse '" + item + "' in " + what);
        }
    }
    if (expected != 0 && out.size() != expected)
        throw UsageError(what + " needs " + std::to_string(expected) +
                         " comma-separated numbers, got " +
                         std::to_string(out.size()));
    return out;
}

/// Box syntax: "lo:hi" (all four axes) or four comma-separated "lo:hi" pairs.
Box4 parse_box(const std::string& text) {
    const auto whole_double = [](const std::string& s) {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        while (used < s.size() && std::isspace((unsigned char)s[used])) ++used;
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    };
    std::vector<std::pair<double, double>> ranges;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto colon = part.find(':');
        if (colon == std::string::npos)
            throw UsageError("box range '" + part + "' must look like lo:hi");
        try {
            const double lo = whole_double(part.substr(0, colon));
            const double hi = whole_double(part.substr(colon + 1));
            ranges.emplace_back(lo, hi);
        } catch (const std::exception&) {
            throw UsageError("could not parse box range '" + part + "'");
        }
    }
    if (ranges.size() == 1) ranges.assign(4, ranges.front());
    if (ranges.size() != 4)
        throw UsageError("--box needs one lo:hi range or four, got " +
                         std::to_string(ranges.size()));
    Box4 box;
    for (int i = 0; i < 4; ++i) {
        if (!(ranges[i].first < ranges[i].second))
            throw UsageError("box axis " + std::to_string(i + 1) +
                             " is empty (min must be below max)");
        box.lo[i] = ranges[i].first;
        box.hi[i] = ranges[i].second;
    }
    return box;
}

struct SystemSource {
    std::string builtin;  ///< --system NAME
    std::string file;     ///< --file PATH
};

struct ResolvedSystem {
    SystemDescriptor sys;
    std::string label;
    json inputs;  ///< how the system was specified
};

ResolvedSystem resolve_system(const SystemSource& src) {
    if (!src.builtin.empty() && !src.file.empty())
        throw UsageError("--system and --file are mutually exclusive");
    if (!src.builtin.empty()) {
        ResolvedSystem r{builtin_system(src.builtin), src.builtin,
                         json{{"system", src.builtin}}};
        return r;
    }
    if (!src.file.empty()) {
        std::ifstream in(src.file);
        if (!in) throw UsageError("cannot open system file '" + src.file + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        SystemDescriptor sys = parse_system(buf.str());
        const std::string label = sys.name;
        return ResolvedSystem{std::move(sys), label,
                              json{{"file", src.file}, {"system", label}}};
    }
    throw UsageError("one of --system NAME or --file PATH is required");
}

/// Default phase-space start for fiber searches: step off the first seed
/// (which is typically a critical point) or fall back to the ones vector.
State default_search_seed(const SystemDescriptor& sys) {
    State seed;
    if (!sys.seeds.empty()) {
        seed = sys.seeds.front();
        seed.array() += 0.3;
    } else {
        seed = State::Ones(sys.dim);
    }
    return seed;
}

std::vector<ValuePoint> equilibrium_values(const SystemDescriptor& sys) {
    std::vector<ValuePoint> values;
    if (sys.seeds.empty()) return values;
    const EquilibriumSearch found = find_equilibria(sys, sys.seeds);
    values.reserve(found.points.size());
    for (const State& p : found.points) values.push_back(moment_value(sys, p));
    return values;
}

std::string csv_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& text,
                     const std::string& what) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot open " + what + " file '" + path + "'");
    out << text;
    if (!out) throw UsageError("failed writing " + what + " file '" + path + "'");
}

/// Scatter plot of a bifurcation diagram, optionally with a loop overlay.
std::string diagram_svg(const std::string& title,
                        const std::vector<CriticalValue>& values,
                        const LoopPath* loop) {
    SvgPlot plot(title, "F1", "F2");
    plot.define_class("FocusFocus", "circle", "#d62728", 5);
    plot.define_class("EllipticElliptic", "square", "#1f77b4", 4);
    plot.define_class("EllipticHyperbolic", "diamond", "#ff7f0e", 5);
    plot.define_class("HyperbolicHyperbolic", "cross", "#2ca02c", 5);
    plot.define_class("Degenerate", "square", "#7f7f7f", 4);
    plot.define_class("rank-one", "circle", "#9467bd", 2.5);
    for (const CriticalValue& cv : values) {
        const std::string cls = cv.kind == CriticalKind::Equilibrium
                                    ? to_string(cv.type)
                                    : "rank-one";
        plot.add_marker(cv.value.c1, cv.value.c2, cls);
    }
    if (loop) {
        std::vector<std::pair<double, double>> pts;
        pts.reserve(loop->samples.size());
        for (const ValuePoint& c : loop->samples) pts.emplace_back(c.c1, c.c2);
        plot.add_path(pts, "#17becf", true);
    }
    return plot.render();
}

// ---- verbs ---------------------------------------------------------------

struct VerbResult {
    json inputs;
    json outputs;
    json diagnostics = json::object();
    std::string system;                 ///< label, "" when not system-bound
    std::optional<std::string> csv;     ///< payload for --csv
    std::optional<std::string> svg;     ///< payload for --svg
};

VerbResult cmd_classify(const ResolvedSystem& rs, const std::string& point_flag,
                        bool all_seeds) {
    VerbResult res;
    res.system = rs.label;
    res.inputs = rs.inputs;

    json reports = json::array();
    if (all_seeds) {
        if (rs.sys.seeds.empty())
            throw UsageError("--all-seeds: system '" + rs.label +
                             "' declares no seeds");
        const EquilibriumSearch found = find_equilibria(rs.sys, rs.sys.seeds);
        for (const State& p : found.points)
            reports.push_back(report_json(classify_equilibrium(rs.sys, p)));
        json dropped = json::array();
        for (const DroppedSeed& d : found.dropped)
            dropped.push_back(json{{"seed", state_json(d.seed)},
                                   {"reason", d.reason}});
        res.diagnostics["dropped_seeds"] = dropped;
        res.inputs["all_seeds"] = true;
    } else {
        if (point_flag.empty())
            throw UsageError("classify needs --point or --all-seeds");
        const std::vector<double> coords =
            parse_reals(point_flag, std::size_t(rs.sys.dim), "--point");
        State x = Eigen::Map<const Eigen::VectorXd>(coords.data(),
                                                    Eigen::Index(coords.size()));
        res.inputs["point"] = state_json(x);
        reports.push_back(report_json(classify_equilibrium(rs.sys, x)));
    }
    res.outputs = json{{"reports", reports}};
    return res;
}

VerbResult cmd_scan(const ResolvedSystem& rs, const std::string& box_flag,
                    int grid, bool want_csv, bool want_svg) {
    if (rs.sys.dim != 4 || rs.sys.extended)
        throw UsageError("scan supports canonical 4-dimensional systems only");
    const Box4 box = parse_box(box_flag.empty() ? "-1.5:1.5" : box_flag);
    if (grid < 2) throw UsageError("--grid must be at least 2");

    VerbResult res;
    res.system = rs.label;
    res.inputs = rs.inputs;
    res.inputs["box"] = json{{"lo", state_json(box.lo)}, {"hi", state_json(box.hi)}};
    res.inputs["grid"] = grid;

    const BifurcationDiagram diagram = scan_bifurcation(rs.sys, box, grid);

    json values = json::array();
    for (const CriticalValue& cv : diagram.values) {
        json row{{"value", value_json(cv.value)},
                 {"kind", cv.kind == CriticalKind::Equilibrium ? "equilibrium"
                                                               : "rank-one"},
                 {"point", state_json(cv.point)}};
        if (cv.kind == CriticalKind::Equilibrium) row["type"] = to_string(cv.type);
        values.push_back(row);
    }
    res.outputs = json{{"critical_values", values}};

    if (want_csv) {
        std::string csv = "c1,c2,type\n";
        for (const CriticalValue& cv : diagram.values) {
            const std::string type = cv.kind == CriticalKind::Equilibrium
                                         ? to_string(cv.type)
                                         : "RankOne";
            csv += csv_double(cv.value.c1) + "," + csv_double(cv.value.c2) +
                   "," + type + "\n";
        }
        res.csv = csv;
    }
    if (want_svg)
        res.svg = diagram_svg("critical values of " + rs.label, diagram.values,
                              nullptr);
    return res;
}

VerbResult cmd_lattice(const ResolvedSystem& rs, const std::string& value_flag,
                       LatticeOptions opts) {
    if (value_flag.empty()) throw UsageError("lattice needs --value c1,c2");
    const std::vector<double> cv = parse_reals(value_flag, 2, "--value");
    const ValuePoint value{cv[0], cv[1]};

    VerbResult res;
    res.system = rs.label;
    res.inputs = rs.inputs;
    res.inputs["value"] = value_json(value);
    res.inputs["ode_tol"] = opts.ode_tol;
    res.inputs["rng_seed"] = opts.rng_seed;

    for (const ValuePoint& crit : equilibrium_values(rs.sys))
        if (value_distance(crit, value) < opts.critical_exclusion)
            throw RegularityError(
                "the requested value lies within the exclusion zone of the "
                "critical value (" + std::to_string(crit.c1) + ", " +
                std::to_string(crit.c2) + ")");

    const State anchor =
        find_fiber_point(rs.sys, value, default_search_seed(rs.sys), opts);
    const PeriodLattice lattice = period_lattice(rs.sys, anchor, opts);

    res.outputs =
        json{{"value", value_json(lattice.value)},
             {"anchor", state_json(lattice.anchor)},
             {"basis", json::array({json::array({lattice.basis[0][0],
                                                 lattice.basis[0][1]}),
                                    json::array({lattice.basis[1][0],
                                                 lattice.basis[1][1]})})},
             {"residuals", json::array({lattice.residuals[0],
                                        lattice.residuals[1]})}};
    return res;
}

VerbResult cmd_monodromy(const ResolvedSystem& rs, const std::string& center_flag,
                         double radius, int samples, LatticeOptions opts,
                         bool want_svg, const std::string& box_flag, int grid) {
    if (center_flag.empty()) throw UsageError("monodromy needs --center c1,c2");
    const std::vector<double> cc = parse_reals(center_flag, 2, "--center");
    if (!(radius > 1e-3))
        throw UsageError("--radius must exceed the continuation exclusion "
                         "zone (1e-3)");
    if (samples < 4) throw UsageError("--samples must be at least 4");

    VerbResult res;
    res.system = rs.label;
    res.inputs = rs.inputs;
    res.inputs["center"] = json::array({cc[0], cc[1]});
    res.inputs["radius"] = radius;
    res.inputs["samples"] = samples;
    res.inputs["ode_tol"] = opts.ode_tol;
    res.inputs["rng_seed"] = opts.rng_seed;

    const LoopPath loop = LoopPath::circle(ValuePoint{cc[0], cc[1]}, radius,
                                           samples);
    MonodromyDiagnostics diag;
    MonodromyMatrix mm;
    try {
        mm = monodromy_around(rs.sys, loop, opts, &diag);
    } catch (const MonodromyError& e) {
        throw MonodromyError(std::string(e.what()) +
                                 "; try raising --samples or tightening --tol",
                             e.residual);
    }

    const bool identity = mm.m == Mat2i::identity();
    const bool unipotent = mm.m.det() == 1 && mm.m.trace() == 2;
    json cycle = nullptr;
    try {
        const auto v = vanishing_cycle(mm);
        cycle = json::array({v[0], v[1]});
    } catch (const AmbiguousCycleError&) {
    } catch (const NotUnipotentError&) {
    }

    res.outputs = json{{"matrix", matrix_json(mm.m)},
                       {"residual", mm.residual},
                       {"trace", mm.m.trace()},
                       {"det", mm.m.det()},
                       {"unipotent", unipotent},
                       {"identity", identity},
                       {"vanishing_cycle", cycle}};
    res.diagnostics = json{
        {"bisections", diag.bisections},
        {"anchor", state_json(diag.start.anchor)},
        {"start_basis",
         json::array({json::array({diag.start.basis[0][0], diag.start.basis[0][1]}),
                      json::array({diag.start.basis[1][0], diag.start.basis[1][1]})})},
        {"final_basis",
         json::array({json::array({diag.finish.basis[0][0], diag.finish.basis[0][1]}),
                      json::array({diag.finish.basis[1][0],
                                   diag.finish.basis[1][1]})})}};

    if (want_svg) {
        std::vector<CriticalValue> values;
        if (rs.sys.dim == 4 && !rs.sys.extended) {
            const BifurcationDiagram diagram = scan_bifurcation(
                rs.sys, parse_box(box_flag.empty() ? "-1.5:1.5" : box_flag),
                grid);
            values = diagram.values;
        } else {
            for (const ValuePoint& v : equilibrium_values(rs.sys)) {
                CriticalValue cv;
                cv.value = v;
                cv.kind = CriticalKind::Equilibrium;
                cv.type = WilliamsonType::Degenerate;
                cv.point = State::Zero(rs.sys.dim);
                values.push_back(cv);
            }
        }
        res.svg = diagram_svg("monodromy loop on " + rs.label, values, &loop);
    }
    return res;
}

VerbResult cmd_model(int pinch_points) {
    if (pinch_points < 1)
        throw UsageError("--pinch-points must be a positive integer");
    VerbResult res;
    res.system = "glued-model";
    res.inputs = json{{"pinch_points", pinch_points}};
    const MonodromyMatrix mm = model_monodromy(pinch_points);
    res.outputs = json{{"matrix", matrix_json(mm.m)},
                       {"residual", mm.residual},
                       {"affine_holonomy",
                        matrix_json(model_affine_holonomy(pinch_points))},
                       {"trace", mm.m.trace()},
                       {"det", mm.m.det()}};
    return res;
}

VerbResult cmd_list_systems() {
    VerbResult res;
    res.inputs = json::object();
    json systems = json::array();
    for (const std::string& name : builtin_names()) {
        const CatalogEntry& entry = catalog_entry(name);
        json row{{"name", name},
                 {"dim", entry.system.dim},
                 {"extended", entry.extended},
                 {"summary", entry.summary}};
        row["s1_index"] =
            entry.system.s1_index ? json(*entry.system.s1_index) : json(nullptr);
        row["F1"] = entry.f1_formula.empty() ? json(nullptr)
                                             : json(entry.f1_formula);
        row["F2"] = entry.f2_formula.empty() ? json(nullptr)
                                             : json(entry.f2_formula);
        json crit = json::array();
        for (const ValuePoint& c : entry.expected_critical_values)
            crit.push_back(value_json(c));
        row["expected_critical_values"] = crit;
        systems.push_back(row);
    }
    res.outputs = json{{"systems", systems}};
    return res;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"monodromy-lab: Williamson classification, period lattices, "
                 "and monodromy of integrable two-degree-of-freedom systems"};
    app.require_subcommand(1);

    SystemSource src;
    std::string json_path, csv_path, svg_path;
    std::string point_flag, value_flag, center_flag, box_flag;
    bool all_seeds = false;
    int grid = 5, samples = 64, pinch_points = 0;
    double radius = 0.0;
    double tol = -1.0;
    std::uint64_t rng_seed = 0;
    bool tol_set = false, rng_set = false;

    const auto add_common = [&](CLI::App* sub, bool needs_system) {
        if (needs_system) {
            sub->add_option("--system", src.builtin, "builtin system name");
            sub->add_option("--file", src.file, "system definition file");
        }
        sub->add_option("--json", json_path, "write the JSON report here");
        sub->add_option("--csv", csv_path, "write CSV output here");
        sub->add_option("--svg", svg_path, "write SVG output here");
        sub->add_option_function<double>(
            "--tol", [&](double v) { tol = v; tol_set = true; },
            "ODE tolerance override");
        sub->add_option_function<std::uint64_t>(
            "--seed-rng", [&](std::uint64_t v) { rng_seed = v; rng_set = true; },
            "seed of the deterministic restart perturbations");
    };

    CLI::App* classify = app.add_subcommand(
        "classify", "Williamson type of an equilibrium");
    add_common(classify, true);
    classify->add_option("--point", point_flag, "phase-space point, comma-separated");
    classify->add_flag("--all-seeds", all_seeds,
                       "classify every equilibrium found from the catalog seeds");

    CLI::App* scan = app.add_subcommand(
        "scan", "critical values of the moment map over a box");
    add_common(scan, true);
    scan->add_option("--box", box_flag, "lo:hi for all axes, or four lo:hi ranges");
    scan->add_option("--grid", grid, "seed-grid resolution per axis");

    CLI::App* lattice = app.add_subcommand(
        "lattice", "period lattice of the torus over a regular value");
    add_common(lattice, true);
    lattice->add_option("--value", value_flag, "regular value c1,c2");

    CLI::App* monodromy = app.add_subcommand(
        "monodromy", "integer monodromy around a loop of regular values");
    add_common(monodromy, true);
    monodromy->add_option("--center", center_flag, "loop center c1,c2");
    monodromy->add_option("--radius", radius, "loop radius");
    monodromy->add_option("--samples", samples, "loop samples");
    monodromy->add_option("--box", box_flag, "bifurcation box for --svg");
    monodromy->add_option("--grid", grid, "scan grid for --svg");

    CLI::App* model = app.add_subcommand(
        "model", "exact monodromy of the glued local model");
    add_common(model, false);
    model->add_option("--pinch-points", pinch_points, "number of pinch points");

    CLI::App* list_systems = app.add_subcommand(
        "list-systems", "catalog of builtin systems");
    add_common(list_systems, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help/version exit 0, usage errors exit 2
    }

    const auto started = std::chrono::steady_clock::now();
    std::string verb;
    VerbResult result;
    try {
        LatticeOptions opts;
        if (tol_set) opts.ode_tol = tol;
        if (rng_set) opts.rng_seed = rng_seed;

        if (classify->parsed()) {
            verb = "classify";
            result = cmd_classify(resolve_system(src), point_flag, all_seeds);
        } else if (scan->parsed()) {
            verb = "scan";
            result = cmd_scan(resolve_system(src), box_flag, grid,
                              !csv_path.empty(), !svg_path.empty());
        } else if (lattice->parsed()) {
            verb = "lattice";
            result = cmd_lattice(resolve_system(src), value_flag, opts);
        } else if (monodromy->parsed()) {
            verb = "monodromy";
            result = cmd_monodromy(resolve_system(src), center_flag, radius,
                                   samples, opts, !svg_path.empty(), box_flag,
                                   grid);
        } else if (model->parsed()) {
            verb = "model";
            result = cmd_model(pinch_points);
        } else {
            verb = "list-systems";
            result = cmd_list_systems();
        }

        if (!csv_path.empty()) {
            if (!result.csv)
                throw UsageError("--csv is not available for '" + verb + "'");
            write_text_file(csv_path, *result.csv, "CSV");
        }
        if (!svg_path.empty()) {
            if (!result.svg)
                throw UsageError("--svg is not available for '" + verb + "'");
            write_text_file(svg_path, *result.svg, "SVG");
        }
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const LookupError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
    const double wall = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - started)
                            .count();

    json report{{"schema", "monodromy-lab-report/1"},
                {"command", verb},
                {"system", result.system.empty() ? json(nullptr)
                                                 : json(result.system)},
                {"inputs", result.inputs},
                {"outputs", result.outputs},
                {"diagnostics", result.diagnostics},
                {"wall_time_s", wall}};
    std::printf("%s\n", report.dump(2).c_str());
    if (!json_path.empty()) {
        try {
            write_text_file(json_path, report.dump(2) + "\n", "JSON");
        } catch (const UsageError& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 2;
        }
    }
    return 0;
}
