#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

fs::path work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("mlab-cli-" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

/// Runs the CLI with the given argument string, capturing exit code and both
/// streams. The binary path is injected by the build system.
RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path out = work_dir() / ("out" + std::to_string(counter) + ".txt");
    const fs::path err = work_dir() / ("err" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string cmd = std::string(MLAB_CLI_PATH) + " " + args + " > " +
                            out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    RunResult res;
    res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    res.out = slurp(out);
    res.err = slurp(err);
    return res;
}

json parse_report(const RunResult& res) {
    REQUIRE(res.code == 0);
    const json report = json::parse(res.out);
    CHECK(report.at("schema") == "monodromy-lab-report/1");
    CHECK(report.contains("command"));
    CHECK(report.contains("system"));
    CHECK(report.contains("inputs"));
    CHECK(report.contains("outputs"));
    CHECK(report.contains("diagnostics"));
    CHECK(report.at("wall_time_s").get<double>() >= 0.0);
    return report;
}

/// Minimal XML well-formedness check: balanced, properly nested tags.
/// Quotes inside tags are honored so attribute values cannot confuse it.
bool well_formed_xml(const std::string& text) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    bool seen_element = false;
    while (i < text.size()) {
        if (text[i] != '<') { ++i; continue; }
        if (text.compare(i, 4, "<!--") == 0) {
            const auto end = text.find("-->", i);
            if (end == std::string::npos) return false;
            i = end + 3;
            continue;
        }
        if (text.compare(i, 2, "<?") == 0) {
            const auto end = text.find("?>", i);
            if (end == std::string::npos) return false;
            i = end + 2;
            continue;
        }
        const bool closing = text.compare(i, 2, "</") == 0;
        std::size_t j = i + (closing ? 2 : 1);
        std::string name;
        while (j < text.size() &&
               (std::isalnum((unsigned char)text[j]) || text[j] == '-' ||
                text[j] == '_' || text[j] == ':'))
            name += text[j++];
        if (name.empty()) return false;
        char quote = 0;
        bool self_closing = false;
        while (j < text.size()) {
            const char c = text[j];
            if (quote) {
                if (c == quote) quote = 0;
            } else if (c == '"' || c == '\'') {
                quote = c;
            } else if (c == '>') {
                self_closing = j > 0 && text[j - 1] == '/';
                break;
            }
            ++j;
        }
        if (j >= text.size()) return false;
        if (closing) {
            if (stack.empty() || stack.back() != name) return false;
            stack.pop_back();
        } else if (!self_closing) {
            stack.push_back(name);
        }
        seen_element = true;
        i = j + 1;
    }
    return stack.empty() && seen_element;
}

}  // namespace

TEST_CASE("help succeeds and bad verbs are usage errors") {
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("frobnicate").code == 2);
    CHECK(run_cli("").code == 2);  // a verb is required
}

TEST_CASE("model verb emits the exact shear") {
    const auto res = run_cli("model --pinch-points 4");
    const json report = parse_report(res);
    CHECK(report.at("command") == "model");
    CHECK(report.at("system") == "glued-model");
    CHECK(report.at("outputs").at("matrix") == json({{1, 4}, {0, 1}}));
    CHECK(report.at("outputs").at("affine_holonomy") == json({{1, 4}, {0, 1}}));
    CHECK(report.at("outputs").at("residual") == 0.0);
    CHECK(report.at("outputs").at("trace") == 2);
    CHECK(report.at("outputs").at("det") == 1);
}

TEST_CASE("model rejects a non-positive pinch count") {
    CHECK(run_cli("model --pinch-points 0").code == 2);
    CHECK(run_cli("model").code == 2);
}

TEST_CASE("classify reports Williamson types") {
    SUBCASE("champagne origin is focus-focus") {
        const json report = parse_report(
            run_cli("classify --system champagne --point 0,0,0,0"));
        const json& rep = report.at("outputs").at("reports").at(0);
        CHECK(rep.at("type") == "FocusFocus");
        CHECK(rep.at("residual").get<double>() < 1e-10);
        CHECK(rep.at("eigenvalues").size() == 4);
    }
    SUBCASE("oscillator origin is elliptic-elliptic") {
        const json report = parse_report(
            run_cli("classify --system oscillators --point 0,0,0,0"));
        CHECK(report.at("outputs").at("reports").at(0).at("type") ==
              "EllipticElliptic");
    }
    SUBCASE("all catalog seeds of champagne collapse to the origin") {
        const json report =
            parse_report(run_cli("classify --system champagne --all-seeds"));
        CHECK(report.at("outputs").at("reports").size() == 1);
        CHECK(report.at("diagnostics").contains("dropped_seeds"));
    }
}

TEST_CASE("classify failures map to the documented exit codes") {
    // a non-equilibrium point is a computation-domain failure
    CHECK(run_cli("classify --system champagne --point 1,1,1,1").code == 3);
    // wrong arity and unknown systems are usage failures
    CHECK(run_cli("classify --system champagne --point 1,1,1").code == 2);
    CHECK(run_cli("classify --system nope --point 0,0,0,0").code == 2);
    CHECK(run_cli("classify --system champagne").code == 2);
    // --system and --file are mutually exclusive
    CHECK(run_cli("classify --system champagne --file x.cfg --point 0,0,0,0")
              .code == 2);
}

TEST_CASE("monodromy around the champagne pinch point") {
    const fs::path svg = work_dir() / "loop.svg";
    const fs::path jsn = work_dir() / "loop.json";
    const auto res = run_cli(
        "monodromy --system champagne --center 0,0 --radius 0.05 --samples 64 "
        "--svg " + svg.string() + " --json " + jsn.string());
    const json report = parse_report(res);
    CHECK(report.at("command") == "monodromy");
    CHECK(report.at("outputs").at("matrix") == json({{1, 1}, {0, 1}}));
    CHECK(report.at("outputs").at("trace") == 2);
    CHECK(report.at("outputs").at("det") == 1);
    CHECK(report.at("outputs").at("unipotent") == true);
    CHECK(report.at("outputs").at("identity") == false);
    CHECK(report.at("outputs").at("vanishing_cycle") == json({1, 0}));
    CHECK(report.at("outputs").at("residual").get<double>() < 1e-3);
    CHECK(report.at("diagnostics").contains("bisections"));
    CHECK(report.at("diagnostics").at("start_basis").size() == 2);

    SUBCASE("--json writes the same report to a file") {
        const json file_copy = json::parse(slurp(jsn));
        CHECK(file_copy == report);
    }
    SUBCASE("--svg writes a well-formed standalone picture") {
        const std::string svg_text = slurp(svg);
        CHECK(svg_text.find("<svg") != std::string::npos);
        CHECK(well_formed_xml(svg_text));
    }
}

TEST_CASE("contractible and critical-point-free loops are trivial") {
    SUBCASE("contractible champagne loop") {
        const json report = parse_report(run_cli(
            "monodromy --system champagne --center 0.3,0 --radius 0.03 "
            "--samples 32"));
        CHECK(report.at("outputs").at("matrix") == json({{1, 0}, {0, 1}}));
        CHECK(report.at("outputs").at("identity") == true);
        CHECK(report.at("outputs").at("vanishing_cycle").is_null());
    }
    SUBCASE("oscillator loop") {
        const json report = parse_report(run_cli(
            "monodromy --system oscillators --center 0.5,0.5 --radius 0.1 "
            "--samples 16"));
        CHECK(report.at("outputs").at("identity") == true);
    }
}

TEST_CASE("monodromy input validation") {
    CHECK(run_cli("monodromy --system champagne --center 0,0 --radius 1e-4 "
                  "--samples 64").code == 2);
    CHECK(run_cli("monodromy --system champagne --center 0,0 --radius 0.05 "
                  "--samples 3").code == 2);
    CHECK(run_cli("monodromy --system champagne --radius 0.05").code == 2);
}

TEST_CASE("monodromy output is deterministic") {
    const std::string cmd =
        "monodromy --system champagne --center 0,0 --radius 0.05 --samples 64";
    json a = parse_report(run_cli(cmd));
    json b = parse_report(run_cli(cmd));
    a.erase("wall_time_s");
    b.erase("wall_time_s");
    CHECK(a == b);
}

TEST_CASE("lattice verb reports the period basis") {
    SUBCASE("oscillators carry the square lattice") {
        const json report = parse_report(
            run_cli("lattice --system oscillators --value 0.5,0.5"));
        const json& basis = report.at("outputs").at("basis");
        CHECK(std::abs(basis.at(0).at(0).get<double>() - kTwoPi) < 1e-8);
        CHECK(std::abs(basis.at(0).at(1).get<double>()) < 1e-8);
        CHECK(std::abs(basis.at(1).at(0).get<double>()) < 1e-8);
        CHECK(std::abs(basis.at(1).at(1).get<double>() - kTwoPi) < 1e-8);
        CHECK(report.at("outputs").at("residuals").at(0).get<double>() < 1e-7);
    }
    SUBCASE("the champagne circle vector is exact in the report") {
        const json report = parse_report(
            run_cli("lattice --system champagne --value 0.1,0.02"));
        const json& basis = report.at("outputs").at("basis");
        // JSON round-trips doubles exactly: the circle vector is (0, 2*pi)
        CHECK(basis.at(1).at(0).get<double>() == 0.0);
        CHECK(basis.at(1).at(1).get<double>() == kTwoPi);
    }
    SUBCASE("critical values are refused with exit 3") {
        CHECK(run_cli("lattice --system champagne --value 0,0").code == 3);
    }
    SUBCASE("missing --value is a usage error") {
        CHECK(run_cli("lattice --system champagne").code == 2);
    }
}

TEST_CASE("scan maps the critical-value set") {
    const fs::path csv = work_dir() / "scan.csv";
    const fs::path svg = work_dir() / "scan.svg";
    const auto res = run_cli(
        "scan --system champagne --box -1.2:1.2 --grid 5 --csv " + csv.string() +
        " --svg " + svg.string());
    const json report = parse_report(res);
    const json& values = report.at("outputs").at("critical_values");
    CHECK(values.size() >= 10);
    bool found_ff = false;
    for (const auto& v : values)
        if (v.at("kind") == "equilibrium" && v.at("type") == "FocusFocus")
            found_ff = true;
    CHECK(found_ff);

    SUBCASE("CSV uses the documented header and type column") {
        const std::string text = slurp(csv);
        CHECK(text.rfind("c1,c2,type\n", 0) == 0);
        CHECK(text.find("FocusFocus") != std::string::npos);
        CHECK(text.find("RankOne") != std::string::npos);
    }
    SUBCASE("SVG diagram is well-formed") {
        const std::string text = slurp(svg);
        CHECK(well_formed_xml(text));
        CHECK(text.find("<svg") != std::string::npos);
    }
}

TEST_CASE("scan validates its inputs") {
    CHECK(run_cli("scan --system spherical-pendulum").code == 2);  // extended
    CHECK(run_cli("scan --system champagne --box 1:2:3").code == 2);
    CHECK(run_cli("scan --system champagne --box 2:1").code == 2);
    CHECK(run_cli("scan --system champagne --grid 1").code == 2);
    // scan produces no lattice output, so --csv works but classify's doesn't
    CHECK(run_cli("classify --system champagne --point 0,0,0,0 --csv " +
                  (work_dir() / "no.csv").string()).code == 2);
}

TEST_CASE("scan of the oscillators finds the elliptic origin") {
    const json report =
        parse_report(run_cli("scan --system oscillators --grid 4"));
    bool found = false;
    for (const auto& v : report.at("outputs").at("critical_values"))
        if (v.at("kind") == "equilibrium" &&
            v.at("type") == "EllipticElliptic")
            found = true;
    CHECK(found);
}

TEST_CASE("list-systems covers the whole catalog") {
    const json report = parse_report(run_cli("list-systems"));
    const json& systems = report.at("outputs").at("systems");
    REQUIRE(systems.size() == 7);
    CHECK(systems.at(0).at("name") == "linear-focus");
    CHECK(systems.at(5).at("name") == "champagne");
    CHECK(systems.at(6).at("name") == "spherical-pendulum");
    CHECK(systems.at(5).at("s1_index") == 2);
    CHECK(systems.at(5).at("F1").is_string());
    CHECK(systems.at(6).at("extended") == true);
    CHECK(systems.at(6).at("dim") == 6);
    CHECK(systems.at(6).at("F1").is_null());
    for (const auto& row : systems) {
        CHECK(row.contains("summary"));
        CHECK(row.contains("expected_critical_values"));
    }
}

TEST_CASE("reports satisfy the shipped schema's envelope contract") {
    const json schema = json::parse(slurp(MLAB_SCHEMA_PATH));
    REQUIRE(schema.at("$id") == "monodromy-lab-report/1");
    const json& properties = schema.at("properties");
    const json& required = schema.at("required");

    const std::vector<std::string> runs{
        "model --pinch-points 2",
        "classify --system oscillators --point 0,0,0,0",
        "list-systems",
    };
    for (const auto& args : runs) {
        const json report = parse_report(run_cli(args));
        // every required member is present
        for (const auto& field : required)
            CHECK(report.contains(field.get<std::string>()));
        // additionalProperties is false: every member must be declared
        for (const auto& [key, value] : report.items())
            CHECK(properties.contains(key));
        // the command enum covers the verb that produced the report
        bool known = false;
        for (const auto& verb : properties.at("command").at("enum"))
            if (verb == report.at("command")) known = true;
        CHECK(known);
    }
}

TEST_CASE("config files are accepted and validated") {
    SUBCASE("a valid file classifies like the builtin") {
        const fs::path cfg = work_dir() / "focus.cfg";
        spit(cfg,
             "[system]\n"
             "name = my-focus\n"
             "F1 = x1*y1 + x2*y2\n"
             "F2 = x1*y2 - x2*y1\n"
             "seed = 0, 0, 0, 0\n");
        const json report = parse_report(
            run_cli("classify --file " + cfg.string() + " --point 0,0,0,0"));
        CHECK(report.at("outputs").at("reports").at(0).at("type") ==
              "FocusFocus");
        CHECK(report.at("system") == "my-focus");
    }
    SUBCASE("a broken file is rejected with the offending position") {
        const fs::path cfg = work_dir() / "broken.cfg";
        spit(cfg,
             "[system]\n"
             "name = broken\n"
             "F1 = x1 *\n"
             "F2 = y1\n");
        const auto res = run_cli("classify --file " + cfg.string() +
                                 " --point 0,0,0,0");
        CHECK(res.code == 2);
        CHECK(res.err.find("line 3") != std::string::npos);
    }
    SUBCASE("a missing file is a usage error") {
        CHECK(run_cli("classify --file /nonexistent/x.cfg --point 0,0,0,0")
                  .code == 2);
    }
}
