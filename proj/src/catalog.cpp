#include "mlab/catalog.h"

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <sstream>

#include "mlab/errors.h"
#include "mlab/expr.h"
#include "mlab/geom.h"

namespace mlab {

namespace {

State state4(double a, double b, double c, double d) {
    State s(4);
    s << a, b, c, d;
    return s;
}

State state6(double a, double b, double c, double d, double e, double f) {
    State s(6);
    s << a, b, c, d, e, f;
    return s;
}

// ---- spherical pendulum (unit sphere, ambient R^6) ---------------------------
//
// State (q1, q2, q3, p1, p2, p3) constrained to |q| = 1, q.p = 0, with
// H = |p|^2/2 + q3 and the vertical angular momentum J = q1*p2 - q2*p1.
// The H-field carries the multiplier that keeps the flow on the constraint
// set; the J-field is the rigid rotation about the vertical axis.

Eigen::VectorXd pendulum_field(double c1, double c2, const State& s) {
    const Eigen::Vector3d q = s.head<3>(), p = s.tail<3>();
    const double lambda = q[2] - p.squaredNorm();  // valid on |q| = 1
    Eigen::Vector3d dq = c1 * p + c2 * Eigen::Vector3d(-q[1], q[0], 0.0);
    Eigen::Vector3d dp = c1 * (Eigen::Vector3d(0, 0, -1) + lambda * q) +
                         c2 * Eigen::Vector3d(-p[1], p[0], 0.0);
    Eigen::VectorXd out(6);
    out << dq, dp;
    return out;
}

void pendulum_project(State& s) {
    Eigen::Vector3d q = s.head<3>(), p = s.tail<3>();
    q.normalize();
    p -= (q.dot(p)) * q;
    s << q, p;
}

/// 4x4 tangent reduction of the linearized combined field at an equilibrium:
/// finite-difference Jacobian of the field compressed onto an orthonormal
/// basis of the constraint tangent space.
Eigen::Matrix4d pendulum_linearization(double c1, double c2, const State& s) {
    Eigen::Matrix<double, 6, 6> jac;
    const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
    State xp = s, xm = s;
    for (int j = 0; j < 6; ++j) {
        const double h = h0 * std::max(1.0, std::abs(s[j]));
        xp[j] = s[j] + h;
        xm[j] = s[j] - h;
        jac.col(j) = (pendulum_field(c1, c2, xp) - pendulum_field(c1, c2, xm)) /
                     (2.0 * h);
        xp[j] = s[j];
        xm[j] = s[j];
    }
    // constraint Jacobian rows: d(|q|^2 - 1) and d(q.p)
    const Eigen::Vector3d q = s.head<3>(), p = s.tail<3>();
    Eigen::Matrix<double, 2, 6> dc;
    dc << 2 * q.transpose(), Eigen::RowVector3d::Zero(),
          p.transpose(), q.transpose();
    Eigen::JacobiSVD<Eigen::Matrix<double, 2, 6>> svd(dc, Eigen::ComputeFullV);
    const Eigen::Matrix<double, 6, 4> tangent = svd.matrixV().rightCols<4>();
    return tangent.transpose() * jac * tangent;
}

CatalogEntry make_pendulum() {
    SystemDescriptor sys;
    sys.name = "spherical-pendulum";
    sys.dim = 6;
    sys.extended = true;
    sys.evaluate = [](const State& s) {
        const Eigen::Vector3d q = s.head<3>(), p = s.tail<3>();
        return Eigen::Vector2d(0.5 * p.squaredNorm() + q[2],
                               q[0] * p[1] - q[1] * p[0]);
    };
    sys.gradient = [](int component, const State& s) {
        const Eigen::Vector3d q = s.head<3>(), p = s.tail<3>();
        Eigen::VectorXd g(6);
        if (component == 1)
            g << 0, 0, 1, p[0], p[1], p[2];
        else
            g << p[1], -p[0], 0, -q[1], q[0], 0;
        return g;
    };
    sys.vector_field = pendulum_field;
    sys.project = pendulum_project;
    sys.linearization = pendulum_linearization;
    sys.s1_index = 2;
    sys.seeds = {state6(0, 0, -1, 0, 0, 0), state6(0, 0, 1, 0, 0, 0)};

    CatalogEntry entry;
    entry.system = std::move(sys);
    entry.summary = "pendulum on the unit sphere (embedded, ambient R^6)";
    entry.expected_critical_values = {ValuePoint{-1, 0}, ValuePoint{1, 0}};
    entry.extended = true;
    return entry;
}

// ---- canonical builtins -------------------------------------------------------

struct Formulas {
    const char* f1;
    const char* f2;
};

CatalogEntry make_canonical(const std::string& name, Formulas formulas,
                            std::function<Eigen::Vector2d(const State&)> eval,
                            std::function<Eigen::VectorXd(int, const State&)> grad,
                            std::optional<int> s1, const std::string& summary,
                            std::vector<ValuePoint> critical) {
    SystemDescriptor sys;
    sys.name = name;
    sys.dim = 4;
    sys.evaluate = std::move(eval);
    sys.gradient = std::move(grad);
    sys.s1_index = s1;
    sys.seeds = {state4(0, 0, 0, 0)};

    CatalogEntry entry;
    entry.system = std::move(sys);
    entry.f1_formula = formulas.f1;
    entry.f2_formula = formulas.f2;
    entry.summary = summary;
    entry.expected_critical_values = std::move(critical);
    return entry;
}

std::vector<CatalogEntry> build_catalog() {
    std::vector<CatalogEntry> entries;

    entries.push_back(make_canonical(
        "linear-focus", {"x1*y1 + x2*y2", "x1*y2 - x2*y1"},
        [](const State& s) {
            return Eigen::Vector2d(s[0] * s[1] + s[2] * s[3],
                                   s[0] * s[3] - s[2] * s[1]);
        },
        [](int c, const State& s) {
            Eigen::VectorXd g(4);
            if (c == 1) g << s[1], s[0], s[3], s[2];
            else        g << s[3], -s[2], -s[1], s[0];
            return g;
        },
        2, "focus-focus quadratic model", {ValuePoint{0, 0}}));

    entries.push_back(make_canonical(
        "linear-elliptic", {"x1^2 + y1^2", "x2^2 + y2^2"},
        [](const State& s) {
            return Eigen::Vector2d(s[0] * s[0] + s[1] * s[1],
                                   s[2] * s[2] + s[3] * s[3]);
        },
        [](int c, const State& s) {
            Eigen::VectorXd g(4);
            if (c == 1) g << 2 * s[0], 2 * s[1], 0, 0;
            else        g << 0, 0, 2 * s[2], 2 * s[3];
            return g;
        },
        std::nullopt, "elliptic-elliptic quadratic model", {ValuePoint{0, 0}}));

    entries.push_back(make_canonical(
        "linear-hyperbolic", {"x1*y1", "x2*y2"},
        [](const State& s) {
            return Eigen::Vector2d(s[0] * s[1], s[2] * s[3]);
        },
        [](int c, const State& s) {
            Eigen::VectorXd g(4);
            if (c == 1) g << s[1], s[0], 0, 0;
            else        g << 0, 0, s[3], s[2];
            return g;
        },
        std::nullopt, "hyperbolic-hyperbolic quadratic model", {ValuePoint{0, 0}}));

    entries.push_back(make_canonical(
        "linear-elliptic-hyperbolic", {"x1^2 + y1^2", "x2*y2"},
        [](const State& s) {
            return Eigen::Vector2d(s[0] * s[0] + s[1] * s[1], s[2] * s[3]);
        },
        [](int c, const State& s) {
            Eigen::VectorXd g(4);
            if (c == 1) g << 2 * s[0], 2 * s[1], 0, 0;
            else        g << 0, 0, s[3], s[2];
            return g;
        },
        std::nullopt, "mixed elliptic-hyperbolic quadratic model",
        {ValuePoint{0, 0}}));

    entries.push_back(make_canonical(
        "oscillators", {"(x1^2 + y1^2)/2", "(x2^2 + y2^2)/2"},
        [](const State& s) {
            return Eigen::Vector2d(0.5 * (s[0] * s[0] + s[1] * s[1]),
                                   0.5 * (s[2] * s[2] + s[3] * s[3]));
        },
        [](int c, const State& s) {
            Eigen::VectorXd g(4);
            if (c == 1) g << s[0], s[1], 0, 0;
            else        g << 0, 0, s[2], s[3];
            return g;
        },
        std::nullopt, "two decoupled harmonic oscillators",
        {ValuePoint{0, 0}}));

    entries.push_back(make_canonical(
        "champagne",
        {"(y1^2 + y2^2)/2 - (x1^2 + x2^2) + (x1^2 + x2^2)^2", "x1*y2 - x2*y1"},
        [](const State& s) {
            const double r2 = s[0] * s[0] + s[2] * s[2];
            return Eigen::Vector2d(
                0.5 * (s[1] * s[1] + s[3] * s[3]) - r2 + r2 * r2,
                s[0] * s[3] - s[2] * s[1]);
        },
        [](int c, const State& s) {
            Eigen::VectorXd g(4);
            if (c == 1) {
                const double w = 4.0 * (s[0] * s[0] + s[2] * s[2]) - 2.0;
                g << w * s[0], s[1], w * s[2], s[3];
            } else {
                g << s[3], -s[2], -s[1], s[0];
            }
            return g;
        },
        2, "champagne-bottle potential with rotational symmetry",
        {ValuePoint{0, 0}, ValuePoint{-0.25, 0}}));

    entries.push_back(make_pendulum());
    return entries;
}

const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries = build_catalog();
    return entries;
}

}  // namespace

std::vector<std::string> builtin_names() {
    std::vector<std::string> names;
    for (const auto& e : catalog()) names.push_back(e.system.name);
    return names;
}

const CatalogEntry& catalog_entry(const std::string& name) {
    for (const auto& e : catalog())
        if (e.system.name == name) return e;
    std::string known;
    for (const auto& e : catalog()) known += " " + e.system.name;
    throw LookupError("unknown system '" + name + "'; known systems:" + known);
}

SystemDescriptor builtin_system(const std::string& name) {
    return catalog_entry(name).system;
}

// ---- definition-file parsing --------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Column (1-based) of the first non-blank character of `raw`.
int content_column(const std::string& raw) {
    std::size_t b = raw.find_first_not_of(" \t\r");
    return b == std::string::npos ? 1 : int(b) + 1;
}

std::vector<double> parse_reals(const std::string& text, int line, int column) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ParseError("expected a real number, got '" + item + "'",
                             line, column);
        }
        if (used != item.size())
            throw ParseError("expected a real number, got '" + item + "'",
                             line, column);
        out.push_back(v);
    }
    return out;
}

}  // namespace

SystemDescriptor parse_system(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    bool in_section = false;

    std::string name;
    ExprPtr f1, f2;
    int f1_line = 0, f2_line = 0;
    std::optional<int> s1_index;
    std::vector<State> seeds;
    bool saw_name = false, saw_f1 = false, saw_f2 = false;

    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const int col = content_column(raw);

        if (line[0] == '[') {
            if (line != "[system]")
                throw ParseError("unknown section '" + line + "'", line_no, col);
            if (in_section)
                throw ParseError("duplicate [system] section", line_no, col);
            in_section = true;
            continue;
        }
        if (!in_section)
            throw ParseError("expected a [system] section header", line_no, col);

        const std::size_t eq = raw.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value'", line_no, col);
        const std::string key = trim(raw.substr(0, eq));
        const std::string value = trim(raw.substr(eq + 1));
        const std::size_t voff = raw.find_first_not_of(" \t", eq + 1);
        const int value_col = voff == std::string::npos ? int(eq) + 2 : int(voff) + 1;

        if (key == "name") {
            if (saw_name) throw ParseError("duplicate key 'name'", line_no, col);
            if (value.empty()) throw ParseError("empty system name", line_no, value_col);
            name = value;
            saw_name = true;
        } else if (key == "F1" || key == "F2") {
            const bool first = key == "F1";
            if ((first && saw_f1) || (!first && saw_f2))
                throw ParseError("duplicate key '" + key + "'", line_no, col);
            // column positions inside the expression are relative to the line,
            // so re-parse errors point at the real spot
            std::string padded(value_col - 1, ' ');
            padded += value;
            ExprPtr e = parse_expression(padded, line_no);
            (first ? f1 : f2) = e;
            (first ? f1_line : f2_line) = line_no;
            (first ? saw_f1 : saw_f2) = true;
        } else if (key == "s1_index") {
            if (s1_index) throw ParseError("duplicate key 's1_index'", line_no, col);
            if (value != "1" && value != "2")
                throw ParseError("s1_index must be 1 or 2, got '" + value + "'",
                                 line_no, value_col);
            s1_index = value == "1" ? 1 : 2;
        } else if (key == "seed") {
            const std::vector<double> v = parse_reals(value, line_no, value_col);
            if (v.size() != 4)
                throw ParseError("seed needs 4 comma-separated reals, got " +
                                 std::to_string(v.size()), line_no, value_col);
            seeds.push_back(state4(v[0], v[1], v[2], v[3]));
        } else {
            throw ParseError("unknown key '" + key + "'", line_no, col);
        }
    }

    if (!in_section) throw ParseError("missing [system] section", std::max(line_no, 1), 1);
    if (!saw_name) throw ParseError("missing key 'name'", std::max(line_no, 1), 1);
    if (!saw_f1) throw ParseError("missing key 'F1'", std::max(line_no, 1), 1);
    if (!saw_f2) throw ParseError("missing key 'F2'", std::max(line_no, 1), 1);

    // symbolic gradients; closure of differentiation over the node set is
    // enforced here, so a non-differentiable '^'-exponent fails at parse time
    std::array<ExprPtr, 4> df1, df2;
    for (int v = 0; v < 4; ++v) {
        try {
            df1[v] = f1->derivative(v);
        } catch (const Error& e) {
            throw ParseError(std::string("F1: ") + e.what(), f1_line, 1);
        }
        try {
            df2[v] = f2->derivative(v);
        } catch (const Error& e) {
            throw ParseError(std::string("F2: ") + e.what(), f2_line, 1);
        }
    }

    SystemDescriptor sys;
    sys.name = name;
    sys.dim = 4;
    sys.evaluate = [f1, f2](const State& s) {
        const std::array<double, 4> x{s[0], s[1], s[2], s[3]};
        return Eigen::Vector2d(f1->eval(x), f2->eval(x));
    };
    sys.gradient = [df1, df2](int component, const State& s) {
        const std::array<double, 4> x{s[0], s[1], s[2], s[3]};
        const auto& d = component == 1 ? df1 : df2;
        Eigen::VectorXd g(4);
        for (int v = 0; v < 4; ++v) g[v] = d[v]->eval(x);
        return g;
    };
    sys.s1_index = s1_index;
    sys.seeds = std::move(seeds);
    return sys;
}

}  // namespace mlab
