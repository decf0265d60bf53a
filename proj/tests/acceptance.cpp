// Acceptance gates of the monodromy toolkit. Each criterion prints exactly
// one line; the process exits nonzero when any gated line fails.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mlab/catalog.h"
#include "mlab/errors.h"
#include "mlab/geom.h"
#include "mlab/lattice.h"
#include "mlab/model.h"
#include "mlab/williamson.h"

using namespace mlab;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

int g_failures = 0;

/// Prints the one-line verdict; empty detail means PASS.
void verdict(int number, const std::string& label, const std::string& failure,
             const std::string& note = "") {
    if (failure.empty()) {
        std::printf("criterion %d (%s): PASS%s\n", number, label.c_str(),
                    note.empty() ? "" : (" [" + note + "]").c_str());
    } else {
        std::printf("criterion %d (%s): FAIL — %s\n", number, label.c_str(),
                    failure.c_str());
        ++g_failures;
    }
}

State state4(double a, double b, double c, double d) {
    State x(4);
    x << a, b, c, d;
    return x;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string mat_str(const Mat2i& m) { return m.str(); }

// Champagne-loop results shared by criteria 2, 3 and 8.
std::optional<MonodromyMatrix> g_loop_matrix;
std::optional<MonodromyDiagnostics> g_loop_diag;

std::string criterion_exact_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    for (int n = 1; n <= 64; ++n) {
        const MonodromyMatrix m = model_monodromy(n);
        if (!(m.m == Mat2i{1, n, 0, 1}))
            return "model(" + std::to_string(n) + ") = " + mat_str(m.m);
        if (m.residual != 0.0)
            return "model(" + std::to_string(n) + ") has nonzero residual";
    }
    const double elapsed = seconds_since(t0);
    if (elapsed >= 1e-3)
        return "n = 1..64 took " + std::to_string(elapsed * 1e3) +
               " ms (budget 1 ms)";
    return "";
}

std::string criterion_champagne_loop(std::string& note) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sys = builtin_system("champagne");
    const auto loop = LoopPath::circle(ValuePoint{0, 0}, 0.05, 64);
    MonodromyDiagnostics diag;
    MonodromyMatrix mm;
    try {
        mm = monodromy_around(sys, loop, LatticeOptions{}, &diag);
    } catch (const Error& e) {
        return std::string("loop transport failed: ") + e.what();
    }
    const double elapsed = seconds_since(t0);
    note = std::to_string(elapsed) + " s";
    g_loop_matrix = mm;
    g_loop_diag = diag;

    if (!(mm.residual < 1e-3))
        return "rounding residual " + std::to_string(mm.residual);
    if (mm.m.det() != 1) return "det = " + std::to_string(mm.m.det());
    if (mm.m.trace() != 2) return "trace = " + std::to_string(mm.m.trace());
    const Mat2i shifted{mm.m.a - 1, mm.m.b, mm.m.c, mm.m.d - 1};
    if (!(shifted * shifted == Mat2i{0, 0, 0, 0}))
        return "(M - I)^2 != 0 for M = " + mat_str(mm.m);
    if (mm.m == Mat2i::identity()) return "matrix is the identity";
    // the nonzero entries of M - I must all be +-1 for single-pinch loops
    for (std::int64_t e : {shifted.a, shifted.b, shifted.c, shifted.d})
        if (e != 0 && std::abs(e) != 1)
            return "entry of M - I has magnitude " + std::to_string(std::abs(e));
    // GL(2,Z)-conjugacy with the one-pinch model via its complete invariants:
    // trace 2, unipotent, not identity, and primitive shear (gcd of M - I).
    const std::int64_t divisor =
        std::gcd(std::gcd(std::abs(shifted.a), std::abs(shifted.b)),
                 std::gcd(std::abs(shifted.c), std::abs(shifted.d)));
    if (divisor != 1)
        return "shear gcd " + std::to_string(divisor) + " (model(1) needs 1)";
    if (!(elapsed < 60.0))
        return "loop took " + std::to_string(elapsed) + " s (budget 60 s)";
    return "";
}

std::string criterion_radius_robustness() {
    if (!g_loop_matrix) return "champagne reference matrix unavailable";
    const auto sys = builtin_system("champagne");
    for (double radius : {0.03, 0.08}) {
        MonodromyMatrix mm;
        try {
            mm = monodromy_around(
                sys, LoopPath::circle(ValuePoint{0, 0}, radius, 64));
        } catch (const Error& e) {
            return "radius " + std::to_string(radius) + " failed: " + e.what();
        }
        if (!(mm.m == g_loop_matrix->m))
            return "radius " + std::to_string(radius) + " gave " +
                   mat_str(mm.m) + ", reference " + mat_str(g_loop_matrix->m);
    }
    return "";
}

std::string criterion_contractible_control() {
    const auto sys = builtin_system("champagne");
    MonodromyMatrix mm;
    try {
        mm = monodromy_around(sys,
                              LoopPath::circle(ValuePoint{0.3, 0}, 0.03, 32));
    } catch (const Error& e) {
        return std::string("contractible loop failed: ") + e.what();
    }
    if (!(mm.m == Mat2i::identity()))
        return "expected the identity, got " + mat_str(mm.m);
    return "";
}

std::string criterion_classification_suite() {
    const struct {
        const char* name;
        WilliamsonType type;
    } cases[] = {
        {"linear-focus", WilliamsonType::FocusFocus},
        {"linear-elliptic", WilliamsonType::EllipticElliptic},
        {"linear-hyperbolic", WilliamsonType::HyperbolicHyperbolic},
        {"linear-elliptic-hyperbolic", WilliamsonType::EllipticHyperbolic},
    };
    for (const auto& c : cases) {
        const auto rep =
            classify_equilibrium(builtin_system(c.name), state4(0, 0, 0, 0));
        if (rep.type != c.type)
            return std::string(c.name) + " classified as " + to_string(rep.type);
    }

    const auto rep =
        classify_equilibrium(builtin_system("champagne"), state4(0, 0, 0, 0));
    if (rep.type != WilliamsonType::FocusFocus)
        return "champagne origin classified as " + to_string(rep.type);
    // Analytic eigenvalue oracle: the combination (c1, c2) of the champagne
    // Hessian pencil has spectrum {+-sqrt(2)*c1 +- i*c2} (degree-1
    // homogeneous in the combination), fixed before the numeric build.
    const double c1 = rep.combination[0], c2 = rep.combination[1];
    const double a = std::sqrt(2.0) * c1;
    const std::complex<double> want[4] = {{a, c2}, {a, -c2}, {-a, c2}, {-a, -c2}};
    bool used[4] = {false, false, false, false};
    for (const auto& w : want) {
        bool matched = false;
        for (int i = 0; i < 4 && !matched; ++i) {
            if (!used[i] && std::abs(rep.eigenvalues[i] - w) < 1e-8) {
                used[i] = true;
                matched = true;
            }
        }
        if (!matched)
            return "champagne eigenvalue " + std::to_string(w.real()) + "+" +
                   std::to_string(w.imag()) + "i missing from the report";
    }
    return "";
}

std::string criterion_conservation_commutation() {
    // Bounded systems tolerate long flows; the expansive normal forms grow
    // like e^t so their draw window stays small to keep drifts meaningful.
    const struct {
        const char* name;
        double max_time;
    } pool[] = {
        {"oscillators", 50.0},     {"linear-elliptic", 50.0},
        {"champagne", 50.0},       {"linear-focus", 4.0},
        {"linear-hyperbolic", 4.0}, {"linear-elliptic-hyperbolic", 4.0},
    };
    std::mt19937 rng(2026);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    std::uniform_int_distribution<int> pick(0, 5);
    double worst_drift = 0, worst_swap = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto& entry = pool[pick(rng)];
        const auto sys = builtin_system(entry.name);
        const State x = state4(coord(rng), coord(rng), coord(rng), coord(rng));
        std::uniform_real_distribution<double> time(-entry.max_time,
                                                    entry.max_time);
        const double t1 = time(rng), t2 = time(rng);
        try {
            const Eigen::Vector2d f0 = moment_map(sys, x);
            const State joint = flow_joint(sys, x, t1, t2);
            const Eigen::Vector2d f1 = moment_map(sys, joint);
            worst_drift = std::max(worst_drift,
                                   (f1 - f0).cwiseAbs().maxCoeff());

            const State ab = flow_joint(sys, flow_joint(sys, x, t1, 0.0), 0.0, t2);
            const State ba = flow_joint(sys, flow_joint(sys, x, 0.0, t2), t1, 0.0);
            worst_swap = std::max(worst_swap, (ab - ba).norm());
        } catch (const Error& e) {
            return "trial " + std::to_string(trial) + " (" + entry.name +
                   ") failed: " + e.what();
        }
    }
    if (!(worst_drift <= 1e-7))
        return "worst conservation drift " + std::to_string(worst_drift);
    if (!(worst_swap <= 1e-7))
        return "worst flow-order disagreement " + std::to_string(worst_swap);
    return "";
}

std::string criterion_lattice_exactness() {
    const auto osc = builtin_system("oscillators");
    PeriodLattice lat;
    try {
        lat = period_lattice(osc, state4(1, 0, 1, 0));
    } catch (const Error& e) {
        return std::string("oscillator lattice failed: ") + e.what();
    }
    if ((lat.basis[0] - Eigen::Vector2d(kTwoPi, 0)).norm() > 1e-8 ||
        (lat.basis[1] - Eigen::Vector2d(0, kTwoPi)).norm() > 1e-8)
        return "oscillator basis {(" + std::to_string(lat.basis[0][0]) + ", " +
               std::to_string(lat.basis[0][1]) + "), (" +
               std::to_string(lat.basis[1][0]) + ", " +
               std::to_string(lat.basis[1][1]) + ")}";

    // full champagne loop: the circle vector must survive bit for bit
    const auto sys = builtin_system("champagne");
    const auto loop = LoopPath::circle(ValuePoint{0, 0}, 0.05, 64);
    try {
        const State anchor = find_fiber_point(sys, loop.samples.front(),
                                              state4(1, 0, 0, 0));
        const PeriodLattice start = period_lattice(sys, anchor);
        if (start.basis[1].x() != 0.0 || start.basis[1].y() != kTwoPi)
            return "champagne circle vector is not exactly (0, 2*pi)";
        const TransportResult res = transport_lattice(sys, loop.samples, start);
        for (std::size_t i = 0; i < res.lattices.size(); ++i) {
            const auto& v = res.lattices[i].basis[1];
            if (v.x() != start.basis[1].x() || v.y() != start.basis[1].y())
                return "circle vector drifted at loop sample " +
                       std::to_string(i);
        }
    } catch (const Error& e) {
        return std::string("champagne transport failed: ") + e.what();
    }
    return "";
}

std::string criterion_pinch_count() {
    if (!g_loop_matrix) return "champagne reference matrix unavailable";
    int pinches = 0;
    try {
        pinches = count_pinch_points(
            builtin_system("champagne"), ValuePoint{0, 0},
            Box4{Eigen::Vector4d::Constant(-1.2), Eigen::Vector4d::Constant(1.2)});
    } catch (const Error& e) {
        return std::string("pinch count failed: ") + e.what();
    }
    if (pinches != 1) return "count_pinch_points = " + std::to_string(pinches);
    const Mat2i m = g_loop_matrix->m;
    const Mat2i shifted{m.a - 1, m.b, m.c, m.d - 1};
    const std::int64_t n =
        std::gcd(std::gcd(std::abs(shifted.a), std::abs(shifted.b)),
                 std::gcd(std::abs(shifted.c), std::abs(shifted.d)));
    if (n != pinches)
        return "loop shear " + std::to_string(n) + " != pinch count " +
               std::to_string(pinches);
    return "";
}

std::string criterion_parser_suite() {
    // one: every canonical catalog formula re-parsed from the config format
    // reproduces the hand-coded moment map
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    for (const std::string& name : builtin_names()) {
        const CatalogEntry& entry = catalog_entry(name);
        if (entry.extended) continue;  // no closed-form config for embeddings
        const std::string config = "[system]\nname = " + name + "-config\nF1 = " +
                                   entry.f1_formula + "\nF2 = " +
                                   entry.f2_formula + "\n";
        SystemDescriptor parsed;
        try {
            parsed = parse_system(config);
        } catch (const Error& e) {
            return name + " config failed to parse: " + e.what();
        }
        for (int k = 0; k < 100; ++k) {
            const State x =
                state4(coord(rng), coord(rng), coord(rng), coord(rng));
            const Eigen::Vector2d diff =
                parsed.evaluate(x) - entry.system.evaluate(x);
            if (diff.cwiseAbs().maxCoeff() > 1e-12)
                return name + " config deviates by " +
                       std::to_string(diff.cwiseAbs().maxCoeff());
        }
    }

    // two: twenty malformed definitions all fail with a source position
    const char* malformed[20] = {
        "",
        "F1 = x1\n",
        "[system]\n",
        "[system]\nname = a\nF1 = x1\n",
        "[system]\nname = a\n[system]\nF1 = x1\nF2 = y1\n",
        "[system]\nname = a\nF1 = x1\nF1 = y1\nF2 = y1\n",
        "[other]\nname = a\n",
        "[system]\nname = a\nfoo = 1\nF1 = x1\nF2 = y1\n",
        "[system]\nname = a\ns1_index = 3\nF1 = x1\nF2 = y1\n",
        "[system]\nname = a\nseed = 1,2,3\nF1 = x1\nF2 = y1\n",
        "[system]\nname = a\nF1 = x1 +\nF2 = y1\n",
        "[system]\nname = a\nF1 = (x1\nF2 = y1\n",
        "[system]\nname = a\nF1 = x1 x2\nF2 = y1\n",
        "[system]\nname = a\nF1 = sin x1\nF2 = y1\n",
        "[system]\nname = a\nF1 = sin(x1, y1)\nF2 = y1\n",
        "[system]\nname = a\nF1 = 1..2\nF2 = y1\n",
        "[system]\nname = a\nF1 = w + 1\nF2 = y1\n",
        "[system]\nname = a\nF1 = x1^y1\nF2 = y1\n",
        "[system]\nname = a\nF1 x1\nF2 = y1\n",
        "[system]\nname = a\nF1 = 1e999\nF2 = y1\n",
    };
    for (int i = 0; i < 20; ++i) {
        try {
            parse_system(malformed[i]);
            return "malformed input " + std::to_string(i) + " was accepted";
        } catch (const ParseError& e) {
            if (e.line < 1 || e.column < 1)
                return "malformed input " + std::to_string(i) +
                       " lacks a source position";
        } catch (const Error& e) {
            return "malformed input " + std::to_string(i) +
                   " raised an unpositioned error: " + e.what();
        }
    }
    return "";
}

std::string pendulum_classification() {
    const auto sys = builtin_system("spherical-pendulum");
    State bottom(6), top(6);
    bottom << 0, 0, -1, 0, 0, 0;
    top << 0, 0, 1, 0, 0, 0;
    try {
        const auto b = classify_equilibrium(sys, bottom);
        if (b.type != WilliamsonType::EllipticElliptic)
            return "bottom classified as " + to_string(b.type);
        const auto t = classify_equilibrium(sys, top);
        if (t.type != WilliamsonType::FocusFocus)
            return "top classified as " + to_string(t.type);
    } catch (const Error& e) {
        return std::string("classification failed: ") + e.what();
    }
    return "";
}

std::string run_guarded(std::string (*fn)()) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return std::string("unexpected exception: ") + e.what();
    }
}

}  // namespace

int main() {
    verdict(1, "exact holonomy oracle", run_guarded(criterion_exact_oracle));

    std::string note;
    std::string fail;
    try {
        fail = criterion_champagne_loop(note);
    } catch (const std::exception& e) {
        fail = std::string("unexpected exception: ") + e.what();
    }
    verdict(2, "champagne-bottle monodromy", fail, note);

    verdict(3, "radius robustness", run_guarded(criterion_radius_robustness));
    verdict(4, "contractible-loop control",
            run_guarded(criterion_contractible_control));
    verdict(5, "classification suite",
            run_guarded(criterion_classification_suite));
    verdict(6, "conservation and commutation",
            run_guarded(criterion_conservation_commutation));
    verdict(7, "lattice exactness", run_guarded(criterion_lattice_exactness));
    verdict(8, "pinch-count consistency", run_guarded(criterion_pinch_count));
    verdict(9, "parser suite", run_guarded(criterion_parser_suite));
    verdict(10, "spherical-pendulum classification",
            run_guarded(pendulum_classification));

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
