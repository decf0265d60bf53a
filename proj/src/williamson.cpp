#include "mlab/williamson.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "mlab/errors.h"
#include "mlab/geom.h"
#include "mlab/log.h"

namespace mlab {

namespace {

constexpr double kEquilibriumTol = 1e-10;  ///< convergence target for the defect
constexpr double kClassifyTol = 1e-8;      ///< precondition bound for classification
constexpr double kDedupeTol = 1e-6;        ///< distinct-equilibrium distance
constexpr int kMaxNewton = 60;
constexpr int kDirections = 16;            ///< combination fan c = (cos, sin)(k*pi/17)

/// Stacked equilibrium defect: gradients for canonical systems, component
/// fields for constrained entries (same zero set; the canonical case differs
/// only by an orthogonal recombination, so the Newton geometry is identical).
Eigen::VectorXd defect(const SystemDescriptor& sys, const State& x) {
    Eigen::VectorXd r(2 * x.size());
    if (sys.extended) {
        r << combined_field(sys, 1, 0, x), combined_field(sys, 0, 1, x);
    } else {
        r << gradient(sys, 1, x), gradient(sys, 2, x);
    }
    return r;
}

Eigen::MatrixXd defect_jacobian(const SystemDescriptor& sys, const State& x) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd jac(2 * n, n);
    const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
    State xp = x, xm = x;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double h = h0 * std::max(1.0, std::abs(x[j]));
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        jac.col(j) = (defect(sys, xp) - defect(sys, xm)) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return jac;
}

}  // namespace

std::string to_string(WilliamsonType t) {
    switch (t) {
        case WilliamsonType::EllipticElliptic: return "EllipticElliptic";
        case WilliamsonType::EllipticHyperbolic: return "EllipticHyperbolic";
        case WilliamsonType::HyperbolicHyperbolic: return "HyperbolicHyperbolic";
        case WilliamsonType::FocusFocus: return "FocusFocus";
        case WilliamsonType::Degenerate: return "Degenerate";
    }
    return "?";
}

EquilibriumSearch find_equilibria(const SystemDescriptor& sys,
                                  const std::vector<State>& seeds) {
    EquilibriumSearch out;
    for (const State& seed : seeds) {
        State x = seed;
        bool converged = false;
        std::string reason = "did not converge";
        try {
            for (int it = 0; it < kMaxNewton; ++it) {
                if (sys.project) sys.project(x);
                const Eigen::VectorXd r = defect(sys, x);
                if (r.norm() < kEquilibriumTol) { converged = true; break; }
                const Eigen::MatrixXd jac = defect_jacobian(sys, x);
                const Eigen::VectorXd step =
                    jac.colPivHouseholderQr().solve(-r);
                if (!step.allFinite()) { reason = "singular Newton step"; break; }
                x += step;
                if (x.norm() > 1e6) { reason = "iterates diverged"; break; }
            }
        } catch (const Error& e) {
            reason = e.what();
        }
        if (!converged) {
            out.dropped.push_back({seed, reason});
            continue;
        }
        const bool duplicate = std::any_of(
            out.points.begin(), out.points.end(),
            [&x](const State& p) { return (p - x).norm() < kDedupeTol; });
        if (!duplicate) out.points.push_back(x);
    }
    return out;
}

namespace {

/// Eigenvalue pattern of one combination. Returns Degenerate when the
/// spectrum has (near-)zero or repeated members that no clean pattern admits.
WilliamsonType pattern_of(const std::array<std::complex<double>, 4>& ev) {
    double rho = 0;
    for (const auto& l : ev) rho = std::max(rho, std::abs(l));
    const double tol = 1e-9 * std::max(1.0, rho);

    int n_zero = 0, n_real = 0, n_imag = 0, n_complex = 0;
    for (const auto& l : ev) {
        const bool re0 = std::abs(l.real()) < tol;
        const bool im0 = std::abs(l.imag()) < tol;
        if (re0 && im0) ++n_zero;
        else if (im0) ++n_real;
        else if (re0) ++n_imag;
        else ++n_complex;
    }
    if (n_zero > 0) return WilliamsonType::Degenerate;

    auto matches_multiset = [&](const std::array<std::complex<double>, 4>& want) {
        std::array<bool, 4> used{};
        for (const auto& w : want) {
            bool found = false;
            for (int i = 0; i < 4; ++i) {
                if (!used[i] && std::abs(ev[i] - w) < tol) {
                    used[i] = true;
                    found = true;
                    break;
                }
            }
            if (!found) return false;
        }
        return true;
    };

    if (n_complex == 4) {
        // focus-focus quadruple {a+ib, a-ib, -a+ib, -a-ib}
        std::complex<double> ref{0, 0};
        for (const auto& l : ev)
            if (l.real() > tol && l.imag() > tol) ref = l;
        if (ref == std::complex<double>{0, 0}) return WilliamsonType::Degenerate;
        const double a = ref.real(), b = ref.imag();
        if (matches_multiset({std::complex<double>(a, b), {a, -b}, {-a, b}, {-a, -b}}))
            return WilliamsonType::FocusFocus;
        return WilliamsonType::Degenerate;
    }
    if (n_real == 4) {
        std::array<double, 4> re;
        for (int i = 0; i < 4; ++i) re[i] = ev[i].real();
        std::sort(re.begin(), re.end());
        // want {-b, -a, a, b} with 0 < a < b strictly (a repeated real pair is
        // treated as degenerate so that special focus-focus combinations with
        // a vanishing rotation part cannot masquerade as hyperbolic)
        const double a = re[2], b = re[3];
        if (a > tol && b - a > tol &&
            std::abs(re[0] + b) < tol && std::abs(re[1] + a) < tol)
            return WilliamsonType::HyperbolicHyperbolic;
        return WilliamsonType::Degenerate;
    }
    if (n_imag == 4) {
        std::array<double, 4> im;
        for (int i = 0; i < 4; ++i) im[i] = ev[i].imag();
        std::sort(im.begin(), im.end());
        const double a = im[2], b = im[3];
        if (a > tol && b - a > tol &&
            std::abs(im[0] + b) < tol && std::abs(im[1] + a) < tol)
            return WilliamsonType::EllipticElliptic;
        return WilliamsonType::Degenerate;
    }
    if (n_real == 2 && n_imag == 2) {
        double a = 0, b = 0;
        for (const auto& l : ev) {
            if (std::abs(l.imag()) < tol) a = std::max(a, l.real());
            else b = std::max(b, l.imag());
        }
        if (matches_multiset({std::complex<double>(a, 0), {-a, 0},
                              {0, b}, {0, -b}}))
            return WilliamsonType::EllipticHyperbolic;
    }
    return WilliamsonType::Degenerate;
}

Eigen::Matrix4d combination_matrix(const SystemDescriptor& sys, const State& x,
                                   double c1, double c2) {
    if (sys.linearization) return sys.linearization(c1, c2, x);
    const auto [h1, h2] = hessians_at(sys, x);
    return symplectic_matrix() * (c1 * h1 + c2 * h2);
}

}  // namespace

WilliamsonReport classify_equilibrium(const SystemDescriptor& sys, const State& x) {
    const double res = equilibrium_residual(sys, x);
    if (res > kClassifyTol)
        throw NotEquilibriumError(
            "classification requested at a non-equilibrium point of '" +
                sys.name + "' (defect " + std::to_string(res) + ")",
            res);

    WilliamsonReport report;
    report.point = x;
    report.residual = res;
    report.type = WilliamsonType::Degenerate;

    // Fixed fan of combination directions; k*pi/17 avoids the pure-component
    // axes, where quadratic models are routinely resonant.
    for (int k = 1; k <= kDirections; ++k) {
        const double theta = k * std::numbers::pi / (kDirections + 1);
        const double c1 = std::cos(theta), c2 = std::sin(theta);
        const Eigen::Matrix4d a = combination_matrix(sys, x, c1, c2);
        const Eigen::EigenSolver<Eigen::Matrix4d> solver(a);
        std::array<std::complex<double>, 4> ev;
        for (int i = 0; i < 4; ++i) ev[i] = solver.eigenvalues()[i];

        const WilliamsonType t = pattern_of(ev);
        if (t != WilliamsonType::Degenerate) {
            report.type = t;
            report.eigenvalues = ev;
            report.combination[0] = c1;
            report.combination[1] = c2;
            return report;
        }
        if (k == 1) {
            // remember the first sampled spectrum for degenerate reports
            report.eigenvalues = ev;
            report.combination[0] = c1;
            report.combination[1] = c2;
        }
    }
    log_debug("all sampled combinations degenerate at an equilibrium of '" +
              sys.name + "'");
    return report;
}

}  // namespace mlab
