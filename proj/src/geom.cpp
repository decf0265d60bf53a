#include "mlab/geom.h"

#include <cmath>
#include <limits>

#include "mlab/errors.h"
#include "mlab/ode.h"

namespace mlab {

namespace {

std::vector<double> to_std(const State& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

/// Step size for central differences: eps^(1/3) scaled by the coordinate.
double fd_step(double xi) {
    static const double h0 =
        std::cbrt(std::numeric_limits<double>::epsilon());
    return h0 * std::max(1.0, std::abs(xi));
}

void require_canonical(const SystemDescriptor& sys, const char* what) {
    if (sys.dim != 4 || sys.extended)
        throw Error(std::string(what) +
                    " requires a canonical 4-dimensional system, got '" +
                    sys.name + "' with dim " + std::to_string(sys.dim));
}

}  // namespace

Eigen::Matrix4d symplectic_matrix() {
    Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
    J(0, 1) = 1;  J(1, 0) = -1;
    J(2, 3) = 1;  J(3, 2) = -1;
    return J;
}

Eigen::Vector2d moment_map(const SystemDescriptor& sys, const State& x) {
    Eigen::Vector2d v = sys.evaluate(x);
    if (!v.allFinite())
        throw EvaluationError("moment map '" + sys.name +
                              "' evaluated to a non-finite value", to_std(x));
    return v;
}

ValuePoint moment_value(const SystemDescriptor& sys, const State& x) {
    const Eigen::Vector2d v = moment_map(sys, x);
    return ValuePoint{v[0], v[1]};
}

Eigen::VectorXd gradient(const SystemDescriptor& sys, int component, const State& x) {
    if (component != 1 && component != 2)
        throw Error("component index must be 1 or 2");
    if (sys.gradient) return sys.gradient(component, x);
    // central differences of the moment map component
    Eigen::VectorXd g(x.size());
    State xp = x, xm = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = fd_step(x[i]);
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        const double fp = moment_map(sys, xp)[component - 1];
        const double fm = moment_map(sys, xm)[component - 1];
        g[i] = (fp - fm) / (2.0 * h);
        xp[i] = x[i];
        xm[i] = x[i];
    }
    return g;
}

Eigen::VectorXd combined_field(const SystemDescriptor& sys, double c1, double c2,
                               const State& x) {
    if (sys.vector_field) return sys.vector_field(c1, c2, x);
    require_canonical(sys, "the canonical vector-field rule");
    const Eigen::VectorXd g = c1 * gradient(sys, 1, x) + c2 * gradient(sys, 2, x);
    // X = (dF/dy1, -dF/dx1, dF/dy2, -dF/dx2) in (x1, y1, x2, y2) order
    Eigen::VectorXd v(4);
    v[0] = g[1];
    v[1] = -g[0];
    v[2] = g[3];
    v[3] = -g[2];
    return v;
}

Eigen::VectorXd ham_vector_field(const SystemDescriptor& sys, int component,
                                 const State& x) {
    if (component != 1 && component != 2)
        throw Error("component index must be 1 or 2");
    return combined_field(sys, component == 1 ? 1.0 : 0.0,
                          component == 2 ? 1.0 : 0.0, x);
}

State flow_joint(const SystemDescriptor& sys, const State& x, double t1,
                 double t2, double tol) {
    if (t1 == 0.0 && t2 == 0.0) return x;
    const Eigen::Vector2d f_start = moment_map(sys, x);

    OdeField field = [&sys, t1, t2](const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        dy = combined_field(sys, t1, t2, y);
    };
    OdeOptions opts;
    // Scale the internal tolerance down with the flow duration so the
    // accumulated global error stays well below the requested tolerance.
    const double span = std::abs(t1) + std::abs(t2);
    const double internal = std::max(tol / (10.0 * (1.0 + span)), 1e-14);
    opts.abs_tol = opts.rel_tol = internal;

    OdeProjector proj;
    const OdeProjector* proj_ptr = nullptr;
    if (sys.project) {
        proj = [&sys](Eigen::VectorXd& y) { sys.project(y); };
        proj_ptr = &proj;
    }
    State end = integrate_to(field, x, 1.0, opts, proj_ptr);

    // conservation is monitored, not assumed
    const Eigen::Vector2d f_end = moment_map(sys, end);
    const double drift = (f_end - f_start).cwiseAbs().maxCoeff();
    const double bound = 10.0 * tol * (1.0 + span) *
                         std::max(1.0, f_start.cwiseAbs().maxCoeff());
    if (drift > bound)
        throw IntegrationError("moment map drifted by " + std::to_string(drift) +
                               " during the joint flow (bound " +
                               std::to_string(bound) + ")", to_std(end), 1.0);
    return end;
}

std::vector<State> flow_path(const SystemDescriptor& sys, const State& x,
                             double c1, double c2,
                             const std::vector<double>& times, double tol) {
    OdeField field = [&sys, c1, c2](const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        dy = combined_field(sys, c1, c2, y);
    };
    OdeOptions opts;
    opts.abs_tol = opts.rel_tol = tol;
    OdeProjector proj;
    const OdeProjector* proj_ptr = nullptr;
    if (sys.project) {
        proj = [&sys](Eigen::VectorXd& y) { sys.project(y); };
        proj_ptr = &proj;
    }
    std::vector<State> out(times.size());
    integrate_samples(field, x, times,
                      [&out](std::size_t i, const Eigen::VectorXd& y) { out[i] = y; },
                      opts, proj_ptr);
    return out;
}

std::pair<Eigen::Matrix4d, Eigen::Matrix4d> hessians_at(const SystemDescriptor& sys,
                                                        const State& x) {
    require_canonical(sys, "hessians_at");
    Eigen::Matrix4d h1, h2;
    State xp = x, xm = x;
    for (int j = 0; j < 4; ++j) {
        const double h = fd_step(x[j]);
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        const Eigen::VectorXd g1p = gradient(sys, 1, xp), g1m = gradient(sys, 1, xm);
        const Eigen::VectorXd g2p = gradient(sys, 2, xp), g2m = gradient(sys, 2, xm);
        h1.col(j) = (g1p - g1m) / (2.0 * h);
        h2.col(j) = (g2p - g2m) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    h1 = 0.5 * (h1 + h1.transpose()).eval();
    h2 = 0.5 * (h2 + h2.transpose()).eval();
    return {h1, h2};
}

double equilibrium_residual(const SystemDescriptor& sys, const State& x) {
    if (sys.extended) {
        const Eigen::VectorXd f1 = combined_field(sys, 1, 0, x);
        const Eigen::VectorXd f2 = combined_field(sys, 0, 1, x);
        return std::sqrt(f1.squaredNorm() + f2.squaredNorm());
    }
    const Eigen::VectorXd g1 = gradient(sys, 1, x);
    const Eigen::VectorXd g2 = gradient(sys, 2, x);
    return std::sqrt(g1.squaredNorm() + g2.squaredNorm());
}

}  // namespace mlab
