#pragma once

#include <Eigen/Core>
#include <functional>

namespace mlab {

/// Right-hand side of an autonomous ODE y' = f(y).
using OdeField = std::function<void(const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;

/// Optional hook applied to the state after every accepted step.
using OdeProjector = std::function<void(Eigen::VectorXd&)>;

struct OdeOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double max_step = 0.0;       ///< 0 = unrestricted
    long max_steps = 4000000;    ///< hard cap on accepted+rejected steps
};

/// Integrates y' = f(y) from y0 over [0, t_end] (t_end may be negative)
/// with an embedded Dormand-Prince 5(4) pair and adaptive step control.
/// Throws IntegrationError (carrying the last good state) on step-size
/// underflow or step-count exhaustion.
Eigen::VectorXd integrate_to(const OdeField& f, const Eigen::VectorXd& y0,
                             double t_end, const OdeOptions& opts,
                             const OdeProjector* projector = nullptr);

/// Same integration, but invokes `on_sample(i, y(times[i]))` at each of the
/// strictly increasing positive times in `times` (steps are clamped so each
/// sample lands exactly).
void integrate_samples(const OdeField& f, const Eigen::VectorXd& y0,
                       const std::vector<double>& times,
                       const std::function<void(std::size_t, const Eigen::VectorXd&)>& on_sample,
                       const OdeOptions& opts,
                       const OdeProjector* projector = nullptr);

}  // namespace mlab
