// Embedded Dormand-Prince 5(4) integrator with PI step-size control.
// Coefficients are the classic DOPRI5 tableau; the 5th-order solution is
// propagated and the 4th-order embedded solution drives the error estimate.

#include "mlab/ode.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlab/errors.h"

namespace mlab {

namespace {

constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b_i - bhat_i: weights of the embedded error estimate
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kMinShrink = 0.2;
constexpr double kMaxGrow = 6.0;
constexpr double kOrderExp = 1.0 / 5.0;   // error control order for DOPRI5
constexpr double kBetaPi = 0.04;          // mild PI stabilization

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

struct Stepper {
    const OdeField& f;
    const OdeOptions& opts;
    const OdeProjector* projector;
    Eigen::VectorXd y, k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, yerr;
    double t = 0.0;
    double dir = 1.0;
    double err_old = 1e-4;
    long steps = 0;
    bool fresh_k1 = false;

    Stepper(const OdeField& f, const Eigen::VectorXd& y0, const OdeOptions& o,
            const OdeProjector* proj)
        : f(f), opts(o), projector(proj), y(y0) {
        const auto n = y0.size();
        k1.resize(n); k2.resize(n); k3.resize(n); k4.resize(n);
        k5.resize(n); k6.resize(n); k7.resize(n);
        ytmp.resize(n); ynew.resize(n); yerr.resize(n);
    }

    double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0,
                      const Eigen::VectorXd& y1) const {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < err.size(); ++i) {
            const double sc = opts.abs_tol +
                opts.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
            const double q = err[i] / sc;
            sum += q * q;
        }
        return std::sqrt(sum / double(err.size()));
    }

    /// Initial step-size heuristic based on the scaled magnitudes of y and f(y).
    double initial_step(double t_span) {
        f(y, k1);
        fresh_k1 = true;
        double dy = 0, df = 0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sc = opts.abs_tol + opts.rel_tol * std::abs(y[i]);
            dy += (y[i] / sc) * (y[i] / sc);
            df += (k1[i] / sc) * (k1[i] / sc);
        }
        dy = std::sqrt(dy); df = std::sqrt(df);
        double h = (dy < 1e-10 || df < 1e-10) ? 1e-6 : 0.01 * dy / df;
        h = std::min(h, std::abs(t_span));
        if (opts.max_step > 0) h = std::min(h, opts.max_step);
        return h;
    }

    void check_finite(const Eigen::VectorXd& v) const {
        if (!v.allFinite())
            throw IntegrationError("integration produced a non-finite state",
                                   to_std(y), t);
    }

    /// One accepted step toward t_target; advances t and y. `h_want` is the
    /// current step-size suggestion and is updated for the next call.
    void step(double t_target, double& h_want) {
        const double remaining = t_target - t;
        double h = dir * std::min(h_want, std::abs(remaining));
        bool clamped = std::abs(h) >= std::abs(remaining) * (1.0 - 1e-14);
        if (clamped) h = remaining;

        for (;;) {
            if (++steps > opts.max_steps)
                throw IntegrationError("integration exceeded the step budget",
                                       to_std(y), t);
            if (std::abs(h) < 16.0 * std::numeric_limits<double>::epsilon() *
                                  std::max(1.0, std::abs(t)))
                throw IntegrationError("integration step size underflow",
                                       to_std(y), t);

            if (!fresh_k1) { f(y, k1); fresh_k1 = true; }
            ytmp = y + h * (a21 * k1);
            f(ytmp, k2);
            ytmp = y + h * (a31 * k1 + a32 * k2);
            f(ytmp, k3);
            ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
            f(ytmp, k4);
            ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            f(ytmp, k5);
            ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            f(ytmp, k6);
            ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            f(ynew, k7);
            yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            const double err = error_norm(yerr, y, ynew);
            if (err <= 1.0) {
                check_finite(ynew);
                t = clamped && h == remaining ? t_target : t + h;
                y = ynew;
                k1 = k7;  // FSAL
                fresh_k1 = true;
                if (projector) {
                    (*projector)(y);
                    fresh_k1 = false;  // projection invalidates the cached slope
                }
                // PI controller: mild damping by the previous error
                double fac = kSafety * std::pow(err > 0 ? err : 1e-16, -kOrderExp) *
                             std::pow(err_old, kBetaPi);
                fac = std::clamp(fac, kMinShrink, kMaxGrow);
                h_want = std::abs(h) * fac;
                if (opts.max_step > 0) h_want = std::min(h_want, opts.max_step);
                err_old = std::max(err, 1e-4);
                return;
            }
            // rejected: shrink and retry
            const double fac = std::max(kMinShrink,
                                        kSafety * std::pow(err, -kOrderExp));
            h *= fac;
            clamped = false;
        }
    }
};

}  // namespace

Eigen::VectorXd integrate_to(const OdeField& f, const Eigen::VectorXd& y0,
                             double t_end, const OdeOptions& opts,
                             const OdeProjector* projector) {
    if (t_end == 0.0) return y0;
    Stepper s(f, y0, opts, projector);
    s.dir = t_end > 0 ? 1.0 : -1.0;
    double h = s.initial_step(t_end);
    while (s.dir * (t_end - s.t) > 0)
        s.step(t_end, h);
    return s.y;
}

void integrate_samples(const OdeField& f, const Eigen::VectorXd& y0,
                       const std::vector<double>& times,
                       const std::function<void(std::size_t, const Eigen::VectorXd&)>& on_sample,
                       const OdeOptions& opts,
                       const OdeProjector* projector) {
    if (times.empty()) return;
    Stepper s(f, y0, opts, projector);
    double h = s.initial_step(times.back());
    for (std::size_t i = 0; i < times.size(); ++i) {
        while (times[i] - s.t > 0)
            s.step(times[i], h);
        on_sample(i, s.y);
    }
}

}  // namespace mlab
