#include "mlab/lattice.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <numeric>
#include <random>

#include "mlab/errors.h"
#include "mlab/geom.h"
#include "mlab/log.h"

namespace mlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFiberTol = 1e-10;       ///< Gauss-Newton target on ||F - c||
constexpr double kRegularityTol = 1e-8;   ///< smallest-singular-value bound
constexpr double kValueDedupe = 1e-5;     ///< critical-value deduplication
constexpr double kPinchValueTol = 1e-6;   ///< image match for pinch counting

Eigen::Vector2d value_vec(const ValuePoint& c) {
    return Eigen::Vector2d(c.c1, c.c2);
}

/// 2 x dim Jacobian of the moment map (gradient rows).
Eigen::MatrixXd moment_jacobian(const SystemDescriptor& sys, const State& x) {
    Eigen::MatrixXd jac(2, x.size());
    jac.row(0) = gradient(sys, 1, x).transpose();
    jac.row(1) = gradient(sys, 2, x).transpose();
    return jac;
}

bool is_regular_point(const SystemDescriptor& sys, const State& x) {
    const Eigen::MatrixXd jac = moment_jacobian(sys, x);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    const auto& sigma = svd.singularValues();
    return sigma[1] > kRegularityTol * std::max(1.0, sigma[0]);
}

/// Frobenius norm of the wedge of the two gradient rows (all 2x2 minors);
/// vanishing wedge means rank dF < 2.
double wedge_norm(const Eigen::MatrixXd& jac) {
    double sum = 0;
    for (Eigen::Index i = 0; i + 1 < jac.cols(); ++i)
        for (Eigen::Index j = i + 1; j < jac.cols(); ++j) {
            const double m = jac(0, i) * jac(1, j) - jac(0, j) * jac(1, i);
            sum += m * m;
        }
    return std::sqrt(sum);
}

}  // namespace

// ---- loops -------------------------------------------------------------------

LoopPath LoopPath::circle(ValuePoint center, double radius, int n_samples) {
    if (n_samples < 4) throw Error("a loop needs at least 4 samples");
    if (radius <= 0) throw Error("loop radius must be positive");
    LoopPath loop;
    loop.samples.reserve(n_samples + 1);
    for (int k = 0; k < n_samples; ++k) {
        const double phi = kTwoPi * k / n_samples;
        loop.samples.push_back(ValuePoint{center.c1 + radius * std::cos(phi),
                                          center.c2 + radius * std::sin(phi)});
    }
    loop.samples.push_back(loop.samples.front());
    return loop;
}

LoopPath LoopPath::reversed() const {
    LoopPath out = *this;
    std::reverse(out.samples.begin(), out.samples.end());
    return out;
}

LoopPath LoopPath::rotated(std::size_t offset) const {
    if (samples.size() < 2) return *this;
    const std::size_t n = samples.size() - 1;  // open length
    LoopPath out;
    out.samples.reserve(samples.size());
    for (std::size_t i = 0; i < n; ++i)
        out.samples.push_back(samples[(i + offset) % n]);
    out.samples.push_back(out.samples.front());
    return out;
}

// ---- fiber location ------------------------------------------------------------

State find_fiber_point(const SystemDescriptor& sys, const ValuePoint& c,
                       const State& seed, const LatticeOptions& opts) {
    std::mt19937_64 rng(opts.rng_seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const Eigen::Vector2d target = value_vec(c);
    double best = std::numeric_limits<double>::infinity();

    for (int attempt = 0; attempt <= opts.max_restarts; ++attempt) {
        State x = seed;
        if (attempt > 0) {
            // deterministic perturbation cloud of slowly growing radius
            const double scale =
                0.05 * attempt * std::max(1.0, seed.norm());
            for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += scale * unit(rng);
        }
        if (sys.project) sys.project(x);

        bool failed = false;
        for (int it = 0; it < 60 && !failed; ++it) {
            Eigen::Vector2d r;
            try {
                r = moment_map(sys, x) - target;
            } catch (const EvaluationError&) {
                failed = true;
                break;
            }
            const double rn = r.norm();
            best = std::min(best, rn);
            if (rn < kFiberTol) return x;

            const Eigen::MatrixXd jac = moment_jacobian(sys, x);
            const Eigen::Matrix2d gram = jac * jac.transpose();
            if (std::abs(gram.determinant()) < 1e-300) { failed = true; break; }
            // minimal-norm Gauss-Newton step for the underdetermined system
            const Eigen::VectorXd full_step = -jac.transpose() * gram.inverse() * r;

            double damping = 1.0;
            bool improved = false;
            for (int half = 0; half < 12; ++half, damping *= 0.5) {
                State trial = x + damping * full_step;
                if (sys.project) sys.project(trial);
                double trial_norm;
                try {
                    trial_norm = (moment_map(sys, trial) - target).norm();
                } catch (const EvaluationError&) {
                    continue;
                }
                if (trial_norm < rn) {
                    x = trial;
                    improved = true;
                    break;
                }
            }
            if (!improved) failed = true;
        }
    }
    throw FiberNotFoundError(
        "no point of the fiber (" + std::to_string(c.c1) + ", " +
            std::to_string(c.c2) + ") of '" + sys.name +
            "' found after " + std::to_string(opts.max_restarts) + " restarts",
        best);
}

// ---- return-time refinement -----------------------------------------------------

namespace {

struct ReturnRefinement {
    Eigen::Vector2d T;
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;
};

/// Damped Gauss-Newton on flow_joint(anchor, T) = anchor over the two return
/// times. The Jacobian columns are the component fields at the endpoint
/// (valid because the component flows commute).
ReturnRefinement refine_return(const SystemDescriptor& sys, const State& anchor,
                               const Eigen::Vector2d& start,
                               const LatticeOptions& opts) {
    ReturnRefinement out;
    out.T = start;
    const double scale = std::max(1.0, anchor.norm());

    Eigen::Vector2d T = start;
    double rn = std::numeric_limits<double>::infinity();
    State end;
    try {
        end = flow_joint(sys, anchor, T[0], T[1], opts.ode_tol);
        rn = (end - anchor).norm();
    } catch (const Error&) {
        return out;
    }

    for (int it = 0; it < opts.max_newton; ++it) {
        if (rn < opts.refine_target * scale) break;
        Eigen::MatrixXd jac(anchor.size(), 2);
        jac.col(0) = combined_field(sys, 1, 0, end);
        jac.col(1) = combined_field(sys, 0, 1, end);
        const Eigen::VectorXd r = end - anchor;
        const Eigen::Vector2d step =
            (jac.transpose() * jac).ldlt().solve(-jac.transpose() * r);
        if (!step.allFinite()) break;

        double damping = 1.0;
        bool improved = false;
        for (int half = 0; half < 10; ++half, damping *= 0.5) {
            const Eigen::Vector2d trial = T + damping * step;
            try {
                const State trial_end =
                    flow_joint(sys, anchor, trial[0], trial[1], opts.ode_tol);
                const double trial_norm = (trial_end - anchor).norm();
                if (trial_norm < rn) {
                    T = trial;
                    end = trial_end;
                    rn = trial_norm;
                    improved = true;
                    break;
                }
            } catch (const Error&) {
                // steps that fly off the torus are just rejected
            }
        }
        if (!improved) break;
    }

    out.T = T;
    out.residual = rn;
    out.converged = rn < opts.accept_residual * scale;
    return out;
}

/// Wraps an angle-like return-time component into (-pi, pi] by multiples of
/// 2*pi (i.e. reduction by the circle-action basis vector).
double wrap_angle(double a) {
    double w = std::remainder(a, kTwoPi);
    if (w <= -std::numbers::pi) w += kTwoPi;
    return w;
}

struct Candidate {
    double dist;
    Eigen::Vector2d T;
};

/// Coarse candidates for the non-circle return of a system with a declared
/// circle action: one trajectory of the complementary field sampled against
/// one sampled circle orbit (the flows commute, so a close pair yields a
/// joint return candidate).
std::vector<Candidate> s1_candidates(const SystemDescriptor& sys, const State& x,
                                     int s1, const LatticeOptions& opts,
                                     double& diameter) {
    const int oi = s1 == 2 ? 0 : 1;  // slot of the non-circle time

    std::vector<double> t_grid;
    for (double t = opts.coarse_step; t <= opts.horizon + 1e-12;
         t += opts.coarse_step)
        t_grid.push_back(t);

    std::vector<double> s_grid(opts.s1_samples);
    for (int k = 0; k < opts.s1_samples; ++k)
        s_grid[k] = kTwoPi * k / opts.s1_samples;
    s_grid.erase(s_grid.begin());  // skip s = 0 (it is the start point)

    const double c1 = oi == 0 ? 1.0 : 0.0;
    const double c2 = oi == 0 ? 0.0 : 1.0;
    const std::vector<State> traj =
        flow_path(sys, x, c1, c2, t_grid, opts.search_ode_tol);
    std::vector<State> orbit =
        flow_path(sys, x, 1.0 - c1, 1.0 - c2, s_grid, opts.search_ode_tol);
    orbit.insert(orbit.begin(), x);  // s = 0
    s_grid.insert(s_grid.begin(), 0.0);

    diameter = 0;
    for (const State& p : traj) diameter = std::max(diameter, (p - x).norm());
    for (const State& q : orbit) diameter = std::max(diameter, (q - x).norm());
    const double threshold =
        opts.candidate_fraction * std::max(diameter, 1e-6);

    // flow_joint(x, T) = x with T[si] = theta requires the trajectory point
    // to meet the circle orbit at parameter -theta (mod 2*pi)
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        double bd = std::numeric_limits<double>::infinity();
        double btheta = 0;
        for (std::size_t k = 0; k < orbit.size(); ++k) {
            const double d = (traj[i] - orbit[k]).norm();
            if (d < bd) {
                bd = d;
                btheta = s_grid[k] == 0.0 ? 0.0 : kTwoPi - s_grid[k];
            }
        }
        if (bd < threshold) {
            Eigen::Vector2d T = Eigen::Vector2d::Zero();
            T[oi] = t_grid[i];
            T[1 - oi] = btheta;
            cands.push_back({bd, T});
        }
    }
    return cands;
}

/// Coarse candidates with no circle action: full two-dimensional grid scan.
std::vector<Candidate> generic_candidates(const SystemDescriptor& sys,
                                          const State& x,
                                          const LatticeOptions& opts,
                                          double& diameter) {
    std::vector<double> grid;
    for (double t = opts.coarse_step; t <= opts.horizon + 1e-12;
         t += opts.coarse_step)
        grid.push_back(t);

    const std::vector<State> traj1 =
        flow_path(sys, x, 1, 0, grid, opts.search_ode_tol);

    diameter = 0;
    for (const State& p : traj1) diameter = std::max(diameter, (p - x).norm());

    // distances of the pure second-component flow, to finish the diameter
    // estimate before thresholding
    std::vector<std::vector<double>> dist(traj1.size() + 1);
    {
        const std::vector<State> traj2 =
            flow_path(sys, x, 0, 1, grid, opts.search_ode_tol);
        dist[0].resize(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) {
            dist[0][j] = (traj2[j] - x).norm();
            diameter = std::max(diameter, dist[0][j]);
        }
    }
    for (std::size_t i = 0; i < traj1.size(); ++i) {
        const std::vector<State> row =
            flow_path(sys, traj1[i], 0, 1, grid, opts.search_ode_tol);
        dist[i + 1].resize(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) {
            dist[i + 1][j] = (row[j] - x).norm();
            diameter = std::max(diameter, dist[i + 1][j]);
        }
    }

    const double threshold =
        opts.candidate_fraction * std::max(diameter, 1e-6);
    std::vector<Candidate> cands;
    // i = 0 row: pure second-component returns; i >= 1: joint returns
    for (std::size_t j = 0; j < grid.size(); ++j)
        if (dist[0][j] < threshold)
            cands.push_back({dist[0][j], Eigen::Vector2d(0.0, grid[j])});
    for (std::size_t i = 0; i < traj1.size(); ++i) {
        // pure first-component return
        const double d0 = (traj1[i] - x).norm();
        if (d0 < threshold)
            cands.push_back({d0, Eigen::Vector2d(grid[i], 0.0)});
        for (std::size_t j = 0; j < grid.size(); ++j)
            if (dist[i + 1][j] < threshold)
                cands.push_back({dist[i + 1][j],
                                 Eigen::Vector2d(grid[i], grid[j])});
    }
    return cands;
}

std::vector<Eigen::Vector2d> refine_candidates(const SystemDescriptor& sys,
                                               const State& x,
                                               std::vector<Candidate> cands,
                                               const LatticeOptions& opts,
                                               std::size_t max_refine) {
    std::sort(cands.begin(), cands.end(),
              [](const Candidate& a, const Candidate& b) { return a.dist < b.dist; });
    std::vector<Eigen::Vector2d> refined;
    std::vector<Eigen::Vector2d> attempted;
    for (const Candidate& cand : cands) {
        if (refined.size() >= max_refine) break;
        const bool near_attempted = std::any_of(
            attempted.begin(), attempted.end(), [&](const Eigen::Vector2d& t) {
                return (t - cand.T).norm() < 2.0 * opts.coarse_step;
            });
        if (near_attempted) continue;
        attempted.push_back(cand.T);
        const ReturnRefinement r = refine_return(sys, x, cand.T, opts);
        if (!r.converged) continue;
        const bool dup = std::any_of(
            refined.begin(), refined.end(), [&](const Eigen::Vector2d& t) {
                return (t - r.T).norm() < 1e-6 * (1.0 + t.norm());
            });
        if (!dup) refined.push_back(r.T);
    }
    return refined;
}

/// Lagrange reduction of a rank-2 planar lattice basis (shortest basis).
/// The swap tolerates floating-point ties so equal-norm generators keep the
/// order chosen by the candidate sort.
void lagrange_reduce(Eigen::Vector2d& v1, Eigen::Vector2d& v2) {
    for (int guard = 0; guard < 64; ++guard) {
        if (v1.squaredNorm() > v2.squaredNorm() * (1.0 + 1e-12))
            std::swap(v1, v2);
        const double k = std::round(v2.dot(v1) / v1.squaredNorm());
        if (k == 0) return;
        v2 -= k * v1;
    }
}

double basis_det(const Eigen::Vector2d& v1, const Eigen::Vector2d& v2) {
    return v1[0] * v2[1] - v1[1] * v2[0];
}

double return_residual(const SystemDescriptor& sys, const State& anchor,
                       const Eigen::Vector2d& T, const LatticeOptions& opts) {
    return (flow_joint(sys, anchor, T[0], T[1], opts.ode_tol) - anchor).norm();
}

}  // namespace

// ---- period lattice --------------------------------------------------------------

PeriodLattice period_lattice(const SystemDescriptor& sys, const State& x,
                             const LatticeOptions& opts) {
    if (!is_regular_point(sys, x))
        throw RegularityError("period lattice requested at a rank-deficient "
                              "point of '" + sys.name + "'");

    PeriodLattice lattice;
    lattice.anchor = x;
    lattice.value = moment_value(sys, x);

    double diameter = 0;
    if (sys.s1_index) {
        const int s1 = *sys.s1_index;
        const int oi = s1 == 2 ? 0 : 1;

        Eigen::Vector2d circle_vec = Eigen::Vector2d::Zero();
        circle_vec[1 - oi] = kTwoPi;

        std::vector<Candidate> cands = s1_candidates(sys, x, s1, opts, diameter);
        const std::vector<Eigen::Vector2d> refined =
            refine_candidates(sys, x, std::move(cands), opts, 12);

        const Eigen::Vector2d* first = nullptr;
        for (const Eigen::Vector2d& t : refined) {
            if (t[oi] < opts.min_return_time) continue;  // circle multiples
            if (!first || t[oi] < (*first)[oi]) first = &t;
        }
        if (!first)
            throw HorizonError(
                "no independent return found within the time horizon for '" +
                    sys.name + "' (the fiber may be non-compact or the "
                    "horizon too small)",
                opts.horizon);

        Eigen::Vector2d v = *first;
        v[1 - oi] = wrap_angle(v[1 - oi]);  // reduce by the circle vector
        if (basis_det(v, circle_vec) < 0) {
            v = -v;
            v[1 - oi] = wrap_angle(v[1 - oi]);
        }
        lattice.basis = {v, circle_vec};
    } else {
        std::vector<Candidate> cands = generic_candidates(sys, x, opts, diameter);
        const std::vector<Eigen::Vector2d> refined =
            refine_candidates(sys, x, std::move(cands), opts, 24);

        std::vector<Eigen::Vector2d> usable;
        for (const Eigen::Vector2d& t : refined)
            if (t.norm() >= opts.min_return_time) usable.push_back(t);
        std::sort(usable.begin(), usable.end(),
                  [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
                      const double na = a.squaredNorm(), nb = b.squaredNorm();
                      // ties broken toward the first time axis so equal-norm
                      // bases come out in a reproducible orientation
                      if (std::abs(na - nb) > 1e-9 * std::max(na, nb))
                          return na < nb;
                      return std::atan2(a[1], a[0]) < std::atan2(b[1], b[0]);
                  });
        if (usable.empty())
            throw HorizonError("no return found within the time horizon for '" +
                                   sys.name + "'",
                               opts.horizon);
        Eigen::Vector2d v1 = usable.front();
        const Eigen::Vector2d* v2 = nullptr;
        for (std::size_t i = 1; i < usable.size(); ++i) {
            if (std::abs(basis_det(v1, usable[i])) >
                1e-6 * v1.norm() * usable[i].norm()) {
                v2 = &usable[i];
                break;
            }
        }
        if (!v2)
            throw HorizonError(
                "no second independent return found within the time horizon "
                "for '" + sys.name + "' (the fiber may be non-compact)",
                opts.horizon);
        Eigen::Vector2d w1 = v1, w2 = *v2;
        lagrange_reduce(w1, w2);
        if (basis_det(w1, w2) < 0) w2 = -w2;
        lattice.basis = {w1, w2};
    }

    lattice.residuals[0] = return_residual(sys, x, lattice.basis[0], opts);
    lattice.residuals[1] = return_residual(sys, x, lattice.basis[1], opts);
    if (log_level() >= LogLevel::Info)
        log_info("lattice at (" + std::to_string(lattice.value.c1) + ", " +
                 std::to_string(lattice.value.c2) + "): basis {(" +
                 std::to_string(lattice.basis[0][0]) + ", " +
                 std::to_string(lattice.basis[0][1]) + "), (" +
                 std::to_string(lattice.basis[1][0]) + ", " +
                 std::to_string(lattice.basis[1][1]) + ")}, residuals " +
                 std::to_string(lattice.residuals[0]) + " / " +
                 std::to_string(lattice.residuals[1]));
    return lattice;
}

// ---- continuation ------------------------------------------------------------------

namespace {

ValuePoint midpoint(const ValuePoint& a, const ValuePoint& b) {
    return ValuePoint{0.5 * (a.c1 + b.c1), 0.5 * (a.c2 + b.c2)};
}

struct ContinuationContext {
    const SystemDescriptor& sys;
    const LatticeOptions& opts;
    std::vector<ValuePoint> critical_values;
    int bisections = 0;
};

/// One continuation step to `target`. Throws ContinuationError (possibly via
/// the recursion guard) when the segment cannot be completed.
PeriodLattice continue_to(ContinuationContext& ctx, const PeriodLattice& from,
                          const ValuePoint& target, int depth) {
    const auto& opts = ctx.opts;
    for (const ValuePoint& cv : ctx.critical_values)
        if (value_distance(cv, target) < opts.critical_exclusion)
            throw RegularityError(
                "continuation refused: the value (" + std::to_string(target.c1) +
                ", " + std::to_string(target.c2) +
                ") lies inside the exclusion zone of a critical value");

    bool step_ok = true;
    PeriodLattice next;
    try {
        next.anchor = find_fiber_point(ctx.sys, target, from.anchor, opts);
        if (!is_regular_point(ctx.sys, next.anchor))
            throw RegularityError("continuation hit a rank-deficient point");
        next.value = target;

        const bool has_s1 = ctx.sys.s1_index.has_value();
        for (int i = 0; i < 2; ++i) {
            if (has_s1 && i == 1) {
                next.basis[1] = from.basis[1];  // the circle vector is exact
                continue;
            }
            const ReturnRefinement r =
                refine_return(ctx.sys, next.anchor, from.basis[i], opts);
            if (!r.converged ||
                (r.T - from.basis[i]).norm() >
                    opts.jump_fraction * std::max(from.basis[i].norm(), 1e-6)) {
                step_ok = false;
                break;
            }
            next.basis[i] = r.T;
        }
        if (step_ok) {
            next.residuals[0] =
                return_residual(ctx.sys, next.anchor, next.basis[0], opts);
            next.residuals[1] =
                return_residual(ctx.sys, next.anchor, next.basis[1], opts);
        }
    } catch (const RegularityError&) {
        throw;
    } catch (const Error&) {
        step_ok = false;
    }
    if (step_ok) return next;

    if (depth >= opts.max_bisections)
        throw ContinuationError(
            "lattice continuation stalled near (" + std::to_string(target.c1) +
            ", " + std::to_string(target.c2) + ") after " +
            std::to_string(opts.max_bisections) + " bisections");
    ++ctx.bisections;
    log_debug("continuation bisects toward (" + std::to_string(target.c1) +
              ", " + std::to_string(target.c2) + ") at depth " +
              std::to_string(depth));
    const PeriodLattice half =
        continue_to(ctx, from, midpoint(from.value, target), depth + 1);
    return continue_to(ctx, half, target, depth + 1);
}

}  // namespace

TransportResult transport_lattice(const SystemDescriptor& sys,
                                  const std::vector<ValuePoint>& path,
                                  const PeriodLattice& start,
                                  const LatticeOptions& opts) {
    if (path.empty()) throw Error("transport needs a non-empty path");
    if (value_distance(path.front(), start.value) > 1e-9)
        throw Error("the start lattice does not sit over the first path value");

    ContinuationContext ctx{sys, opts, {}, 0};
    if (!sys.seeds.empty()) {
        const EquilibriumSearch eq = find_equilibria(sys, sys.seeds);
        for (const State& p : eq.points)
            ctx.critical_values.push_back(moment_value(sys, p));
    }

    TransportResult out;
    out.lattices.push_back(start);
    for (std::size_t k = 1; k < path.size(); ++k) {
        out.lattices.push_back(
            continue_to(ctx, out.lattices.back(), path[k], 0));
        if (log_level() >= LogLevel::Debug)
            log_debug("transport sample " + std::to_string(k) + "/" +
                      std::to_string(path.size() - 1) + " at (" +
                      std::to_string(path[k].c1) + ", " +
                      std::to_string(path[k].c2) + ")");
    }
    out.bisections = ctx.bisections;
    if (log_level() >= LogLevel::Info)
        log_info("transport finished: " + std::to_string(path.size()) +
                 " samples, " + std::to_string(ctx.bisections) +
                 " inserted bisections");
    return out;
}

// ---- monodromy ----------------------------------------------------------------------

MonodromyMatrix monodromy_around(const SystemDescriptor& sys, const LoopPath& loop,
                                 const LatticeOptions& opts,
                                 MonodromyDiagnostics* diag) {
    if (loop.samples.size() < 3)
        throw Error("monodromy needs a loop with at least 3 samples");
    if (value_distance(loop.samples.front(), loop.samples.back()) > 1e-12)
        throw Error("monodromy needs a closed loop (first sample == last)");

    State seed;
    if (!sys.seeds.empty()) {
        seed = sys.seeds.front();
        seed.array() += 0.3;  // step off the (likely critical) seed point
    } else {
        seed = State::Ones(sys.dim);
    }

    const State anchor = find_fiber_point(sys, loop.samples.front(), seed, opts);
    const PeriodLattice start = period_lattice(sys, anchor, opts);
    const TransportResult transported =
        transport_lattice(sys, loop.samples, start, opts);
    const PeriodLattice& finish = transported.lattices.back();

    Eigen::Matrix2d rows_start, rows_finish;
    rows_start << start.basis[0].transpose(), start.basis[1].transpose();
    rows_finish << finish.basis[0].transpose(), finish.basis[1].transpose();
    const Eigen::Matrix2d m_real = rows_finish * rows_start.inverse();

    Mat2i m{std::llround(m_real(0, 0)), std::llround(m_real(0, 1)),
            std::llround(m_real(1, 0)), std::llround(m_real(1, 1))};
    double residual = 0;
    residual = std::max(residual, std::abs(m_real(0, 0) - double(m.a)));
    residual = std::max(residual, std::abs(m_real(0, 1) - double(m.b)));
    residual = std::max(residual, std::abs(m_real(1, 0) - double(m.c)));
    residual = std::max(residual, std::abs(m_real(1, 1) - double(m.d)));

    if (residual > opts.monodromy_residual)
        throw MonodromyError(
            "monodromy extraction is inconclusive (rounding residual " +
                std::to_string(residual) +
                "); refine the loop sampling or tolerances",
            residual);
    if (std::llabs(m.det()) != 1)
        throw MonodromyError(
            "extracted matrix is not unimodular (det " +
                std::to_string(m.det()) + ")",
            residual);

    if (diag) {
        diag->start = start;
        diag->finish = finish;
        diag->bisections = transported.bisections;
    }
    if (log_level() >= LogLevel::Info)
        log_info("monodromy " + m.str() + ", rounding residual " +
                 std::to_string(residual));
    return MonodromyMatrix{m, residual};
}

std::array<std::int64_t, 2> vanishing_cycle(const MonodromyMatrix& mm) {
    const Mat2i& m = mm.m;
    const std::int64_t na = m.a - 1, nb = m.b, nc = m.c, nd = m.d - 1;
    if (na == 0 && nb == 0 && nc == 0 && nd == 0)
        throw AmbiguousCycleError(
            "the identity matrix fixes every cycle; no vanishing cycle is "
            "distinguished");
    if (na * nd - nb * nc != 0)
        throw NotUnipotentError(
            "matrix " + m.str() + " has no eigenvalue-1 cycle");

    // kernel of a rank-1 integer matrix: orthogonal to any nonzero row
    std::int64_t r1 = na, r2 = nb;
    if (r1 == 0 && r2 == 0) { r1 = nc; r2 = nd; }
    std::array<std::int64_t, 2> v{r2, -r1};
    const std::int64_t g = std::gcd(std::llabs(v[0]), std::llabs(v[1]));
    if (g > 1) { v[0] /= g; v[1] /= g; }
    if (v[0] < 0 || (v[0] == 0 && v[1] < 0)) { v[0] = -v[0]; v[1] = -v[1]; }
    return v;
}

// ---- bifurcation scan -----------------------------------------------------------------

namespace {

std::vector<State> grid_seeds(const Box4& region, int grid) {
    std::vector<State> seeds;
    seeds.reserve(std::size_t(grid) * grid * grid * grid);
    Eigen::Vector4d step;
    for (int i = 0; i < 4; ++i)
        step[i] = grid > 1 ? (region.hi[i] - region.lo[i]) / (grid - 1) : 0.0;
    for (int a = 0; a < grid; ++a)
        for (int b = 0; b < grid; ++b)
            for (int c = 0; c < grid; ++c)
                for (int d = 0; d < grid; ++d) {
                    State s(4);
                    s << region.lo[0] + a * step[0], region.lo[1] + b * step[1],
                         region.lo[2] + c * step[2], region.lo[3] + d * step[3];
                    seeds.push_back(s);
                }
    return seeds;
}

/// Gauss-Newton search for a rank-1 point near the seed: solve
/// l1*dF1 + l2*dF2 = 0 with |l| = 1 in the unknowns (x, l).
bool rank1_refine(const SystemDescriptor& sys, const State& seed, State& out) {
    State x = seed;
    const Eigen::MatrixXd jac0 = moment_jacobian(sys, x);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd0(jac0.transpose(),
                                           Eigen::ComputeFullV);
    Eigen::Vector2d l = svd0.matrixV().col(1);

    for (int it = 0; it < 50; ++it) {
        const Eigen::MatrixXd jac = moment_jacobian(sys, x);
        const Eigen::VectorXd combo =
            jac.transpose() * l;  // l1*dF1 + l2*dF2 as a column
        Eigen::VectorXd r(5);
        r << combo, l.squaredNorm() - 1.0;
        if (combo.norm() < 1e-11 && std::abs(r[4]) < 1e-12) {
            out = x;
            return true;
        }
        const auto [h1, h2] = hessians_at(sys, x);
        Eigen::MatrixXd big(5, 6);
        big.setZero();
        big.block<4, 4>(0, 0) = l[0] * h1 + l[1] * h2;
        big.block<4, 2>(0, 4) = jac.transpose();
        big.block<1, 2>(4, 4) = 2.0 * l.transpose();
        const Eigen::VectorXd step =
            big.completeOrthogonalDecomposition().solve(-r);
        if (!step.allFinite()) return false;
        x += step.head<4>();
        l += step.tail<2>();
        if (x.norm() > 1e4) return false;
    }
    return false;
}

}  // namespace

BifurcationDiagram scan_bifurcation(const SystemDescriptor& sys, const Box4& region,
                                    int grid) {
    if (sys.dim != 4 || sys.extended)
        throw Error("scan_bifurcation supports canonical 4-dimensional "
                    "systems only");
    if (grid < 2) throw Error("scan grid must be at least 2 per axis");
    if (((region.hi - region.lo).array() <= 0).any())
        throw Error("scan region must have positive extent on every axis");

    BifurcationDiagram diagram;
    diagram.region = region;
    diagram.grid = grid;

    std::vector<State> seeds = grid_seeds(region, grid);
    seeds.insert(seeds.end(), sys.seeds.begin(), sys.seeds.end());

    // equilibria first: they win deduplication ties against rank-1 samples
    const EquilibriumSearch eq = find_equilibria(sys, seeds);
    for (const State& p : eq.points) {
        CriticalValue cv;
        cv.value = moment_value(sys, p);
        cv.kind = CriticalKind::Equilibrium;
        cv.point = p;
        cv.type = classify_equilibrium(sys, p).type;
        diagram.values.push_back(cv);
    }

    for (const State& seed : seeds) {
        State p;
        if (!rank1_refine(sys, seed, p)) continue;
        const Eigen::MatrixXd jac = moment_jacobian(sys, p);
        if (wedge_norm(jac) > kRegularityTol) continue;   // not rank-deficient
        if (jac.norm() < kRegularityTol) continue;        // an equilibrium
        const ValuePoint value = moment_value(sys, p);
        const bool dup = std::any_of(
            diagram.values.begin(), diagram.values.end(),
            [&value](const CriticalValue& known) {
                return value_distance(known.value, value) < kValueDedupe;
            });
        if (dup) continue;
        CriticalValue cv;
        cv.value = value;
        cv.kind = CriticalKind::RankOne;
        cv.point = p;
        diagram.values.push_back(cv);
    }

    std::sort(diagram.values.begin(), diagram.values.end(),
              [](const CriticalValue& a, const CriticalValue& b) {
                  if (a.value.c1 != b.value.c1) return a.value.c1 < b.value.c1;
                  if (a.value.c2 != b.value.c2) return a.value.c2 < b.value.c2;
                  return a.kind < b.kind;
              });
    return diagram;
}

int count_pinch_points(const SystemDescriptor& sys, const ValuePoint& c,
                       const Box4& region, int grid) {
    std::vector<State> seeds;
    if (sys.dim == 4 && !sys.extended) seeds = grid_seeds(region, grid);
    seeds.insert(seeds.end(), sys.seeds.begin(), sys.seeds.end());

    const EquilibriumSearch eq = find_equilibria(sys, seeds);
    int count = 0;
    for (const State& p : eq.points) {
        if (value_distance(moment_value(sys, p), c) > kPinchValueTol) continue;
        if (classify_equilibrium(sys, p).type == WilliamsonType::FocusFocus)
            ++count;
    }
    if (count == 0)
        throw NotFocusFocusError(
            "no focus-focus equilibrium maps to (" + std::to_string(c.c1) +
            ", " + std::to_string(c.c2) + ") in the searched region");
    return count;
}

}  // namespace mlab
