#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mlab/intmat.h"
#include "mlab/system.h"
#include "mlab/williamson.h"

namespace mlab {

/// Period lattice of a Liouville torus: the return-time vectors T with
/// flow_joint(anchor, T) = anchor. Basis rows are ordered so that when the
/// system carries a circle action its 2*pi return vector is the second one,
/// and oriented so det([basis[0]; basis[1]]) > 0.
struct PeriodLattice {
    std::array<Eigen::Vector2d, 2> basis;
    State anchor;
    ValuePoint value;
    std::array<double, 2> residuals{0, 0};  ///< re-integration defects of the basis
};

/// Closed loop of regular values (first sample == last sample).
struct LoopPath {
    std::vector<ValuePoint> samples;

    static LoopPath circle(ValuePoint center, double radius, int n_samples);
    LoopPath reversed() const;
    /// Same loop started at sample `offset` (for basepoint-independence checks).
    LoopPath rotated(std::size_t offset) const;
};

/// Tunable tolerances of the lattice/monodromy pipeline. Every field has the
/// documented default; reports echo the effective values.
struct LatticeOptions {
    double ode_tol = 1e-11;           ///< flow tolerance inside Newton refinement
    double search_ode_tol = 1e-9;     ///< flow tolerance of the coarse return search
    double horizon = 40.0;            ///< return-time search bound per component
    double coarse_step = 0.25;        ///< grid step of the coarse search
    int s1_samples = 64;              ///< circle-orbit samples in the search
    double candidate_fraction = 0.1;  ///< candidate threshold vs fiber diameter
    double refine_target = 1e-9;      ///< Newton convergence goal on returns
    double accept_residual = 1e-7;    ///< max accepted return defect
    double min_return_time = 0.125;   ///< rejects the trivial return near T = 0
    int max_newton = 30;
    int max_restarts = 20;            ///< deterministic fiber-search restarts
    std::uint64_t rng_seed = 12345;   ///< seed of the restart perturbations
    double jump_fraction = 0.30;      ///< continuation basis-jump bound
    int max_bisections = 12;          ///< continuation bisection depth
    double critical_exclusion = 1e-3; ///< refusal distance to critical values
    double monodromy_residual = 1e-3; ///< max rounding residual of the matrix
};

/// Locates a point of the fiber F = c by damped Gauss-Newton (minimal-norm
/// steps) from `seed`, retrying from deterministically perturbed seeds.
/// Throws FiberNotFoundError when every restart fails.
State find_fiber_point(const SystemDescriptor& sys, const ValuePoint& c,
                       const State& seed, const LatticeOptions& opts = {});

/// Period lattice of the torus through x (a regular point of a regular
/// fiber). Uses the circle action when the system declares one; the basis is
/// reduced and oriented. Throws RegularityError / HorizonError.
PeriodLattice period_lattice(const SystemDescriptor& sys, const State& x,
                             const LatticeOptions& opts = {});

struct TransportResult {
    std::vector<PeriodLattice> lattices;  ///< one per input path sample
    int bisections = 0;                   ///< segments inserted by continuation
};

/// Continues `start` along the path of regular values, refining the basis by
/// Newton at each step without re-reduction (so monodromy can accumulate).
/// A declared circle-action vector is carried exactly. Throws
/// ContinuationError when a segment keeps failing after max_bisections.
TransportResult transport_lattice(const SystemDescriptor& sys,
                                  const std::vector<ValuePoint>& path,
                                  const PeriodLattice& start,
                                  const LatticeOptions& opts = {});

struct MonodromyDiagnostics {
    PeriodLattice start;
    PeriodLattice finish;
    int bisections = 0;
};

/// Transports the period lattice around the closed loop and resolves the
/// final basis in terms of the starting one. The returned integer matrix M
/// satisfies final_basis = M * start_basis (basis vectors stacked as rows,
/// the circle cycle second). Throws MonodromyError when the real solution is
/// not convincingly integral or not unimodular.
MonodromyMatrix monodromy_around(const SystemDescriptor& sys, const LoopPath& loop,
                                 const LatticeOptions& opts = {},
                                 MonodromyDiagnostics* diag = nullptr);

/// Primitive integer cycle fixed by a unipotent monodromy matrix, sign-
/// normalized (first nonzero entry positive). Throws AmbiguousCycleError for
/// the identity and NotUnipotentError when no eigenvalue-1 cycle exists.
std::array<std::int64_t, 2> vanishing_cycle(const MonodromyMatrix& m);

/// Axis-aligned box in canonical phase space.
struct Box4 {
    Eigen::Vector4d lo;
    Eigen::Vector4d hi;
};

enum class CriticalKind { Equilibrium, RankOne };

struct CriticalValue {
    ValuePoint value;
    CriticalKind kind = CriticalKind::RankOne;
    WilliamsonType type = WilliamsonType::Degenerate;  ///< equilibria only
    State point;  ///< a preimage realizing the critical value
};

struct BifurcationDiagram {
    Box4 region;
    int grid = 0;
    std::vector<CriticalValue> values;
};

/// Seeds Newton searches for equilibria and rank-1 points on a grid over the
/// region and reports the deduplicated critical values with tags.
BifurcationDiagram scan_bifurcation(const SystemDescriptor& sys, const Box4& region,
                                    int grid);

/// Number of distinct focus-focus equilibria mapping to the critical value c
/// (within 1e-6). Throws NotFocusFocusError when there are none.
int count_pinch_points(const SystemDescriptor& sys, const ValuePoint& c,
                       const Box4& region, int grid = 5);

}  // namespace mlab
