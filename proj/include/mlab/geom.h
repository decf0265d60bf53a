#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "mlab/system.h"

namespace mlab {

/// Canonical symplectic structure on R^4 in (x1, y1, x2, y2) order:
/// X_H = J * grad(H) reproduces x' = dH/dy, y' = -dH/dx per pair.
Eigen::Matrix4d symplectic_matrix();

/// Finiteness-checked moment map evaluation.
Eigen::Vector2d moment_map(const SystemDescriptor& sys, const State& x);
ValuePoint moment_value(const SystemDescriptor& sys, const State& x);

/// Gradient of component 1 or 2: analytic when the descriptor provides one,
/// otherwise central finite differences with step eps^(1/3)*max(1, |x_i|).
Eigen::VectorXd gradient(const SystemDescriptor& sys, int component, const State& x);

/// Hamiltonian vector field of the combination c1*F1 + c2*F2.
Eigen::VectorXd combined_field(const SystemDescriptor& sys, double c1, double c2,
                               const State& x);

/// Hamiltonian vector field of a single component (1 or 2).
Eigen::VectorXd ham_vector_field(const SystemDescriptor& sys, int component,
                                 const State& x);

/// Joint flow: advances x by time t1 along X_F1 and t2 along X_F2, realized
/// as the unit-time flow of t1*X_F1 + t2*X_F2 (the component flows commute).
/// Conservation of F is monitored; a drift beyond the documented bound
/// raises IntegrationError.
State flow_joint(const SystemDescriptor& sys, const State& x, double t1,
                 double t2, double tol = 1e-10);

/// Samples the flow of c1*X_F1 + c2*X_F2 at the given increasing positive
/// times.  Used by the return-time searches.
std::vector<State> flow_path(const SystemDescriptor& sys, const State& x,
                             double c1, double c2,
                             const std::vector<double>& times, double tol);

/// Hessians of F1 and F2 at x, via central finite differences of the
/// gradient, symmetrized by averaging. Canonical (dim == 4) systems only.
std::pair<Eigen::Matrix4d, Eigen::Matrix4d> hessians_at(const SystemDescriptor& sys,
                                                        const State& x);

/// Norm of the equilibrium defect at x: the stacked gradients for canonical
/// systems, the stacked component fields for constrained entries.
double equilibrium_residual(const SystemDescriptor& sys, const State& x);

}  // namespace mlab
