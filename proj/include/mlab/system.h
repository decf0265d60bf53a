#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mlab {

/// Ambient phase-space state. Canonical systems use 4 components ordered
/// (x1, y1, x2, y2) with canonical pairs (xi, yi); embedded entries may use
/// a larger ambient dimension (the spherical pendulum lives in R^6).
using State = Eigen::VectorXd;

/// A point in the image of the moment map.
struct ValuePoint {
    double c1 = 0.0;
    double c2 = 0.0;
};

inline double value_distance(const ValuePoint& a, const ValuePoint& b) {
    const double d1 = a.c1 - b.c1, d2 = a.c2 - b.c2;
    return std::sqrt(d1 * d1 + d2 * d2);
}

/// Description of a two-degree-of-freedom integrable system F = (F1, F2).
///
/// Only `name`, `dim` and `evaluate` are mandatory. Every optional hook has
/// a generic fallback: gradients default to central finite differences,
/// the vector field to the canonical symplectic rule (dim == 4 only), and
/// the projection to a no-op. Descriptors are treated as immutable values
/// after construction.
struct SystemDescriptor {
    std::string name;
    int dim = 4;

    /// Moment map: ambient state -> (F1, F2). Required.
    std::function<Eigen::Vector2d(const State&)> evaluate;

    /// Optional analytic gradient of component 1 or 2 (ambient components).
    std::function<Eigen::VectorXd(int component, const State&)> gradient;

    /// Optional Hamiltonian vector field of c1*F1 + c2*F2. Required for
    /// non-canonical (dim != 4) entries; canonical systems may omit it.
    std::function<Eigen::VectorXd(double c1, double c2, const State&)> vector_field;

    /// Optional projection of a state back onto the constraint manifold,
    /// applied after every accepted integration step.
    std::function<void(State&)> project;

    /// Optional 4x4 linearization of the combined field at an equilibrium
    /// (tangent reduction for constrained entries). Canonical systems leave
    /// this empty and the classifier builds it from the Hessians.
    std::function<Eigen::Matrix4d(double c1, double c2, const State&)> linearization;

    /// Index (1 or 2) of a component whose flow is 2*pi-periodic, if any.
    std::optional<int> s1_index;

    /// Seed points for the equilibrium search.
    std::vector<State> seeds;

    /// True for entries whose internal representation is not canonical R^4.
    bool extended = false;
};

}  // namespace mlab
