// Exact combinatorial model of the torus fibration near a pinched fiber.
//
// The model glues charts with coordinates (z1, z2) along the transition
// (z1, z2) -> (z2^-1, z1*z2^2); the fibration is z1*z2 and the fiber cycles
// are tracked through the windings of (arg z1, arg z2). Three cycles matter:
//   lambda:  z2 constant, arg z1 advancing one turn        -> winding (1, 0)
//   theta:   z1 constant, arg z2 receding one turn         -> winding (0, -1)
//   delta = theta + lambda, the global circle action       -> winding (1, -1)
// Carrying a cycle once around the base circle in the positive direction
// re-expresses its winding through one inverse transition per pinch point;
// the sign of the traversal direction is pinned by the requirement that the
// one-pinch monodromy act as gamma -> gamma + delta on the cycle basis.

#include "mlab/model.h"

#include "mlab/errors.h"

namespace mlab {

namespace {

constexpr std::array<std::int64_t, 2> kLambda{1, 0};
constexpr std::array<std::int64_t, 2> kDelta{1, -1};

}  // namespace

Mat2i crossing_matrix() {
    return Mat2i{0, -1, 1, 2};
}

void ChartWord::cross() {
    winding = crossing_matrix().apply(winding);
    ++crossings;
}

void ChartWord::cross_inverse() {
    winding = crossing_matrix().inverse_unimodular().apply(winding);
    ++crossings;
}

MonodromyMatrix model_monodromy(int n) {
    if (n < 1) throw Error("the model needs at least one pinch point");

    ChartWord lambda{kLambda, 0};
    ChartWord delta{kDelta, 0};
    for (int i = 0; i < n; ++i) {
        lambda.cross_inverse();
        delta.cross_inverse();
    }

    // The circle-action cycle is global: it must come back unchanged.
    if (delta.winding != kDelta)
        throw Error("internal model inconsistency: the circle cycle moved");

    // Decompose the carried transversal cycle as alpha*lambda + m*delta.
    // With lambda = (1, 0) and delta = (1, -1): alpha = a + b, m = -b.
    const std::int64_t a = lambda.winding[0], b = lambda.winding[1];
    const std::int64_t alpha = a + b, m = -b;
    if (alpha != 1)
        throw Error("internal model inconsistency: the transversal cycle was "
                    "not carried to lambda + m*delta");

    // The marked-cycle shear m forces gamma -> gamma + m*delta while delta is
    // fixed, i.e. [[1, m], [0, 1]] on the (gamma, delta) basis.
    return MonodromyMatrix{Mat2i{1, m, 0, 1}, 0.0};
}

Mat2i model_affine_holonomy(int n) {
    if (n < 1) throw Error("the model needs at least one pinch point");
    const Mat2i holonomy{1, n, 0, 1};
    if (!(holonomy == model_monodromy(n).m))
        throw Error("internal model inconsistency: affine holonomy and "
                    "monodromy disagree");
    return holonomy;
}

}  // namespace mlab
