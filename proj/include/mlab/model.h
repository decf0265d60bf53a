#pragma once

#include "mlab/intmat.h"

namespace mlab {

/// A cycle on the glued local model, tracked as the integer winding pair
/// (a, b) of (arg z1, arg z2) in the current chart plus the number of chart
/// crossings it has been carried through.
struct ChartWord {
    std::array<std::int64_t, 2> winding{0, 0};
    int crossings = 0;

    /// Re-expresses the winding pair across one chart transition
    /// (z1, z2) -> (z2^-1, z1*z2^2), i.e. (a, b) -> (-b, a + 2b).
    void cross();

    /// The opposite crossing direction.
    void cross_inverse();
};

/// Exact action of one chart transition on winding pairs: [[0, -1], [1, 2]].
Mat2i crossing_matrix();

/// Monodromy of the glued model with n >= 1 pinch points, computed by
/// carrying the transversal cycle through n chart crossings and re-expressing
/// the result in the (gamma, delta) cycle basis, where delta = theta + lambda
/// is the global circle-action cycle. Exact integers; returns [[1, n], [0, 1]].
MonodromyMatrix model_monodromy(int n);

/// Base affine holonomy of the n-pinch model, the integer part of the gluing
/// (x, y) -> (x + n*y, y). Recorded relation to model_monodromy(n): equal as
/// written in the (gamma, delta) basis (identity conjugation).
Mat2i model_affine_holonomy(int n);

}  // namespace mlab
