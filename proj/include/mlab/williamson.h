#pragma once

#include <complex>
#include <string>
#include <vector>

#include "mlab/system.h"

namespace mlab {

enum class WilliamsonType {
    EllipticElliptic,
    EllipticHyperbolic,
    HyperbolicHyperbolic,
    FocusFocus,
    Degenerate,
};

std::string to_string(WilliamsonType t);

/// Classification result at one equilibrium.
struct WilliamsonReport {
    State point;
    WilliamsonType type = WilliamsonType::Degenerate;
    std::array<std::complex<double>, 4> eigenvalues{};  ///< of the deciding combination
    double combination[2] = {0, 0};  ///< (c1, c2) of the deciding combination
    double residual = 0;             ///< equilibrium defect norm at the point
};

/// A dropped seed with the reason it was discarded.
struct DroppedSeed {
    State seed;
    std::string reason;
};

struct EquilibriumSearch {
    std::vector<State> points;
    std::vector<DroppedSeed> dropped;
};

/// Newton refinement of each seed on the stacked system dF1 = dF2 = 0
/// (least-squares step; constrained entries refine on the stacked component
/// fields instead). Results are deduplicated within 1e-6; non-convergent
/// seeds are dropped and recorded.
EquilibriumSearch find_equilibria(const SystemDescriptor& sys,
                                  const std::vector<State>& seeds);

/// Williamson classification of a non-degenerate equilibrium via the
/// eigenvalue pattern of the linearized combined field, sampled over a fixed
/// fan of combination directions. Throws NotEquilibriumError when the
/// equilibrium defect at x exceeds 1e-8.
WilliamsonReport classify_equilibrium(const SystemDescriptor& sys, const State& x);

}  // namespace mlab
