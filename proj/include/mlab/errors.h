#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mlab {

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A map produced a non-finite value (NaN/Inf) at the given point.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& msg, std::vector<double> point)
        : Error(msg), point(std::move(point)) {}
    std::vector<double> point;  ///< offending phase-space point
};

/// The adaptive integrator could not complete; carries the last good state.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& msg, std::vector<double> last, double t)
        : Error(msg), last_point(std::move(last)), t_reached(t) {}
    std::vector<double> last_point;
    double t_reached;
};

/// Classification was requested at a point that is not an equilibrium.
class NotEquilibriumError : public Error {
public:
    NotEquilibriumError(const std::string& msg, double res)
        : Error(msg), residual(res) {}
    double residual;  ///< norm of the equilibrium defect at the point
};

/// No point of the requested fiber could be located.
class FiberNotFoundError : public Error {
public:
    FiberNotFoundError(const std::string& msg, double best)
        : Error(msg), best_residual(best) {}
    double best_residual;
};

/// The moment map is rank-deficient where a regular value was required,
/// or a requested value sits inside the critical-value exclusion zone.
class RegularityError : public Error {
public:
    using Error::Error;
};

/// The return-time search exhausted its time horizon without a candidate.
class HorizonError : public Error {
public:
    HorizonError(const std::string& msg, double horizon)
        : Error(msg), horizon(horizon) {}
    double horizon;
};

/// Lattice continuation failed even after the maximum number of bisections.
class ContinuationError : public Error {
public:
    using Error::Error;
};

/// Monodromy extraction did not produce a convincing integer matrix.
class MonodromyError : public Error {
public:
    MonodromyError(const std::string& msg, double res)
        : Error(msg), residual(res) {}
    double residual;
};

/// The matrix has no eigenvalue 1, so no cycle is preserved.
class NotUnipotentError : public Error {
public:
    using Error::Error;
};

/// The matrix is the identity: every cycle is fixed, none is distinguished.
class AmbiguousCycleError : public Error {
public:
    using Error::Error;
};

/// No focus-focus point maps to the requested critical value.
class NotFocusFocusError : public Error {
public:
    using Error::Error;
};

/// Unknown builtin system or catalog entry.
class LookupError : public Error {
public:
    using Error::Error;
};

/// Syntax or semantic error in a system definition, with source position.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line, int column)
        : Error(msg + " (line " + std::to_string(line) + ", column " +
                std::to_string(column) + ")"),
          line(line), column(column) {}
    int line;
    int column;
};

}  // namespace mlab
