#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace mlab {

/// Exact 2x2 integer matrix.
struct Mat2i {
    // row-major entries
    std::int64_t a = 1, b = 0, c = 0, d = 1;

    static Mat2i identity() { return {}; }

    friend Mat2i operator*(const Mat2i& l, const Mat2i& r) {
        return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
                l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
    }
    friend bool operator==(const Mat2i& l, const Mat2i& r) {
        return l.a == r.a && l.b == r.b && l.c == r.c && l.d == r.d;
    }

    std::int64_t det() const { return a * d - b * c; }
    std::int64_t trace() const { return a + d; }

    /// Inverse of a unimodular matrix (|det| = 1).
    Mat2i inverse_unimodular() const {
        const std::int64_t s = det();  // +1 or -1
        return {s * d, s * -b, s * -c, s * a};
    }

    std::array<std::int64_t, 2> apply(const std::array<std::int64_t, 2>& v) const {
        return {a * v[0] + b * v[1], c * v[0] + d * v[1]};
    }

    std::string str() const {
        return "[[" + std::to_string(a) + ", " + std::to_string(b) + "], [" +
               std::to_string(c) + ", " + std::to_string(d) + "]]";
    }
};

/// Integer monodromy matrix together with the rounding residual of the
/// extraction (0 for exact combinatorial computations).
struct MonodromyMatrix {
    Mat2i m;
    double residual = 0.0;
};

}  // namespace mlab
