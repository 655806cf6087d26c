#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace tiada {

using Vector = std::vector<double>;

// Sum of squares accumulated left to right from 0.0. Every optimizer uses this
// exact routine so that reductions between variants stay bit-identical.
inline double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return s;
}

inline double norm(std::span<const double> v) { return std::sqrt(squared_norm(v)); }

inline double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline bool all_finite(std::span<const double> v) {
    for (double c : v)
        if (!std::isfinite(c)) return false;
    return true;
}

}  // namespace tiada
