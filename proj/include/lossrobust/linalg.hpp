#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace lossrobust {

using Vec = std::vector<double>;

/// Dense row-major matrix, sized for small models and per-sample blocks.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) {
        assert(i < rows && j < cols);
        return data[i * cols + j];
    }
    double operator()(std::size_t i, std::size_t j) const {
        assert(i < rows && j < cols);
        return data[i * cols + j];
    }

    Vec row(std::size_t i) const {
        assert(i < rows);
        return Vec(data.begin() + static_cast<std::ptrdiff_t>(i * cols),
                   data.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols));
    }
};

inline double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm1(const Vec& a) {
    double s = 0.0;
    for (double v : a) s += std::fabs(v);
    return s;
}

inline double norm_inf(const Vec& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::fabs(v));
    return m;
}

inline double mean(const Vec& a) {
    if (a.empty()) return 0.0;
    double s = 0.0;
    for (double v : a) s += v;
    return s / static_cast<double>(a.size());
}

/// Population variance (divides by n).
inline double variance(const Vec& a) {
    if (a.empty()) return 0.0;
    double m = mean(a);
    double s = 0.0;
    for (double v : a) s += (v - m) * (v - m);
    return s / static_cast<double>(a.size());
}

} // namespace lossrobust
