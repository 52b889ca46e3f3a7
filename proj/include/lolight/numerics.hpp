#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>

#include "lolight/errors.hpp"

namespace lolight {

inline constexpr double TWO_PI = 6.283185307179586476925286766559;

using Vec3 = std::array<double, 3>;

// Small dense 3x3 matrix, row major. Enough linear algebra for this project;
// no external dependency wanted for 3x3 work.
struct Mat3 {
    std::array<double, 9> m{};

    double& operator()(int i, int j) { return m[3 * i + j]; }
    double operator()(int i, int j) const { return m[3 * i + j]; }

    static Mat3 identity() {
        Mat3 r;
        r(0, 0) = r(1, 1) = r(2, 2) = 1.0;
        return r;
    }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] + o.m[i];
        return r;
    }
    Mat3 operator-(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] - o.m[i];
        return r;
    }
    Mat3 operator*(double s) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] * s;
        return r;
    }
    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0;
                for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }
    Vec3 operator*(const Vec3& v) const {
        Vec3 r{};
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k) r[i] += (*this)(i, k) * v[k];
        return r;
    }

    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }

    double det() const {
        const Mat3& a = *this;
        return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
               a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
               a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    }

    Mat3 inverse() const {
        const Mat3& a = *this;
        double d = det();
        if (std::abs(d) < 1e-300) throw SingularMetric("3x3 inverse: singular matrix");
        Mat3 r;
        r(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) / d;
        r(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) / d;
        r(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) / d;
        r(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) / d;
        r(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) / d;
        r(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) / d;
        r(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) / d;
        r(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) / d;
        r(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) / d;
        return r;
    }

    double max_abs() const {
        double r = 0;
        for (double v : m) r = std::max(r, std::abs(v));
        return r;
    }
};

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double max_abs(const Vec3& v) {
    return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
}

// Eigenvalues of a symmetric 3x3 matrix (analytic, ascending order).
std::array<double, 3> symmetric_eigenvalues(const Mat3& a);

// Exact rational p/q with q > 0, gcd(p,q) = 1. Used for arithmetic
// certificates and rational slopes; entries stay desk-sized so int64 is ample.
struct Rational {
    std::int64_t p = 0;
    std::int64_t q = 1;

    Rational() = default;
    Rational(std::int64_t num, std::int64_t den) : p(num), q(den) { normalize(); }

    void normalize() {
        if (q == 0) throw MalformedInput("rational with zero denominator");
        if (q < 0) {
            p = -p;
            q = -q;
        }
        std::int64_t g = std::gcd(p < 0 ? -p : p, q);
        if (g > 1) {
            p /= g;
            q /= g;
        }
    }

    double value() const { return static_cast<double>(p) / static_cast<double>(q); }
    bool operator==(const Rational& o) const { return p == o.p && q == o.q; }
};

inline bool nearly_integer(double x, double tol = 1e-9) {
    return std::abs(x - std::round(x)) < tol;
}

// lambda * frac(x / lambda), the "fractional part modulo lambda" used by the
// normal-form range reductions. Result in [0, lambda) for lambda > 0.
inline double fmod_range(double x, double lambda) {
    double r = x - lambda * std::floor(x / lambda);
    if (r >= lambda) r -= lambda; // guard against rounding at the boundary
    if (r < 0) r += lambda;
    return r;
}

// Runs fn(i) for i in [0, count). Honors LOLIGHT3_THREADS; falls back to a
// serial loop for small counts. fn must be safe to call concurrently.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

int max_threads();

} // namespace lolight
