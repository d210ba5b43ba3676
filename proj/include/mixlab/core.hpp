#ifndef MIXLAB_CORE_HPP
#define MIXLAB_CORE_HPP

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixlab {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/** Base error type; everything thrown by the library derives from it. */
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Step-size underflow near a critical point, or |b| below the stall floor.
struct StallError : Error {
    explicit StallError(const std::string& msg) : Error(msg) {}
};

/// Argument outside the documented domain of an operation.
struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Config file or experiment-spec problems.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double c) const { return {c * x, c * y}; }
    Vec2 operator/(double c) const { return {x / c, y / c}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
    /// Rotation by +pi/2: grad H -> b.
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double c, const Vec2& v) { return {c * v.x, c * v.y}; }

/// Symmetric 2x2 matrix (Hessians).
struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a22 = 0.0;
    Vec2 apply(const Vec2& v) const { return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y}; }
};

/** Floating-point formatting used for every CSV/JSON artifact: 17 significant
    digits round-trip doubles exactly. */
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    if (n == 1) { v[0] = a; return v; }
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

inline std::vector<double> logspace(double a, double b, int n) {
    std::vector<double> v = linspace(std::log(a), std::log(b), n);
    for (double& x : v) x = std::exp(x);
    return v;
}

/// Deterministic RNG; every randomized datum in the suite is seeded.
using Rng = std::mt19937_64;

inline double sq(double x) { return x * x; }

} // namespace mixlab

#endif
