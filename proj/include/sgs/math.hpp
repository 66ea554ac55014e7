#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>

// Small fixed-size vector/matrix types templated on the scalar so the same
// shading and projection code runs on plain doubles and on autodiff
// variables.

namespace sgs {

template <class T>
struct Vec2T {
    T x{}, y{};
};

template <class T>
struct Vec3T {
    T x{}, y{}, z{};

    T& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    const T& operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

template <class T>
struct Vec4T {
    T w{}, x{}, y{}, z{};  // quaternion layout (scalar first)
};

// Row-major 3x3.
template <class T>
struct Mat3T {
    std::array<T, 9> m{};

    T& operator()(int r, int c) { return m[3 * r + c]; }
    const T& operator()(int r, int c) const { return m[3 * r + c]; }
};

using Vec2 = Vec2T<double>;
using Vec3 = Vec3T<double>;
using Vec4 = Vec4T<double>;
using Mat3 = Mat3T<double>;

template <class T> Vec3T<T> operator+(const Vec3T<T>& a, const Vec3T<T>& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
template <class T> Vec3T<T> operator-(const Vec3T<T>& a, const Vec3T<T>& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
template <class T> Vec3T<T> operator*(const T& s, const Vec3T<T>& v) { return {s * v.x, s * v.y, s * v.z}; }
template <class T> Vec3T<T> operator*(const Vec3T<T>& v, const T& s) { return {v.x * s, v.y * s, v.z * s}; }
template <class T>
    requires(!std::is_same_v<T, double>)
Vec3T<T> operator*(double s, const Vec3T<T>& v) { return {T(s) * v.x, T(s) * v.y, T(s) * v.z}; }
template <class T> Vec3T<T> hadamard(const Vec3T<T>& a, const Vec3T<T>& b) { return {a.x * b.x, a.y * b.y, a.z * b.z}; }
template <class T> T dot(const Vec3T<T>& a, const Vec3T<T>& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
template <class T> Vec3T<T> cross(const Vec3T<T>& a, const Vec3T<T>& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <class T>
T norm(const Vec3T<T>& v) {
    using std::sqrt;
    return sqrt(dot(v, v));
}

template <class T>
Vec3T<T> normalize(const Vec3T<T>& v) {
    T n = norm(v);
    return {v.x / n, v.y / n, v.z / n};
}

template <class T>
Vec3T<T> mat_vec(const Mat3T<T>& m, const Vec3T<T>& v) {
    return {m(0, 0) * v.x + m(0, 1) * v.y + m(0, 2) * v.z,
            m(1, 0) * v.x + m(1, 1) * v.y + m(1, 2) * v.z,
            m(2, 0) * v.x + m(2, 1) * v.y + m(2, 2) * v.z};
}

template <class T>
Mat3T<T> mat_mul(const Mat3T<T>& a, const Mat3T<T>& b) {
    Mat3T<T> r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
    return r;
}

template <class T>
Mat3T<T> transpose(const Mat3T<T>& a) {
    Mat3T<T> r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a(j, i);
    return r;
}

// Rotation matrix of a unit quaternion (w, x, y, z).
template <class T>
Mat3T<T> quat_to_mat(const Vec4T<T>& q) {
    const T &w = q.w, &x = q.x, &y = q.y, &z = q.z;
    Mat3T<T> r;
    r(0, 0) = T(1.0) - T(2.0) * (y * y + z * z);
    r(0, 1) = T(2.0) * (x * y - w * z);
    r(0, 2) = T(2.0) * (x * z + w * y);
    r(1, 0) = T(2.0) * (x * y + w * z);
    r(1, 1) = T(1.0) - T(2.0) * (x * x + z * z);
    r(1, 2) = T(2.0) * (y * z - w * x);
    r(2, 0) = T(2.0) * (x * z - w * y);
    r(2, 1) = T(2.0) * (y * z + w * x);
    r(2, 2) = T(1.0) - T(2.0) * (x * x + y * y);
    return r;
}

template <class T>
Vec4T<T> quat_normalize(const Vec4T<T>& q) {
    using std::sqrt;
    T n = sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
    return {q.w / n, q.x / n, q.y / n, q.z / n};
}

inline double val(double x) { return x; }

inline double clamp(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

constexpr double kPi = 3.14159265358979323846;

}  // namespace sgs
