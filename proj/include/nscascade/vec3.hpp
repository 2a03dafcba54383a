#pragma once

#include <cmath>

namespace nscascade {

/// Real 3-vector.  Used for Fourier-space wavenumbers and unit directions.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3& operator+=(const Vec3& o) noexcept { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) noexcept { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) noexcept { x *= s; y *= s; z *= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) noexcept { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) noexcept { return a -= b; }
    friend constexpr Vec3 operator*(double s, Vec3 a) noexcept { return a *= s; }
    friend constexpr Vec3 operator*(Vec3 a, double s) noexcept { return a *= s; }
    friend constexpr Vec3 operator-(const Vec3& a) noexcept { return {-a.x, -a.y, -a.z}; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

    constexpr double norm2() const noexcept { return x * x + y * y + z * z; }
    double norm() const noexcept { return std::hypot(x, y, z); }
};

using Wavenumber = Vec3;

constexpr double dot(const Vec3& a, const Vec3& b) noexcept { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) noexcept
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// Right-handed orthonormal frame (e, f, g) with e the given unit vector.
struct Frame {
    Vec3 e, f, g;
};

/// Branch-free frame construction (Duff et al. 2017); stable at both poles.
inline Frame orthonormal_frame(const Vec3& e) noexcept
{
    const double sign = std::copysign(1.0, e.z);
    const double a = -1.0 / (sign + e.z);
    const double b = e.x * e.y * a;
    return {e,
            {1.0 + sign * e.x * e.x * a, sign * b, -sign * e.x},
            {b, sign + e.y * e.y * a, -e.y}};
}

} // namespace nscascade
