#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace fastflux {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator-(const Vec3& a) { return {-a[0], -a[1], -a[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec3 operator*(const Vec3& a, double s) { return s * a; }

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline Vec3 normalized(const Vec3& a)
{
    const double n = norm(a);
    return n > 0.0 ? (1.0 / n) * a : Vec3{0.0, 0.0, 1.0};
}

// ⟨r⟩ = (1 + r²)^{1/2}
inline double bracket(double r) { return std::sqrt(1.0 + r * r); }

// Orthonormal frame (e1, e2, axis) with axis as the third vector.
struct Frame {
    Vec3 e1, e2, e3;

    static Frame about(const Vec3& axis)
    {
        const Vec3 a = normalized(axis);
        const Vec3 helper = std::abs(a[2]) < 0.9 ? Vec3{0.0, 0.0, 1.0} : Vec3{1.0, 0.0, 0.0};
        Vec3 e1 = normalized(cross(helper, a));
        Vec3 e2 = cross(a, e1);
        return {e1, e2, a};
    }

    Vec3 to_world(const Vec3& local) const { return local[0] * e1 + local[1] * e2 + local[2] * e3; }
};

}  // namespace fastflux
