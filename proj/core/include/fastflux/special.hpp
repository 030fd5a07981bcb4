#pragma once

#include <cstddef>
#include <vector>

#include "fastflux/vec.hpp"

namespace fastflux {

// Spherical Bessel functions j_l(x), y_l(x) for l = 0..l_max at x > 0.
// j_l uses Miller's downward recurrence once l exceeds x; y_l is recurred upward.
void spherical_bessel_j(int l_max, double x, std::vector<double>& j);
void spherical_bessel_y(int l_max, double x, std::vector<double>& y);

// Derivatives from the values: f_l' = f_{l-1} − (l+1)/x·f_l, f_0' = −f_1.
void spherical_bessel_derivative(int l_max, double x, const std::vector<double>& f, std::vector<double>& df);

// Legendre polynomials P_0..P_lmax at u.
void legendre(int l_max, double u, std::vector<double>& p);

// Orthonormal real spherical harmonics S_lm(ω), packed at index l² + l + m, m = −l..l.
// Σ_m S_lm(a)S_lm(b) = (2l+1)/(4π)·P_l(a·b).
void real_spherical_harmonics(int l_max, const Vec3& direction, std::vector<double>& s);

inline std::size_t sh_index(int l, int m) { return static_cast<std::size_t>(l * l + l + m); }

}  // namespace fastflux
