#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "fastflux/grid.hpp"

namespace fastflux {

// Direct sums S(q) = Σ_{ijl} v_{ijl} exp(sign·i q·c_{ijl}) over a cubic lattice with per-axis
// coordinates `coords`, evaluated at arbitrary q. Points sharing q_z share the innermost contraction,
// so rings of a product rule about the z-axis cost one lattice pass each.
struct LatticeSum {
    cplx value;
    std::array<cplx, 3> moment;  // Σ c_a v exp(...), filled only when requested
};

std::vector<cplx> lattice_sum(const std::vector<cplx>& v, const std::vector<double>& coords,
                              const std::vector<Vec3>& q, int sign);
std::vector<LatticeSum> lattice_sum_with_moments(const std::vector<cplx>& v, const std::vector<double>& coords,
                                                 const std::vector<Vec3>& q, int sign);

// Transpose operation: field(c_{ijl}) = Σ_q a_q exp(sign·i q·c_{ijl}) accumulated into `out`.
void lattice_synthesis(const std::vector<Vec3>& q, const std::vector<cplx>& a, const std::vector<double>& coords,
                       int sign, std::vector<cplx>& out);

// (2π)^{-3/2} h³ Σ_x e^{-ik·x} f(x) at arbitrary k: the same quadrature as fft_forward.
std::vector<cplx> fourier_at(const ComplexField3D& field, const std::vector<Vec3>& ks);

// Band-limited evaluation of a grid function at arbitrary points (trigonometric interpolation).
std::vector<cplx> interpolate_at(const ComplexField3D& field, const std::vector<Vec3>& points);

std::vector<double> grid_coordinates(const CartesianGrid& grid);

}  // namespace fastflux
