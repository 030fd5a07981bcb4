#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "fastflux/grid.hpp"
#include "fastflux/momentum.hpp"

namespace fastflux {

// f̂(k) = (2π)^{-3/2} ∫ e^{-ik·x} f(x) d³x on the dual grid (discrete Plancherel holds exactly).
MomentumAmplitude fft_forward(const ComplexField3D& field);
ComplexField3D fft_inverse(const MomentumAmplitude& amp);

// Spectral derivatives; the Nyquist mode is dropped.
std::array<ComplexField3D, 3> gradient(const ComplexField3D& field);
ComplexField3D laplacian(const ComplexField3D& field);

// Exact free propagation e^{-i t H0} of the periodic grid function, H0 = -Δ/2.
ComplexField3D free_propagate(const ComplexField3D& field, double t);

namespace detail {

// Unnormalised in-place 3D DFT of a row-major n0×n1×n2 array; sign = -1 forward, +1 backward.
void fft3d(std::vector<cplx>& data, std::size_t n0, std::size_t n1, std::size_t n2, int sign);

}  // namespace detail

}  // namespace fastflux
