#pragma once

#include "fastflux/grid.hpp"
#include "fastflux/momentum.hpp"

namespace fastflux {

// ψ(x) = (2πσ²)^{-3/4} e^{-|x−c|²/4σ²} e^{ik₀·x}: σ is the standard deviation of |ψ|² per axis.
struct GaussianPacket {
    Vec3 center{0.0, 0.0, 0.0};
    double sigma = 1.0;
    Vec3 momentum{0.0, 0.0, 0.0};

    cplx operator()(const Vec3& x) const;
    // Closed-form transform (2σ²/π)^{3/4} e^{-σ²|k−k₀|²} e^{-i(k−k₀)·c}.
    cplx transform(const Vec3& k) const;
    MomentumSymbol symbol() const;
    // Sampled and rescaled to unit discrete norm.
    ComplexField3D sample(const CartesianGrid& grid) const;
};

}  // namespace fastflux
