#include "fastflux/packets.hpp"

#include "fastflux/error.hpp"

namespace fastflux {

cplx GaussianPacket::operator()(const Vec3& x) const
{
    const Vec3 d = x - center;
    return std::pow(2.0 * pi * sigma * sigma, -0.75) * std::exp(-dot(d, d) / (4.0 * sigma * sigma)) *
           std::polar(1.0, dot(momentum, x));
}

cplx GaussianPacket::transform(const Vec3& k) const
{
    const Vec3 q = k - momentum;
    return std::pow(2.0 * sigma * sigma / pi, 0.75) * std::exp(-sigma * sigma * dot(q, q)) *
           std::polar(1.0, -dot(q, center));
}

MomentumSymbol GaussianPacket::symbol() const
{
    const GaussianPacket p = *this;
    // |ψ̂|² < 1e-40 beyond this distance from k₀.
    const double reach = std::sqrt(std::log(1e20)) / sigma;
    return MomentumSymbol::pointwise("gaussian_packet", [p](const Vec3& k) { return p.transform(k); },
                                     norm(momentum) + reach);
}

ComplexField3D GaussianPacket::sample(const CartesianGrid& grid) const
{
    if (!(sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "packet width must be positive");
    ComplexField3D f = ComplexField3D::sample(grid, [this](const Vec3& x) { return (*this)(x); });
    const double n = f.norm();
    if (!(n > 0.0)) throw Error(ErrorCode::under_resolved, "packet vanishes on the grid");
    f *= 1.0 / n;
    return f;
}

}  // namespace fastflux
