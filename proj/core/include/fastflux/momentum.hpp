#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "fastflux/grid.hpp"
#include "fastflux/quadrature.hpp"

namespace fastflux {

// The FFT dual of a position grid.
struct CartesianDual {
    CartesianGrid grid;
};

using MomentumLayout = std::variant<CartesianDual, std::shared_ptr<const SphericalKGrid>>;

bool same_layout(const MomentumLayout& a, const MomentumLayout& b);

class MomentumAmplitude {
public:
    MomentumAmplitude(MomentumLayout layout, std::vector<cplx> values);
    static MomentumAmplitude zeros(MomentumLayout layout);

    const MomentumLayout& layout() const noexcept { return layout_; }
    bool is_cartesian() const noexcept { return std::holds_alternative<CartesianDual>(layout_); }
    const CartesianGrid& dual_of() const { return std::get<CartesianDual>(layout_).grid; }
    const SphericalKGrid& spherical() const { return *std::get<std::shared_ptr<const SphericalKGrid>>(layout_); }

    std::vector<cplx>& values() noexcept { return values_; }
    const std::vector<cplx>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    cplx& operator[](std::size_t i) noexcept { return values_[i]; }
    const cplx& operator[](std::size_t i) const noexcept { return values_[i]; }

    Vec3 node(std::size_t i) const;
    double weight(std::size_t i) const;  // d³k quadrature weight
    double norm_squared() const;
    double norm() const;

private:
    MomentumLayout layout_;
    std::vector<cplx> values_;
};

std::size_t layout_size(const MomentumLayout& layout);

// A momentum amplitude evaluable anywhere, in batches. `cutoff` bounds the region where it is
// not negligible (infinite when unknown).
class MomentumSymbol {
public:
    using Batch = std::function<std::vector<cplx>(const std::vector<Vec3>&)>;

    MomentumSymbol(std::string name, Batch batch, double cutoff = std::numeric_limits<double>::infinity());
    static MomentumSymbol pointwise(std::string name, std::function<cplx(const Vec3&)> f,
                                    double cutoff = std::numeric_limits<double>::infinity());
    static MomentumSymbol zero();
    // e^{-|k−c|²/(2w²)}
    static MomentumSymbol gaussian(double width = 1.0, const Vec3& center = {0.0, 0.0, 0.0});
    // ⟨k⟩^{-p}
    static MomentumSymbol bracket_power(double p);
    // Fourier transform of a grid function, (2π)^{-3/2} h³ Σ e^{-ik·x} f(x).
    static MomentumSymbol fourier_of(const ComplexField3D& f);

    // χ(k)·e^{ik²s/2}
    MomentumSymbol time_shifted(double s) const;

    cplx operator()(const Vec3& k) const { return batch_({k})[0]; }
    std::vector<cplx> operator()(const std::vector<Vec3>& ks) const { return batch_(ks); }
    double cutoff() const noexcept { return cutoff_; }
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
    Batch batch_;
    double cutoff_;
};

}  // namespace fastflux
