#pragma once

#include <cstddef>
#include <vector>

#include "fastflux/vec.hpp"

namespace fastflux {

// Uniform cubic grid centred at the origin: x_i = -L + i*h, h = 2L/n.
class CartesianGrid {
public:
    CartesianGrid(double half_width, std::size_t points_per_axis);

    double half_width() const noexcept { return half_width_; }
    std::size_t points_per_axis() const noexcept { return n_; }
    double spacing() const noexcept { return 2.0 * half_width_ / static_cast<double>(n_); }
    double cell_volume() const noexcept
    {
        const double h = spacing();
        return h * h * h;
    }
    std::size_t size() const noexcept { return n_ * n_ * n_; }
    bool is_power_of_two() const noexcept { return (n_ & (n_ - 1)) == 0; }

    double coordinate(std::size_t i) const noexcept { return -half_width_ + static_cast<double>(i) * spacing(); }
    std::size_t index(std::size_t i, std::size_t j, std::size_t l) const noexcept { return (i * n_ + j) * n_ + l; }
    Vec3 point(std::size_t i, std::size_t j, std::size_t l) const noexcept
    {
        return {coordinate(i), coordinate(j), coordinate(l)};
    }
    Vec3 point(std::size_t flat) const noexcept { return point(flat / (n_ * n_), (flat / n_) % n_, flat % n_); }

    // Dual momentum grid: k_m = (m - n/2) * pi/L.
    double momentum_spacing() const noexcept { return pi / half_width_; }
    double momentum(std::size_t m) const noexcept
    {
        return (static_cast<double>(m) - static_cast<double>(n_ / 2)) * momentum_spacing();
    }
    Vec3 momentum_point(std::size_t flat) const noexcept
    {
        return {momentum(flat / (n_ * n_)), momentum((flat / n_) % n_), momentum(flat % n_)};
    }
    double nyquist() const noexcept { return pi / spacing(); }

    bool operator==(const CartesianGrid& other) const noexcept
    {
        return n_ == other.n_ && half_width_ == other.half_width_;
    }

private:
    double half_width_;
    std::size_t n_;
};

class ComplexField3D {
public:
    explicit ComplexField3D(const CartesianGrid& grid);
    ComplexField3D(const CartesianGrid& grid, std::vector<cplx> values);

    template <class F>
    static ComplexField3D sample(const CartesianGrid& grid, F&& f)
    {
        ComplexField3D out(grid);
        for (std::size_t i = 0; i < grid.size(); ++i) out.values_[i] = f(grid.point(i));
        return out;
    }

    const CartesianGrid& grid() const noexcept { return grid_; }
    std::vector<cplx>& values() noexcept { return values_; }
    const std::vector<cplx>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    cplx& operator[](std::size_t i) noexcept { return values_[i]; }
    const cplx& operator[](std::size_t i) const noexcept { return values_[i]; }

    double norm_squared() const;
    double norm() const;
    double max_abs() const;
    // Fraction of the squared norm carried by the outermost `layers` shells of the box.
    double boundary_mass_fraction(std::size_t layers = 2) const;

    ComplexField3D& operator+=(const ComplexField3D& other);
    ComplexField3D& operator-=(const ComplexField3D& other);
    ComplexField3D& operator*=(cplx s);

private:
    CartesianGrid grid_;
    std::vector<cplx> values_;
};

ComplexField3D operator+(ComplexField3D a, const ComplexField3D& b);
ComplexField3D operator-(ComplexField3D a, const ComplexField3D& b);

// L2 distance and inner product <a, b> = ∫ conj(a) b.
double distance(const ComplexField3D& a, const ComplexField3D& b);
cplx inner(const ComplexField3D& a, const ComplexField3D& b);

void require_same_grid(const CartesianGrid& a, const CartesianGrid& b, const char* where);

}  // namespace fastflux
