#include "fastflux/grid.hpp"

#include <algorithm>
#include <string>

#include "fastflux/error.hpp"

namespace fastflux {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::grid_mismatch: return "GridMismatch";
    case ErrorCode::not_power_of_two: return "NotPowerOfTwo";
    case ErrorCode::singular_system: return "SingularSystem";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::divergence: return "Divergence";
    case ErrorCode::under_resolved: return "UnderResolved";
    case ErrorCode::resolution_limited: return "ResolutionLimited";
    case ErrorCode::cap_outside_grid: return "CapOutsideGrid";
    case ErrorCode::tail_not_convergent: return "TailNotConvergent";
    case ErrorCode::cache_corrupt: return "CacheCorrupt";
    case ErrorCode::io: return "IoError";
    }
    return "Unknown";
}

CartesianGrid::CartesianGrid(double half_width, std::size_t points_per_axis)
    : half_width_(half_width), n_(points_per_axis)
{
    if (!(half_width > 0.0)) throw Error(ErrorCode::invalid_argument, "grid half-width must be positive");
    if (points_per_axis < 8 || points_per_axis % 2 != 0)
        throw Error(ErrorCode::invalid_argument,
                    "grid needs an even number of points per axis, at least 8 (got " +
                        std::to_string(points_per_axis) + ")");
}

ComplexField3D::ComplexField3D(const CartesianGrid& grid) : grid_(grid), values_(grid.size()) {}

ComplexField3D::ComplexField3D(const CartesianGrid& grid, std::vector<cplx> values)
    : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.size())
        throw Error(ErrorCode::grid_mismatch, "value count does not match grid size");
}

double ComplexField3D::norm_squared() const
{
    double s = 0.0;
    for (const auto& v : values_) s += std::norm(v);
    return s * grid_.cell_volume();
}

double ComplexField3D::norm() const { return std::sqrt(norm_squared()); }

double ComplexField3D::max_abs() const
{
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::abs(v));
    return m;
}

double ComplexField3D::boundary_mass_fraction(std::size_t layers) const
{
    const std::size_t n = grid_.points_per_axis();
    double edge = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t l = 0; l < n; ++l) {
                const double w = std::norm(values_[grid_.index(i, j, l)]);
                total += w;
                const auto near = [&](std::size_t a) { return a < layers || a + layers >= n; };
                if (near(i) || near(j) || near(l)) edge += w;
            }
    return total > 0.0 ? edge / total : 0.0;
}

void require_same_grid(const CartesianGrid& a, const CartesianGrid& b, const char* where)
{
    if (!(a == b)) throw Error(ErrorCode::grid_mismatch, std::string(where) + ": grids differ");
}

ComplexField3D& ComplexField3D::operator+=(const ComplexField3D& other)
{
    require_same_grid(grid_, other.grid_, "field addition");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

ComplexField3D& ComplexField3D::operator-=(const ComplexField3D& other)
{
    require_same_grid(grid_, other.grid_, "field subtraction");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

ComplexField3D& ComplexField3D::operator*=(cplx s)
{
    for (auto& v : values_) v *= s;
    return *this;
}

ComplexField3D operator+(ComplexField3D a, const ComplexField3D& b) { return a += b; }
ComplexField3D operator-(ComplexField3D a, const ComplexField3D& b) { return a -= b; }

double distance(const ComplexField3D& a, const ComplexField3D& b) { return (a - b).norm(); }

cplx inner(const ComplexField3D& a, const ComplexField3D& b)
{
    require_same_grid(a.grid(), b.grid(), "inner product");
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s * a.grid().cell_volume();
}

}  // namespace fastflux
