#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "fastflux/vec.hpp"

namespace fastflux {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss–Legendre rule with n nodes on [a, b].
QuadratureRule gauss_legendre(std::size_t n, double a, double b);

// Composite Gauss–Legendre over the panel boundaries `edges`.
QuadratureRule composite_gauss_legendre(const std::vector<double>& edges, std::size_t per_panel);

struct AngularNode {
    Vec3 direction;
    double weight;
};

// Directional region {ω : ω·axis ≥ cos(half_angle)}; half_angle = π is the full sphere.
struct Cap {
    Vec3 axis{0.0, 0.0, 1.0};
    double half_angle = pi;

    bool contains(const Vec3& direction) const;
    double solid_angle() const { return 2.0 * pi * (1.0 - std::cos(half_angle)); }
};

// Rule on the unit sphere (or on a cap of it). Product rules are stored ring by ring:
// node (ring, j) has polar cosine ring_cosine(ring) about axis() and azimuth 2πj/ring_size().
class AngularRule {
public:
    static AngularRule product(std::size_t n_theta, std::size_t n_phi, const Vec3& axis = {0.0, 0.0, 1.0});
    static AngularRule cap(const Cap& cap, std::size_t n_theta, std::size_t n_phi);
    static AngularRule lebedev26();
    static AngularRule from_nodes(std::vector<AngularNode> nodes, int degree);

    const std::vector<AngularNode>& nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    const AngularNode& operator[](std::size_t i) const noexcept { return nodes_[i]; }
    int degree() const noexcept { return degree_; }
    double total_weight() const;

    bool has_rings() const noexcept { return ring_size_ > 0; }
    std::size_t ring_count() const noexcept { return ring_cosines_.size(); }
    std::size_t ring_size() const noexcept { return ring_size_; }
    double ring_cosine(std::size_t ring) const { return ring_cosines_[ring]; }
    const Vec3& axis() const noexcept { return axis_; }

private:
    std::vector<AngularNode> nodes_;
    int degree_ = 0;
    std::vector<double> ring_cosines_;
    std::size_t ring_size_ = 0;
    Vec3 axis_{0.0, 0.0, 1.0};
};

struct RadialNode {
    double k;
    double weight;
};

// Tensor rule for ∫ d³k: radial nodes carry plain Gauss weights, the k² Jacobian is applied in weight().
class SphericalKGrid {
public:
    SphericalKGrid(std::vector<RadialNode> radial, AngularRule angular, int radial_degree);
    static SphericalKGrid gauss(double k_min, double k_max, std::size_t n_radial, AngularRule angular);

    const std::vector<RadialNode>& radial() const noexcept { return radial_; }
    const AngularRule& angular() const noexcept { return angular_; }
    std::size_t radial_count() const noexcept { return radial_.size(); }
    std::size_t angular_count() const noexcept { return angular_.size(); }
    std::size_t size() const noexcept { return radial_.size() * angular_.size(); }
    int radial_degree() const noexcept { return radial_degree_; }

    std::size_t radial_index(std::size_t node) const noexcept { return node / angular_.size(); }
    std::size_t angular_index(std::size_t node) const noexcept { return node % angular_.size(); }
    Vec3 node(std::size_t i) const noexcept
    {
        return radial_[radial_index(i)].k * angular_[angular_index(i)].direction;
    }
    double weight(std::size_t i) const noexcept
    {
        const auto& r = radial_[radial_index(i)];
        return r.weight * r.k * r.k * angular_[angular_index(i)].weight;
    }
    double k_min() const noexcept { return radial_.front().k; }
    double k_max() const noexcept { return radial_.back().k; }

private:
    std::vector<RadialNode> radial_;
    AngularRule angular_;
    int radial_degree_;
};

struct SphericalQuadResult {
    cplx value{0.0, 0.0};
    bool empty = false;  // no node of the rule falls inside the cap
};

// Σ w_i f_i over the rule's nodes, restricted to `cap` when given.
SphericalQuadResult quad_spherical(const std::vector<cplx>& values, const AngularRule& rule,
                                   const std::optional<Cap>& cap = std::nullopt);

// Integral of f over a cap with a cap-adapted product rule.
SphericalQuadResult quad_spherical(const std::function<cplx(const Vec3&)>& f, const Cap& cap,
                                   std::size_t n_theta = 24, std::size_t n_phi = 48);

// Chebyshev–Gauss–Lobatto points on [a, b] (descending order) and the matching differentiation matrix.
struct ChebyshevBasis {
    std::vector<double> points;
    std::vector<double> diff;  // row-major n×n

    static ChebyshevBasis make(std::size_t n, double a, double b);
    std::size_t size() const noexcept { return points.size(); }
    double d(std::size_t i, std::size_t j) const noexcept { return diff[i * points.size() + j]; }
};

}  // namespace fastflux
