#include "fastflux/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <memory>

#include "fastflux/error.hpp"

namespace fastflux {

QuadratureRule gauss_legendre(std::size_t n, double a, double b)
{
    if (n == 0) throw Error(ErrorCode::invalid_argument, "Gauss-Legendre rule needs at least one node");
    std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
        gsl_integration_glfixed_table_alloc(n), &gsl_integration_glfixed_table_free);
    if (!table) throw Error(ErrorCode::invalid_argument, "GSL could not build a Gauss-Legendre table");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        gsl_integration_glfixed_point(a, b, i, &rule.nodes[i], &rule.weights[i], table.get());
    return rule;
}

QuadratureRule composite_gauss_legendre(const std::vector<double>& edges, std::size_t per_panel)
{
    QuadratureRule out;
    if (edges.size() < 2) return out;
    const QuadratureRule ref = gauss_legendre(per_panel, -1.0, 1.0);
    out.nodes.reserve((edges.size() - 1) * per_panel);
    out.weights.reserve((edges.size() - 1) * per_panel);
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double mid = 0.5 * (edges[p] + edges[p + 1]);
        const double half = 0.5 * (edges[p + 1] - edges[p]);
        for (std::size_t i = 0; i < per_panel; ++i) {
            out.nodes.push_back(mid + half * ref.nodes[i]);
            out.weights.push_back(half * ref.weights[i]);
        }
    }
    return out;
}

bool Cap::contains(const Vec3& direction) const
{
    if (half_angle >= pi) return true;
    return dot(normalized(direction), normalized(axis)) >= std::cos(half_angle) - 1e-14;
}

namespace {

void ring_rule(double u_min, std::size_t n_theta, std::size_t n_phi, const Vec3& axis,
                      std::vector<AngularNode>& nodes, std::vector<double>& cosines)
{
    const QuadratureRule gl = gauss_legendre(n_theta, u_min, 1.0);
    const Frame frame = Frame::about(axis);
    nodes.clear();
    cosines = gl.nodes;
    for (std::size_t r = 0; r < n_theta; ++r) {
        const double u = gl.nodes[r];
        const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
        for (std::size_t j = 0; j < n_phi; ++j) {
            const double phi = 2.0 * pi * static_cast<double>(j) / static_cast<double>(n_phi);
            nodes.push_back({frame.to_world({s * std::cos(phi), s * std::sin(phi), u}),
                             gl.weights[r] * 2.0 * pi / static_cast<double>(n_phi)});
        }
    }
}

}  // namespace

AngularRule AngularRule::product(std::size_t n_theta, std::size_t n_phi, const Vec3& axis)
{
    return cap(Cap{axis, pi}, n_theta, n_phi);
}

AngularRule AngularRule::cap(const Cap& c, std::size_t n_theta, std::size_t n_phi)
{
    if (n_theta == 0 || n_phi == 0) throw Error(ErrorCode::invalid_argument, "angular rule needs nodes");
    if (!(c.half_angle > 0.0) || c.half_angle > pi)
        throw Error(ErrorCode::invalid_argument, "cap half-angle must lie in (0, pi]");
    AngularRule rule;
    const double u_min = c.half_angle >= pi ? -1.0 : std::cos(c.half_angle);
    ring_rule(u_min, n_theta, n_phi, c.axis, rule.nodes_, rule.ring_cosines_);
    rule.ring_size_ = n_phi;
    rule.axis_ = normalized(c.axis);
    rule.degree_ = static_cast<int>(std::min(2 * n_theta - 1, n_phi - 1));
    return rule;
}

AngularRule AngularRule::lebedev26()
{
    std::vector<AngularNode> nodes;
    const double a1 = 4.0 * pi / 21.0;
    const double a2 = 4.0 * pi * 4.0 / 105.0;
    const double a3 = 4.0 * pi * 9.0 / 280.0;
    for (int axis = 0; axis < 3; ++axis)
        for (double s : {1.0, -1.0}) {
            Vec3 d{0.0, 0.0, 0.0};
            d[axis] = s;
            nodes.push_back({d, a1});
        }
    const double h = 1.0 / std::sqrt(2.0);
    for (int zero = 2; zero >= 0; --zero)
        for (double s1 : {1.0, -1.0})
            for (double s2 : {1.0, -1.0}) {
                Vec3 d{0.0, 0.0, 0.0};
                const int p = zero == 0 ? 1 : 0;
                const int q = zero == 2 ? 1 : 2;
                d[p] = s1 * h;
                d[q] = s2 * h;
                nodes.push_back({d, a2});
            }
    const double c = 1.0 / std::sqrt(3.0);
    for (double s1 : {1.0, -1.0})
        for (double s2 : {1.0, -1.0})
            for (double s3 : {1.0, -1.0}) nodes.push_back({{s1 * c, s2 * c, s3 * c}, a3});
    return from_nodes(std::move(nodes), 7);
}

AngularRule AngularRule::from_nodes(std::vector<AngularNode> nodes, int degree)
{
    AngularRule rule;
    rule.nodes_ = std::move(nodes);
    rule.degree_ = degree;
    return rule;
}

double AngularRule::total_weight() const
{
    double s = 0.0;
    for (const auto& n : nodes_) s += n.weight;
    return s;
}

SphericalKGrid::SphericalKGrid(std::vector<RadialNode> radial, AngularRule angular, int radial_degree)
    : radial_(std::move(radial)), angular_(std::move(angular)), radial_degree_(radial_degree)
{
    if (radial_.empty() || angular_.size() == 0)
        throw Error(ErrorCode::invalid_argument, "spherical k-grid needs radial and angular nodes");
    for (const auto& r : radial_)
        if (!(r.k > 0.0)) throw Error(ErrorCode::invalid_argument, "radial k-nodes must be strictly positive");
    std::sort(radial_.begin(), radial_.end(), [](const RadialNode& a, const RadialNode& b) { return a.k < b.k; });
}

SphericalKGrid SphericalKGrid::gauss(double k_min, double k_max, std::size_t n_radial, AngularRule angular)
{
    if (!(k_min >= 0.0) || !(k_max > k_min))
        throw Error(ErrorCode::invalid_argument, "radial interval must satisfy 0 <= k_min < k_max");
    const QuadratureRule gl = gauss_legendre(n_radial, k_min, k_max);
    std::vector<RadialNode> radial;
    for (std::size_t i = 0; i < n_radial; ++i) radial.push_back({gl.nodes[i], gl.weights[i]});
    return SphericalKGrid(std::move(radial), std::move(angular), static_cast<int>(2 * n_radial - 1));
}

SphericalQuadResult quad_spherical(const std::vector<cplx>& values, const AngularRule& rule,
                                   const std::optional<Cap>& cap)
{
    if (values.size() != rule.size())
        throw Error(ErrorCode::grid_mismatch, "direction values do not match the angular rule");
    SphericalQuadResult out;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        if (cap && !cap->contains(rule[i].direction)) continue;
        out.value += rule[i].weight * values[i];
        ++inside;
    }
    out.empty = inside == 0;
    return out;
}

SphericalQuadResult quad_spherical(const std::function<cplx(const Vec3&)>& f, const Cap& cap,
                                   std::size_t n_theta, std::size_t n_phi)
{
    const AngularRule rule = AngularRule::cap(cap, n_theta, n_phi);
    SphericalQuadResult out;
    for (const auto& node : rule.nodes()) out.value += node.weight * f(node.direction);
    return out;
}

ChebyshevBasis ChebyshevBasis::make(std::size_t n, double a, double b)
{
    if (n < 2) throw Error(ErrorCode::invalid_argument, "Chebyshev basis needs at least two points");
    const std::size_t N = n - 1;
    ChebyshevBasis basis;
    basis.points.resize(n);
    basis.diff.assign(n * n, 0.0);
    std::vector<double> xi(n), c(n, 1.0);
    c[0] = c[N] = 2.0;
    for (std::size_t j = 0; j < n; ++j) xi[j] = std::cos(pi * static_cast<double>(j) / static_cast<double>(N));
    const double scale = 2.0 / (b - a);
    for (std::size_t i = 0; i < n; ++i) {
        basis.points[i] = a + 0.5 * (b - a) * (1.0 + xi[i]);
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            const double v = c[i] / c[j] * sign / (xi[i] - xi[j]);
            basis.diff[i * n + j] = v * scale;
            row += v;
        }
        basis.diff[i * n + i] = -row * scale;
    }
    return basis;
}

}  // namespace fastflux
