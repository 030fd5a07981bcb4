#include "fastflux/partial_waves.hpp"

#include <algorithm>

#include "fastflux/error.hpp"
#include "fastflux/quadrature.hpp"
#include "fastflux/special.hpp"

namespace fastflux {

namespace {

cplx hankel(int sign, double j, double y) { return {j, -static_cast<double>(sign) * y}; }

// Riccati–Bessel ĵ = x j_l, n̂ = x y_l and their x-derivatives.
struct Riccati {
    double j, dj, n, dn;
};

Riccati riccati(int l, double x)
{
    std::vector<double> jv, yv, djv, dyv;
    spherical_bessel_j(std::max(l, 1), x, jv);
    spherical_bessel_y(std::max(l, 1), x, yv);
    spherical_bessel_derivative(std::max(l, 1), x, jv, djv);
    spherical_bessel_derivative(std::max(l, 1), x, yv, dyv);
    return {x * jv[l], jv[l] + x * djv[l], x * yv[l], yv[l] + x * dyv[l]};
}

}  // namespace

RadialChannels RadialChannels::free(double k, int sign)
{
    RadialChannels ch;
    ch.k_ = k;
    ch.sign_ = sign;
    ch.delta_ = {0.0};
    ch.coeff_ = {0.0};
    ch.phase_ = {1.0};
    return ch;
}

RadialChannels RadialChannels::point_interaction(const PointInteraction& p, double k, int sign)
{
    if (!(k > 0.0)) throw Error(ErrorCode::invalid_argument, "channels need k > 0");
    if (p.is_free()) return free(k, sign);
    RadialChannels ch;
    ch.k_ = k;
    ch.sign_ = sign;
    // k·cot δ = 4πα
    const double delta = std::atan2(k, 4.0 * pi * p.alpha);
    ch.delta_ = {delta};
    ch.phase_ = {std::polar(1.0, -sign * delta)};
    ch.coeff_ = {-static_cast<double>(sign) * I * ch.phase_[0] * std::sin(delta)};
    return ch;
}

RadialChannels RadialChannels::solve(const Potential& V, double k, int sign, const PartialWaveOptions& opt)
{
    if (!(k > 0.0)) throw Error(ErrorCode::invalid_argument, "channels need k > 0");
    if (!V.is_radial()) throw Error(ErrorCode::invalid_argument, "partial waves need a radially symmetric potential");
    if (V.is_zero()) return free(k, sign);

    RadialChannels ch;
    ch.k_ = k;
    ch.sign_ = sign;
    const double r_match = V.support_radius();
    const std::size_t stored = static_cast<std::size_t>(std::ceil(r_match / std::min(opt.store_spacing, 0.02 / k)));
    const std::size_t stride =
        static_cast<std::size_t>(std::ceil(r_match / static_cast<double>(stored) / std::min(opt.dr_max, 0.004 / k)));
    const std::size_t steps = stored * stride;
    const double dr = r_match / static_cast<double>(steps);
    ch.dr_ = dr * static_cast<double>(stride);
    ch.r_match_ = r_match;

    std::vector<double> v_half(2 * steps + 1);
    for (std::size_t i = 0; i <= 2 * steps; ++i) v_half[i] = 2.0 * V.radial(0.5 * dr * static_cast<double>(i));
    const double k2 = k * k;

    for (int l = 0; l <= opt.l_cap; ++l) {
        const double ll = l * (l + 1.0);
        std::vector<double> u(steps + 1), du(steps + 1);
        std::size_t first;
        if (l == 0) {
            u[0] = 0.0;
            du[0] = 1.0;
            first = 0;
        } else {
            u[0] = 0.0;
            du[0] = 0.0;
            const double c = (v_half[0] - k2) / (2.0 * (2.0 * l + 3.0));
            const double r = dr;
            const double rl = std::pow(r, l);
            u[1] = rl * r * (1.0 + c * r * r);
            du[1] = (l + 1.0) * rl + (l + 3.0) * c * rl * r * r;
            first = 1;
        }
        auto accel = [&](std::size_t half_index, double r, double y) {
            const double cent = r > 0.0 ? ll / (r * r) : 0.0;
            return (cent + v_half[half_index] - k2) * y;
        };
        for (std::size_t i = first; i < steps; ++i) {
            const double r = dr * static_cast<double>(i);
            const double y = u[i], p = du[i];
            const double k1y = p, k1p = accel(2 * i, r, y);
            const double k2y = p + 0.5 * dr * k1p, k2p = accel(2 * i + 1, r + 0.5 * dr, y + 0.5 * dr * k1y);
            const double k3y = p + 0.5 * dr * k2p, k3p = accel(2 * i + 1, r + 0.5 * dr, y + 0.5 * dr * k2y);
            const double k4y = p + dr * k3p, k4p = accel(2 * i + 2, r + dr, y + dr * k3y);
            u[i + 1] = y + dr / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            du[i + 1] = p + dr / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        }
        const Riccati rb = riccati(l, k * r_match);
        const double a = u[steps] * rb.dn - du[steps] / k * rb.n;
        const double b = du[steps] / k * rb.j - u[steps] * rb.dj;
        const double amp = std::hypot(a, b);
        if (!(amp > 0.0) || !std::isfinite(amp))
            throw Error(ErrorCode::no_convergence, "radial matching failed at l = " + std::to_string(l));
        const double delta = std::atan2(-b, a);
        std::vector<double> us(stored + 1), dus(stored + 1);
        for (std::size_t i = 0; i <= stored; ++i) {
            us[i] = u[i * stride] / amp;
            dus[i] = du[i * stride] / amp;
        }
        ch.delta_.push_back(delta);
        ch.phase_.push_back(std::polar(1.0, -sign * delta));
        ch.coeff_.push_back(-static_cast<double>(sign) * I * ch.phase_.back() * std::sin(delta));
        ch.u_.push_back(std::move(us));
        ch.du_.push_back(std::move(dus));
        if (l >= 1 && std::abs(std::sin(delta)) < opt.phase_floor && static_cast<double>(l) > 0.5 * k * r_match) break;
    }
    return ch;
}

void RadialChannels::evaluate(double r, std::vector<cplx>& g, std::vector<cplx>* dg) const
{
    const int lm = l_max();
    g.assign(static_cast<std::size_t>(lm) + 1, 0.0);
    if (dg) dg->assign(static_cast<std::size_t>(lm) + 1, 0.0);
    const double x = k_ * r;
    if (r >= r_match_) {
        if (coeff_.size() == 1 && coeff_[0] == cplx{}) return;
        if (r <= 0.0) throw Error(ErrorCode::invalid_argument, "point interaction channels are singular at the centre");
        const int lb = std::max(lm, 1);
        std::vector<double> jv, yv, djv, dyv;
        spherical_bessel_j(lb, x, jv);
        spherical_bessel_y(lb, x, yv);
        if (dg) {
            spherical_bessel_derivative(lb, x, jv, djv);
            spherical_bessel_derivative(lb, x, yv, dyv);
        }
        for (int l = 0; l <= lm; ++l) {
            if (coeff_[l] == cplx{}) continue;
            g[l] = coeff_[l] * hankel(sign_, jv[l], yv[l]);
            if (dg) (*dg)[l] = coeff_[l] * k_ * hankel(sign_, djv[l], dyv[l]);
        }
        return;
    }
    // Interior: e^{-i·sign·δ}·u/(kr) − j_l(kr), with u interpolated by cubic Hermite.
    const int lb = std::max(lm, 1);
    std::vector<double> jv, djv;
    spherical_bessel_j(lb, x, jv);
    if (dg) spherical_bessel_derivative(lb, std::max(x, 1e-300), jv, djv);
    if (r < 1e-12) {
        g[0] = phase_[0] * du_[0][0] / k_ - 1.0;
        return;
    }
    const double s = r / dr_;
    const std::size_t i = std::min(static_cast<std::size_t>(s), u_[0].size() - 2);
    const double t = s - static_cast<double>(i);
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    const double d00 = 6 * t * (t - 1), d10 = (1 - t) * (1 - 3 * t);
    const double d01 = 6 * t * (1 - t), d11 = t * (3 * t - 2);
    for (int l = 0; l <= lm; ++l) {
        const auto& u = u_[l];
        const auto& du = du_[l];
        const double uv = h00 * u[i] + h10 * dr_ * du[i] + h01 * u[i + 1] + h11 * dr_ * du[i + 1];
        g[l] = phase_[l] * uv / x - jv[l];
        if (dg) {
            const double duv = (d00 * u[i] + d10 * dr_ * du[i] + d01 * u[i + 1] + d11 * dr_ * du[i + 1]) / dr_;
            (*dg)[l] = phase_[l] * (duv / x - uv / (x * r)) - k_ * djv[l];
        }
    }
}

double radial_ls_residual(const Potential& V, const RadialChannels& ch, const std::vector<double>& radii)
{
    if (V.is_zero()) return 0.0;
    const double k = ch.k();
    const int lm = ch.l_max();
    const int lb = std::max(lm, 1);
    const double r_max = V.support_radius();
    std::vector<double> edges;
    const std::size_t panels = static_cast<std::size_t>(std::ceil(r_max * std::max(1.0, k) / 0.5));
    for (std::size_t p = 0; p <= panels; ++p) edges.push_back(r_max * static_cast<double>(p) / panels);

    double worst = 0.0, scale = 0.0;
    std::vector<cplx> g, gr;
    std::vector<double> jv, yv, jr, yr;
    for (double r : radii) {
        ch.evaluate(r, gr);
        const double xr = k * r;
        spherical_bessel_j(lb, xr, jr);
        spherical_bessel_y(lb, std::max(xr, 1e-300), yr);
        // Split the integral at r so the kernel is smooth on each piece.
        std::vector<double> e;
        for (double v : edges)
            if (v < r) e.push_back(v);
        e.push_back(std::min(r, r_max));
        std::vector<double> e2{std::min(r, r_max)};
        for (double v : edges)
            if (v > r) e2.push_back(v);
        std::vector<cplx> rhs(static_cast<std::size_t>(lm) + 1, 0.0);
        auto accumulate = [&](const QuadratureRule& q, bool inner) {
            for (std::size_t n = 0; n < q.nodes.size(); ++n) {
                const double rho = q.nodes[n];
                if (rho <= 0.0) continue;
                ch.evaluate(rho, g);
                spherical_bessel_j(lb, k * rho, jv);
                spherical_bessel_y(lb, k * rho, yv);
                const double w = q.weights[n] * V.radial(rho) * rho * rho;
                for (int l = 0; l <= lm; ++l) {
                    const cplx phi = jv[l] + g[l];
                    const cplx kern = inner ? jv[l] * hankel(ch.sign(), jr[l], yr[l])
                                            : jr[l] * hankel(ch.sign(), jv[l], yv[l]);
                    rhs[l] += w * kern * phi;
                }
            }
        };
        if (e.size() >= 2 && e.back() > e.front()) accumulate(composite_gauss_legendre(e, 24), true);
        if (e2.size() >= 2 && e2.back() > e2.front()) accumulate(composite_gauss_legendre(e2, 24), false);
        for (int l = 0; l <= lm; ++l) {
            const cplx expect = static_cast<double>(ch.sign()) * 2.0 * I * k * rhs[l];
            worst = std::max(worst, std::abs(gr[l] - expect) * (2 * l + 1));
            scale = std::max(scale, std::abs(gr[l]) * (2 * l + 1));
        }
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

}  // namespace fastflux
