#include "fastflux/potentials.hpp"

#include <cstdio>
#include <limits>

#include "fastflux/error.hpp"
#include "fastflux/quadrature.hpp"

namespace fastflux {

double PotentialDescriptor::param(const std::string& name, double fallback) const
{
    for (const auto& [k, v] : params)
        if (k == name) return v;
    return fallback;
}

std::string PotentialDescriptor::canonical() const
{
    std::string s = kind;
    char buf[64];
    for (const auto& [k, v] : params) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        s += ";" + k + "=" + buf;
    }
    return s;
}

Potential::Potential(PotentialDescriptor descriptor, Field field, Decay decay, std::vector<Vec3> singularities,
                     Profile radial, double support_radius, double max_abs)
    : descriptor_(std::move(descriptor)), field_(std::move(field)), decay_(decay),
      singularities_(std::move(singularities)), radial_(std::move(radial)), support_radius_(support_radius),
      max_abs_(max_abs)
{
    if (decay_.n < 2) throw Error(ErrorCode::invalid_argument, "decay order must be at least 2");
    if (!(decay_.epsilon > 0.0) || !(decay_.C0 > 0.0) || !(decay_.R0 > 0.0))
        throw Error(ErrorCode::invalid_argument, "decay epsilon, C0 and R0 must be positive");
}

Potential make_zero_potential()
{
    return Potential({"zero", {}}, [](const Vec3&) { return 0.0; }, {4, 1.0, 1.0, 1.0}, {},
                     [](double) { return 0.0; }, 0.0, 0.0);
}

Potential make_gaussian_potential(double amplitude, double width)
{
    if (!(width > 0.0)) throw Error(ErrorCode::invalid_argument, "Gaussian width must be positive");
    if (amplitude == 0.0) {
        Potential z = make_zero_potential();
        return Potential({"gaussian", {{"amplitude", 0.0}, {"width", width}}}, [](const Vec3&) { return 0.0; },
                         z.decay(), {}, [](double) { return 0.0; }, 0.0, 0.0);
    }
    const double R0 = 5.0 * width;
    // e^{-r²/2w²}⟨r⟩^5 decreases for r ≥ R0 since 1 + R0² > 5w², so the sup sits at R0.
    const double C0 = std::abs(amplitude) * std::exp(-0.5 * R0 * R0 / (width * width)) * std::pow(bracket(R0), 5) *
                      (1.0 + 1e-9);
    const double inv = 1.0 / (2.0 * width * width);
    auto profile = [amplitude, inv](double r) { return amplitude * std::exp(-r * r * inv); };
    auto field = [amplitude, inv](const Vec3& x) { return amplitude * std::exp(-dot(x, x) * inv); };
    const double support = width * std::sqrt(2.0 * std::log(1e14));
    return Potential({"gaussian", {{"amplitude", amplitude}, {"width", width}}}, field, {4, 1.0, C0, R0}, {},
                     profile, support, std::abs(amplitude));
}

Potential make_power_law_potential(double amplitude, double power, int claimed_n, double claimed_epsilon, double R0)
{
    auto profile = [amplitude, power](double r) { return amplitude * std::pow(bracket(r), -power); };
    auto field = [profile](const Vec3& x) { return profile(norm(x)); };
    const double support = std::pow(1e14, 1.0 / power);
    return Potential({"power_law",
                      {{"amplitude", amplitude},
                       {"power", power},
                       {"claimed_n", static_cast<double>(claimed_n)},
                       {"claimed_epsilon", claimed_epsilon},
                       {"R0", R0}}},
                     field, {claimed_n, claimed_epsilon, std::max(std::abs(amplitude), 1e-300), R0}, {}, profile,
                     support, std::abs(amplitude));
}

Potential make_potential(const PotentialDescriptor& d)
{
    if (d.kind == "zero") return make_zero_potential();
    if (d.kind == "gaussian") return make_gaussian_potential(d.param("amplitude"), d.param("width", 1.0));
    if (d.kind == "power_law")
        return make_power_law_potential(d.param("amplitude", 1.0), d.param("power", 3.0),
                                        static_cast<int>(d.param("claimed_n", 4)), d.param("claimed_epsilon", 0.5),
                                        d.param("R0", 1.0));
    throw Error(ErrorCode::invalid_argument, "unknown potential kind '" + d.kind + "'");
}

const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::indeterminate: return "indeterminate";
    }
    return "?";
}

ClassVnReport check_class_Vn(const Potential& V, int n, std::size_t n_radii)
{
    if (n < 2) throw Error(ErrorCode::invalid_argument, "class (V)_n needs n >= 2");
    if (n_radii < 2) throw Error(ErrorCode::invalid_argument, "need at least two sample radii");
    const auto& d = V.decay();
    ClassVnReport rep;
    for (const auto& s : V.singularities()) {
        const double r = norm(s);
        if (r >= d.R0 && r <= 10.0 * d.R0) {
            rep.verdict = Verdict::indeterminate;
            rep.message = "singularity inside the sampled shell";
            return rep;
        }
    }
    const AngularRule dirs = AngularRule::product(4, 8);
    std::vector<Vec3> directions;
    for (const auto& nd : dirs.nodes()) directions.push_back(nd.direction);
    const AngularRule lebedev = AngularRule::lebedev26();
    for (const auto& nd : lebedev.nodes()) directions.push_back(nd.direction);

    const double exponent = n + d.epsilon;
    const double lo = std::log(d.R0), hi = std::log(10.0 * d.R0);
    for (std::size_t i = 0; i < n_radii; ++i) {
        const double r = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_radii - 1));
        const double env = std::pow(bracket(r), exponent) / d.C0;
        for (const auto& w : directions) {
            const Vec3 x = r * w;
            const double ratio = std::abs(V(x)) * env;
            if (ratio > rep.worst_ratio) {
                rep.worst_ratio = ratio;
                rep.worst_point = x;
            }
        }
    }

    // ∫|V|² over the ball of radius 10·R0 (radial Gauss–Legendre on log-spaced panels × product rule).
    std::vector<double> edges{0.0};
    for (double r = std::min(0.5, d.R0); r < 10.0 * d.R0; r *= 2.0) edges.push_back(r);
    edges.push_back(10.0 * d.R0);
    const auto radial = composite_gauss_legendre(edges, 16);
    double l2 = 0.0;
    for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
        const double r = radial.nodes[i];
        double shell = 0.0;
        for (const auto& nd : dirs.nodes()) {
            const double v = V(r * nd.direction);
            shell += nd.weight * v * v;
        }
        l2 += radial.weights[i] * r * r * shell;
    }
    rep.l2_norm = std::sqrt(l2);
    if (!std::isfinite(rep.l2_norm)) {
        rep.verdict = Verdict::fail;
        rep.message = "potential is not square integrable on the sampled ball";
        return rep;
    }
    rep.verdict = rep.worst_ratio <= 1.0 + 1e-12 ? Verdict::pass : Verdict::fail;
    if (rep.verdict == Verdict::fail) rep.message = "decay envelope exceeded";
    return rep;
}

cplx PointInteraction::amplitude(double k, int sign) const
{
    if (is_free()) return 0.0;
    return 1.0 / (4.0 * pi * alpha + static_cast<double>(sign) * I * k);
}

}  // namespace fastflux
