#include <gtest/gtest.h>

#include <cmath>

#include "fastflux/error.hpp"
#include "fastflux/fft.hpp"
#include "fastflux/flux.hpp"
#include "fastflux/packets.hpp"

using namespace fastflux;

namespace {

// Free Gaussian of width σ (|ψ|² std) and momentum k0 at time t, centred at the origin at t = 0.
cplx free_gaussian(const Vec3& x, double t, double sigma, const Vec3& k0)
{
    const cplx a = 1.0 + I * t / (2.0 * sigma * sigma);
    const Vec3 d = x - t * k0;
    return std::pow(2.0 * pi * sigma * sigma, -0.75) * std::pow(a, -1.5) *
           std::exp(-dot(d, d) / (4.0 * sigma * sigma * a)) * std::polar(1.0, dot(k0, x) - 0.5 * dot(k0, k0) * t);
}

const Cap full_sphere{};
const Cap upper{{0.0, 0.0, 1.0}, 0.5 * pi};
const Cap lower{{0.0, 0.0, -1.0}, 0.5 * pi};

}  // namespace

TEST(FluxDensity, RealFieldCarriesNoCurrent)
{
    const CartesianGrid g(8.0, 32);
    const auto psi = ComplexField3D::sample(g, [](const Vec3& x) { return cplx(std::exp(-dot(x, x) / 4.0)); });
    for (const auto& c : flux_density(psi))
        for (double v : c) EXPECT_EQ(v, 0.0);
}

TEST(FluxDensity, PlaneWaveCurrentIsItsMomentum)
{
    const CartesianGrid g(8.0, 32);
    const Vec3 k0{3 * g.momentum_spacing(), -2 * g.momentum_spacing(), g.momentum_spacing()};
    const auto psi = ComplexField3D::sample(g, [&](const Vec3& x) { return std::polar(1.0, dot(k0, x)); });
    const auto j = flux_density(psi);
    for (int a = 0; a < 3; ++a)
        for (double v : j[a]) EXPECT_NEAR(v, k0[a], 1e-10);
}

TEST(FluxDensity, SpreadingGaussianDrift)
{
    const CartesianGrid g(16.0, 64);
    const double t = 2.0, sigma = 1.0;
    const Vec3 k0{0.0, 0.5, 1.0};
    const auto psi = ComplexField3D::sample(g, [&](const Vec3& x) { return free_gaussian(x, t, sigma, k0); });
    const auto j = flux_density(psi);
    double worst = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        const Vec3 x = g.point(p);
        const Vec3 v = k0 + (t / (4.0 * std::pow(sigma, 4) + t * t)) * (x - t * k0);
        for (int a = 0; a < 3; ++a) worst = std::max(worst, std::abs(j[a][p] - std::norm(psi[p]) * v[a]));
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(SurfaceFlux, RealFieldGivesZero)
{
    const CartesianGrid g(8.0, 32);
    const auto psi = ComplexField3D::sample(g, [](const Vec3& x) { return cplx(std::exp(-dot(x, x) / 4.0)); });
    const auto f = surface_flux(psi, DetectorCap{full_sphere, 3.0});
    EXPECT_NEAR(f.signed_flux, 0.0, 1e-14);
    EXPECT_NEAR(f.abs_flux, 0.0, 1e-14);
}

TEST(SurfaceFlux, OutgoingSphericalWave)
{
    const CartesianGrid g(16.0, 128);
    const double k = 1.0;
    // e^{ikr}/r, smoothed at the origin and windowed before the box edge.
    const auto psi = ComplexField3D::sample(g, [&](const Vec3& x) {
        const double r = norm(x);
        if (r == 0.0) return cplx{};
        const double core = std::pow(1.0 - std::exp(-r * r), 3);
        return std::polar(core * std::exp(-std::pow(r / 12.0, 12)) / r, k * r);
    });
    const auto f = surface_flux(psi, DetectorCap{full_sphere, 5.0});
    EXPECT_NEAR(f.signed_flux, 4.0 * pi * k, 1e-3 * 4.0 * pi * k);
    EXPECT_NEAR(f.abs_flux, f.signed_flux, 1e-3);
}

TEST(SurfaceFlux, MirroredHemispheresAgree)
{
    const CartesianGrid g(12.0, 64);
    const ComplexField3D psi = free_propagate(GaussianPacket{{}, 1.0, {1.0, 0.0, 0.0}}.sample(g), 2.0);
    const auto a = surface_flux(psi, DetectorCap{upper, 4.0});
    const auto b = surface_flux(psi, DetectorCap{lower, 4.0});
    EXPECT_NEAR(a.signed_flux, b.signed_flux, 1e-10);
    EXPECT_NEAR(a.abs_flux, b.abs_flux, 1e-10);
    EXPECT_GE(a.abs_flux, std::abs(a.signed_flux));
}

TEST(SurfaceFlux, GridPathRefusesLargeCaps)
{
    const CartesianGrid g(10.0, 32);
    const ComplexField3D psi = GaussianPacket{}.sample(g);
    try {
        surface_flux(psi, DetectorCap{full_sphere, 9.5});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::cap_outside_grid);
    }
}

TEST(FarField, FreePartMatchesClosedForm)
{
    const CartesianGrid g(12.0, 64);
    const Vec3 k0{0.0, 0.0, 2.0};
    const FarField ff(GaussianPacket{{}, 1.0, k0}.sample(g));
    for (double t : {1.0, 3.0, 10.0}) {
        const std::vector<Vec3> pts{{1.0, 2.0, 3.0}, {0.0, 0.0, 2.0 * t}, {-3.0, 1.0, 2.0 * t + 1.0}, {40.0, 0.0, 0.0}};
        const auto s = ff.evaluate(pts, t);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            EXPECT_LT(std::abs(s.value[i] - free_gaussian(pts[i], t, 1.0, k0)), 1e-12) << t;
            const double h = 1e-5;
            for (int a = 0; a < 3; ++a) {
                Vec3 p = pts[i], m = pts[i];
                p[a] += h;
                m[a] -= h;
                const cplx fd = (free_gaussian(p, t, 1.0, k0) - free_gaussian(m, t, 1.0, k0)) / (2.0 * h);
                EXPECT_LT(std::abs(s.gradient[i][a] - fd), 1e-8) << t;
            }
        }
    }
}

TEST(FarField, AgreesWithTheGridPath)
{
    const CartesianGrid small(12.0, 64), big(24.0, 128);
    const GaussianPacket p{{}, 1.0, {0.0, 0.0, 1.5}};
    const FarField ff(p.sample(small));
    const ComplexField3D on_grid = free_propagate(p.sample(big), 4.0);
    const DetectorCap cap{Cap{{0.0, 0.0, 1.0}, pi / 3.0}, 6.0};
    const auto a = surface_flux(ff, cap, 4.0);
    const auto b = surface_flux(on_grid, cap);
    EXPECT_NEAR(a.signed_flux, b.signed_flux, 1e-8);
    EXPECT_NEAR(a.abs_flux, b.abs_flux, 1e-8);
}

TEST(FarField, BallNormBalancesSphereFlux)
{
    const CartesianGrid g(12.0, 64);
    const ComplexField3D psi = GaussianPacket{{}, 1.0, {0.0, 0.0, 2.0}}.sample(g);
    auto check = [](const FarField& ff) {
        for (double t : {3.0, 5.0}) {
            const double R = 10.0, h = 0.05;
            const double dPdt = (-ball_probability(ff, R, t + 2 * h) + 8 * ball_probability(ff, R, t + h) -
                                 8 * ball_probability(ff, R, t - h) + ball_probability(ff, R, t - 2 * h)) /
                                (12 * h);
            const double flux = surface_flux(ff, DetectorCap{full_sphere, R}, t).signed_flux;
            EXPECT_LT(std::abs(dPdt + flux), 1e-3 * std::abs(flux)) << t;
        }
    };
    check(FarField(psi));
    const auto kg = std::make_shared<const SphericalKGrid>(
        SphericalKGrid::gauss(0.0, 8.0, 24, AngularRule::product(8, 16)));
    const auto table = EigenfunctionTable::from_point_interaction(PointInteraction{0.1, {}}, kg, g);
    const FarField scattered(psi, table, 20.0, 12.0);
    EXPECT_TRUE(scattered.has_scattered_part());
    check(scattered);
}

TEST(FarField, RefusesRadiiBeyondTheExpansion)
{
    const CartesianGrid g(12.0, 64);
    const auto kg = std::make_shared<const SphericalKGrid>(
        SphericalKGrid::gauss(0.0, 6.0, 8, AngularRule::product(4, 8)));
    const auto table = EigenfunctionTable::from_point_interaction(PointInteraction{0.1, {}}, kg, g);
    const FarField ff(GaussianPacket{}.sample(g), table, 10.0, 10.0);
    EXPECT_THROW(surface_flux(ff, DetectorCap{full_sphere, 11.0}, 2.0), Error);
}

TEST(TimeIntegratedFlux, ZeroStateGivesZero)
{
    const CartesianGrid g(8.0, 32);
    const FarField ff{ComplexField3D(g)};
    const auto f = time_integrated_flux(ff, DetectorCap{full_sphere, 20.0}, 1.0, 5.0);
    EXPECT_EQ(f.signed_total, 0.0);
    EXPECT_EQ(f.abs_total, 0.0);
}

TEST(TimeIntegratedFlux, EverythingLeavesTheSphere)
{
    const CartesianGrid g(12.0, 64);
    const FarField ff(GaussianPacket{{}, 1.0, {0.0, 0.0, 2.0}}.sample(g));
    FluxOptions o;
    o.quadrature = {16, 32};
    const auto f = time_integrated_flux(ff, DetectorCap{full_sphere, 20.0}, 1.0, std::pow(20.0, 5.0 / 6.0), o);
    EXPECT_NEAR(f.signed_total, 1.0, 0.02);
    EXPECT_NEAR(f.abs_total, f.signed_total, 1e-6);
    EXPECT_LT(f.tail_exponent, -1.5);
    EXPECT_GT(f.early_signed, 0.0);
    EXPECT_LT(f.early_signed, f.signed_total);
    for (std::size_t i = 0; i < f.history.times.size(); ++i)
        EXPECT_GE(f.history.abs_flux[i], std::abs(f.history.signed_flux[i]));
}

TEST(TimeIntegratedFlux, ProbabilityBalanceInTheBall)
{
    const CartesianGrid g(12.0, 64);
    const FarField ff(GaussianPacket{{}, 1.0, {0.0, 0.0, 1.0}}.sample(g));
    const double R = 10.0, T = 2.0;
    FluxOptions o;
    o.quadrature = {16, 32};
    const auto f = time_integrated_flux(ff, DetectorCap{full_sphere, R}, T, T, o);
    const double before = ball_probability(ff, R, T);
    const double after = ball_probability(ff, R, f.t_end);
    EXPECT_NEAR(f.signed_total, before - after, 1e-3);
}

TEST(ConeProbability, NormalisationAndSymmetry)
{
    const GaussianPacket p{{0.4, 0.0, 0.0}, 1.0, {1.0, 0.0, 0.0}};
    const MomentumSymbol chi = p.symbol();
    EXPECT_NEAR(cone_probability(chi, full_sphere, chi.cutoff(), 128), 1.0, 1e-12);
    EXPECT_NEAR(cone_probability(chi, upper, chi.cutoff(), 128), 0.5, 1e-12);
}

TEST(FastExperiment, InvalidRadiiBecomeFailedRows)
{
    const CartesianGrid g(12.0, 64);
    const FarField ff(GaussianPacket{{}, 1.0, {0.0, 0.0, 2.0}}.sample(g));
    FastOptions o;
    o.radii = {20.0, -5.0, std::nan("")};
    o.flux.quadrature = {8, 16};
    o.cone = Cap{{0.0, 0.0, 1.0}, pi / 6.0};
    const auto rep = fast_experiment(ff, MomentumSymbol::fourier_of(ff.out_field()), o);
    ASSERT_EQ(rep.rows.size(), 3u);
    EXPECT_FALSE(rep.rows[0].failed);
    EXPECT_TRUE(rep.rows[1].failed);
    EXPECT_TRUE(rep.rows[2].failed);
    const std::string csv = rep.to_csv();
    EXPECT_EQ(csv.rfind("R,lhs,lhs_abs,rhs,early_fraction,tail_estimate,status\n", 0), 0u);
    EXPECT_NE(csv.find("-5,,,"), std::string::npos);
    EXPECT_NE(csv.find("FAILED"), std::string::npos);
    EXPECT_EQ(csv, fast_experiment(ff, MomentumSymbol::fourier_of(ff.out_field()), o).to_csv());
    EXPECT_NE(rep.to_svg().find("<svg"), std::string::npos);
}

TEST(Outwardness, ZeroStateIsFlaggedNotDivided)
{
    FastReport rep;
    rep.rows.push_back(FastRow{});
    rep.rows.back().R = 20.0;
    const auto o = outwardness_check(rep);
    ASSERT_EQ(o.size(), 1u);
    EXPECT_EQ(o[0].ratio, 0.0);
    EXPECT_TRUE(o[0].degenerate);
}

TEST(Outwardness, IncomingPacketRecrosses)
{
    // A packet that starts outside the sphere and runs through it.
    const CartesianGrid g(16.0, 64);
    FastOptions o;
    o.radii = {2.0};
    o.cone = full_sphere;
    o.flux.quadrature = {8, 16};
    auto ratio = [&](const GaussianPacket& p, double T) {
        o.T = T;
        const auto w = outwardness_check(fast_experiment(FarField(p.sample(g)), p.symbol(), o));
        return w.at(0).ratio;
    };
    EXPECT_GT(ratio(GaussianPacket{{0.0, 0.0, 5.0}, 1.0, {0.0, 0.0, -0.8}}, 1.0), 0.3);
    // A packet at rest only spreads, so its current points outward everywhere.
    EXPECT_LT(ratio(GaussianPacket{}, 2.0), 1e-9);
}
