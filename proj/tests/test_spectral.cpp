#include <gtest/gtest.h>

#include <cmath>

#include "fastflux/dft.hpp"
#include "fastflux/error.hpp"
#include "fastflux/fft.hpp"
#include "fastflux/spectral.hpp"

using namespace fastflux;

namespace {

// Normalised packet with |ψ|² of standard deviation sigma per axis.
ComplexField3D packet(const CartesianGrid& g, const Vec3& x0, const Vec3& k0, double sigma)
{
    ComplexField3D f(g);
    const double c = std::pow(2.0 * pi * sigma * sigma, -0.75);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const Vec3 x = g.point(p) - x0;
        f[p] = c * std::exp(-dot(x, x) / (4.0 * sigma * sigma)) * std::polar(1.0, dot(k0, g.point(p)));
    }
    return f;
}

std::shared_ptr<const SphericalKGrid> k_grid(std::size_t n_radial, std::size_t n_theta, double k_max = 5.0)
{
    return std::make_shared<const SphericalKGrid>(
        SphericalKGrid::gauss(0.0, k_max, n_radial, AngularRule::product(n_theta, 2 * n_theta)));
}

std::vector<Vec3> nodes_of(const SphericalKGrid& kg)
{
    std::vector<Vec3> q(kg.size());
    for (std::size_t i = 0; i < kg.size(); ++i) q[i] = kg.node(i);
    return q;
}

double relative_l2(const MomentumAmplitude& a, const std::vector<cplx>& b)
{
    double e = 0.0, n = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        e += a.weight(i) * std::norm(a[i] - b[i]);
        n += a.weight(i) * std::norm(b[i]);
    }
    return std::sqrt(e / n);
}

struct GaussianCase {
    CartesianGrid grid{16.0, 64};
    Potential V = make_gaussian_potential(0.1, 1.0);
    ComplexField3D f = packet(grid, {0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}, 1.0);
    EigenfunctionTable table = EigenfunctionTable::from_channels(V, k_grid(40, 32), grid);
};

const GaussianCase& gaussian_case()
{
    static const GaussianCase c;
    return c;
}

}  // namespace

TEST(RadialShells, ProjectionAndSynthesisAreAdjoint)
{
    const CartesianGrid g(4.0, 16);
    const RadialShells shells(g, {0.1, 0.0, -0.2});
    std::size_t total = 0;
    for (std::size_t s = 0; s < shells.size(); ++s) {
        total += shells.points(s).size();
        if (s > 0) EXPECT_GT(shells.radius(s), shells.radius(s - 1));
    }
    EXPECT_EQ(total, g.size());
    const auto f = packet(g, {0.5, 0.0, 0.0}, {0.3, 0.0, 0.7}, 0.8);
    const int L = 6;
    const auto A = shells.project(f, L);
    std::vector<std::vector<cplx>> C(shells.size(), std::vector<cplx>((L + 1) * (L + 1)));
    cplx lhs = 0.0;
    for (std::size_t s = 0; s < shells.size(); ++s)
        for (std::size_t i = 0; i < C[s].size(); ++i) {
            C[s][i] = cplx(std::sin(1.0 + s + 3.0 * i), std::cos(2.0 * s - i));
            if (!A[s].empty()) lhs += std::conj(C[s][i]) * A[s][i];
        }
    ComplexField3D u(g);
    shells.synthesize(C, L, u);
    cplx rhs = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) rhs += std::conj(u[p]) * f[p];
    EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-10 * std::abs(rhs));
}

TEST(Spectral, FreeForwardIsOrdinaryFourier)
{
    const CartesianGrid g(8.0, 32);
    const auto f = packet(g, {0.3, -0.2, 0.1}, {0.5, 0.0, 1.0}, 1.0);
    const auto kg = k_grid(8, 6);
    const auto t = EigenfunctionTable::free(kg, g);
    const auto F = gen_fourier_forward(f, t);
    const auto ref = fourier_at(f, nodes_of(*kg));
    for (std::size_t i = 0; i < F.size(); ++i) EXPECT_EQ(F[i], ref[i]);

    // A spherical node sitting on a dual-lattice momentum reproduces the FFT value.
    const auto fft = fft_forward(f);
    const std::size_t m = g.points_per_axis() / 2 + 3;
    const Vec3 q = g.momentum_point(g.index(m, m - 1, m + 2));
    auto single = std::make_shared<const SphericalKGrid>(
        std::vector<RadialNode>{{norm(q), 1.0}}, AngularRule::from_nodes({{normalized(q), 1.0}}, 0), 0);
    const auto Fq = gen_fourier_forward(f, EigenfunctionTable::free(single, g));
    EXPECT_NEAR(std::abs(Fq[0] - fft[g.index(m, m - 1, m + 2)]), 0.0, 1e-13);

    EXPECT_EQ(gen_fourier_forward(ComplexField3D(g), t).norm(), 0.0);
    EXPECT_EQ(distance(wave_operator_apply(f, t), f), 0.0);
}

TEST(Spectral, FreeInverseMatchesFourierSynthesis)
{
    const CartesianGrid g(16.0, 64);
    const auto f = packet(g, {0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}, 1.0);
    const auto t = EigenfunctionTable::free(k_grid(48, 48), g);
    const auto back = gen_fourier_inverse(gen_fourier_forward(f, t), t);
    double worst = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p)
        if (norm(g.point(p)) <= 6.0) worst = std::max(worst, std::abs(back[p] - f[p]));
    EXPECT_LT(worst, 1e-6);
    EXPECT_EQ(gen_fourier_inverse(MomentumAmplitude::zeros(MomentumLayout{t.k_grid_ptr()}), t).max_abs(), 0.0);
}

TEST(Spectral, FreeEvolutionMatchesSpreadingGaussian)
{
    const CartesianGrid g(32.0, 128);
    const double sigma = 1.0, t = 5.0;
    const Vec3 k0{0.0, 0.0, 1.0};
    const auto f = packet(g, {0.0, 0.0, 0.0}, k0, sigma);
    const auto table = EigenfunctionTable::free(k_grid(8, 4), g);
    const auto s = evolve(ScatteringState::from_outgoing(f, table), t, table);
    const cplx st = 1.0 + I * t / (2.0 * sigma * sigma);
    double worst = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        const Vec3 x = g.point(p);
        const Vec3 d = x - t * k0;
        const cplx exact = std::pow(2.0 * pi * sigma * sigma, -0.75) * std::pow(st, -1.5) *
                           std::exp(-dot(d, d) / (4.0 * sigma * sigma * st) + I * (dot(k0, x) - 0.5 * t * dot(k0, k0)));
        worst = std::max(worst, std::abs(s.position_field()[p] - exact));
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(Spectral, GeneralizedTransformIsIsometric)
{
    const auto& c = gaussian_case();
    const auto F = gen_fourier_forward(c.f, c.table);
    EXPECT_NEAR(F.norm(), c.f.norm(), 1e-3);

    // The error shrinks under refinement of the k-grid.
    const auto coarse = EigenfunctionTable::from_channels(c.V, k_grid(20, 16), c.grid);
    const double e_coarse = std::abs(gen_fourier_forward(c.f, coarse).norm() - c.f.norm());
    EXPECT_LT(std::abs(F.norm() - c.f.norm()), e_coarse);
}

TEST(Spectral, RoundTripAndWaveOperator)
{
    const auto& c = gaussian_case();
    const auto fine = EigenfunctionTable::from_channels(c.V, k_grid(40, 48), c.grid);
    const auto back = gen_fourier_inverse(gen_fourier_forward(c.f, fine), fine);
    EXPECT_LT(distance(back, c.f) / c.f.norm(), 1e-3);

    const auto W = wave_operator_apply(c.f, c.table);
    EXPECT_NEAR(W.norm(), c.f.norm(), 1e-3);
    EXPECT_GT(distance(W, c.f), 1e-3);  // the interaction does something

    // ψ = Ω₊f has outgoing asymptote f̂.
    const auto out = outgoing_asymptote(W, c.table);
    EXPECT_LT(relative_l2(out, fourier_at(c.f, nodes_of(c.table.k_grid()))), 1e-3);
}

TEST(Spectral, Intertwining)
{
    const auto& c = gaussian_case();
    const auto lhs = wave_operator_apply(apply_hamiltonian(c.f, make_zero_potential()), c.table);
    const auto rhs = apply_hamiltonian(wave_operator_apply(c.f, c.table), c.V);
    EXPECT_LT(distance(lhs, rhs) / rhs.norm(), 1e-3);
}

TEST(Spectral, EvolutionConservesNormAndMatchesSplitStep)
{
    const auto& c = gaussian_case();
    const auto s0 = ScatteringState::from_outgoing(c.f, c.table);
    const double n0 = s0.position_field().norm();
    EXPECT_NEAR(n0, 1.0, 1e-3);
    for (double t : {2.0, 4.0, 8.0}) {
        const auto s = evolve(s0, t, c.table);
        EXPECT_NEAR(s.position_field().norm(), n0, 1e-3) << t;
        EXPECT_DOUBLE_EQ(s.time(), t);
        if (t == 4.0) {
            const auto ref = split_step_evolve(s0.position_field(), c.V, t, 80);
            EXPECT_LT(distance(s.position_field(), ref) / ref.norm(), 1e-3);
        }
    }
    const auto two_step = evolve(evolve(s0, 3.0, c.table), 2.0, c.table);
    const auto one_step = evolve(s0, 5.0, c.table);
    EXPECT_LT(distance(two_step.position_field(), one_step.position_field()), 2e-3);
    EXPECT_LT(distance(evolve(s0, 0.0, c.table).position_field(), s0.position_field()), 1e-12);
}

TEST(Spectral, StateFromPositionRecoversAsymptote)
{
    const auto& c = gaussian_case();
    const auto psi = wave_operator_apply(c.f, c.table);
    const auto s = ScatteringState::from_position(psi, c.table);
    EXPECT_LT(relative_l2(s.out_amplitude(), fourier_at(c.f, nodes_of(c.table.k_grid()))), 1e-3);
    // Resynthesis from the k-nodes is exact only where the angular rule resolves e^{ik·x}.
    double worst = 0.0;
    for (std::size_t p = 0; p < c.grid.size(); ++p)
        if (norm(c.grid.point(p)) <= 6.0) worst = std::max(worst, std::abs(s.out_field()[p] - c.f[p]));
    EXPECT_LT(worst, 1e-4);
}

TEST(OutgoingExpansion, InterpolatedChannelsMatchDirectSolves)
{
    const auto& c = gaussian_case();
    ExpansionOptions direct, interp;
    direct.t_max = interp.t_max = 3.0;
    direct.master_nodes = 100000;
    interp.master_nodes = 120;
    const OutgoingExpansion a(c.table, c.f, direct), b(c.table, c.f, interp);
    ASSERT_EQ(a.k_nodes().size(), b.k_nodes().size());
    for (const Vec3& x : {Vec3{0.5, 0.0, 1.0}, Vec3{-3.0, 2.0, 1.0}, Vec3{6.0, -9.0, 12.0}})
        EXPECT_NEAR(std::abs(a.beta(x, 3.0) - b.beta(x, 3.0)), 0.0, 1e-9);
}

TEST(OutgoingExpansion, RadialDerivativeMatchesDifferences)
{
    const auto& c = gaussian_case();
    ExpansionOptions opt;
    opt.t_max = 6.0;
    const OutgoingExpansion ex(c.table, c.f, opt);
    const std::vector<Vec3> dirs{normalized(Vec3{0.2, 0.1, 1.0}), normalized(Vec3{-1.0, 0.4, 0.3})};
    for (double r : {3.0, 12.0}) {
        std::vector<cplx> b, db, bp, bm;
        ex.on_sphere(r, 5.0, dirs, b, &db);
        const double h = 1e-4;
        ex.on_sphere(r + h, 5.0, dirs, bp);
        ex.on_sphere(r - h, 5.0, dirs, bm);
        for (std::size_t d = 0; d < dirs.size(); ++d)
            EXPECT_NEAR(std::abs(db[d] - (bp[d] - bm[d]) / (2.0 * h)), 0.0, 1e-7 + 1e-5 * std::abs(db[d]));
    }
}

TEST(Spectral, PointInteractionTransformIsIsometric)
{
    const CartesianGrid g(16.0, 64);
    const double h = g.spacing();
    const PointInteraction p{0.15, {0.5 * h, 0.5 * h, 0.5 * h}};
    const auto f = packet(g, {0.0, 0.0, -2.0}, {0.0, 0.0, 1.0}, 1.0);
    const auto t = EigenfunctionTable::from_point_interaction(p, k_grid(40, 24), g);
    EXPECT_NEAR(gen_fourier_forward(f, t).norm(), f.norm(), 2e-3);
    // Table evaluation about a shifted centre reproduces the closed form.
    const Vec3 x{1.0, -0.5, 2.0}, k = t.k_grid().node(100);
    EXPECT_NEAR(std::abs(t.phi(x, 100) - point_interaction_eigenfunction(p, x, k)), 0.0, 1e-12);
}

TEST(Spectral, SampledTablesMatchChannelTables)
{
    const auto V = make_gaussian_potential(0.1, 1.0);
    LsOptions opt;
    opt.box_half_width = 8.0;
    opt.points_per_axis = 32;
    auto kg = std::make_shared<const SphericalKGrid>(SphericalKGrid::gauss(0.3, 2.5, 3, AngularRule::product(3, 6)));
    const auto sampled = EigenfunctionTable::from_solver(V, kg, +1, opt);
    const auto channels = EigenfunctionTable::from_channels(V, kg, sampled.x_grid());
    const auto f = packet(sampled.x_grid(), {0.5, 0.0, 0.0}, {0.0, 0.5, 0.5}, 1.0);
    const auto Fs = gen_fourier_forward(f, sampled), Fc = gen_fourier_forward(f, channels);
    EXPECT_LT(relative_l2(Fs, Fc.values()), 1e-5);
    const auto Ss = scattered_synthesis(Fs, sampled, f.grid()), Sc = scattered_synthesis(Fs, channels, f.grid());
    EXPECT_LT(distance(Ss, Sc) / Sc.norm(), 1e-5);
    EXPECT_THROW(gen_fourier_forward(ComplexField3D(CartesianGrid(8.0, 16)), sampled), Error);
}
