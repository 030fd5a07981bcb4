#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "fastflux/eigenfunctions.hpp"
#include "fastflux/error.hpp"
#include "fastflux/special.hpp"
#include "support/oracles.hpp"

using namespace fastflux;

namespace {

double max_abs_diff(const ComplexField3D& a, const ComplexField3D& b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

std::shared_ptr<const SphericalKGrid> small_k_grid(double k_min, double k_max, std::size_t n_radial,
                                                   AngularRule angular = AngularRule::lebedev26())
{
    return std::make_shared<const SphericalKGrid>(SphericalKGrid::gauss(k_min, k_max, n_radial, std::move(angular)));
}

// Radial nodes kmin·2^j up to k_max: the local spacing at the bottom scales with kmin.
std::shared_ptr<const SphericalKGrid> geometric_k_grid(double k_min, double k_max)
{
    std::vector<RadialNode> radial;
    for (double k = k_min; k <= k_max * (1.0 + 1e-12); k *= 2.0) radial.push_back({k, 1.0});
    return std::make_shared<const SphericalKGrid>(std::move(radial), AngularRule::lebedev26(), 1);
}

}  // namespace

TEST(PointInteraction, SolvesHelmholtzOffTheCentre)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> alpha(0.02, 1.0), kmag(0.2, 3.0), u(-1.0, 1.0);
    for (int draw = 0; draw < 10; ++draw) {
        const PointInteraction p{alpha(rng), {}};
        const double kk = kmag(rng);
        const Vec3 k = kk * normalized(Vec3{u(rng), u(rng), u(rng)});
        const double res = oracle::helmholtz_residual_on_shell(
            [&](const Vec3& x) { return point_interaction_eigenfunction(p, x, k); }, kk, 1.0, 3.0);
        EXPECT_LT(res, 1e-8) << "alpha=" << p.alpha << " k=" << kk;
    }
}

TEST(PointInteraction, SatisfiesBoundaryConditionAtCentre)
{
    // The s-wave average r·φ̄ = r·j0(kr) + f e^{-ikr} must obey ∂_r(rφ̄) = 4πα·rφ̄ as r → 0.
    const PointInteraction p{0.3, {}};
    const double k = 1.7;
    const cplx f = p.amplitude(k, +1);
    auto rphi = [&](double r) { return std::sin(k * r) / k + f * std::polar(1.0, -k * r); };
    const double r = 1e-5, h = 1e-6;
    const cplx d = (rphi(r + h) - rphi(r - h)) / (2.0 * h);
    EXPECT_NEAR(std::abs(d - 4.0 * M_PI * p.alpha * rphi(r)), 0.0, 1e-4);
}

TEST(PointInteraction, FreeLimitIsPlaneWave)
{
    const PointInteraction p{HUGE_VAL, {}};
    const Vec3 x{0.3, -1.0, 2.0}, k{0.0, 1.0, 1.0};
    EXPECT_NEAR(std::abs(point_interaction_eigenfunction(p, x, k) - std::polar(1.0, dot(k, x))), 0.0, 1e-15);
}

TEST(PointInteraction, AmplitudeDecaysLikeInverseK)
{
    const PointInteraction p{0.4, {}};
    std::vector<double> ks, fs;
    for (int i = 0; i <= 20; ++i) {
        ks.push_back(10.0 * std::pow(100.0, i / 20.0));
        fs.push_back(std::abs(p.amplitude(ks.back())));
    }
    EXPECT_NEAR(oracle::loglog_slope(ks, fs), -1.0, 0.1);
}

TEST(PointInteraction, RejectsCentre)
{
    EXPECT_THROW(point_interaction_eigenfunction({1.0, {1.0, 0.0, 0.0}}, {1.0, 0.0, 0.0}, {0.0, 0.0, 1.0}), Error);
}

TEST(PartialWaves, RadialEquationResidual)
{
    const auto V = make_gaussian_potential(0.1, 1.0);
    for (double k : {0.05, 0.5, 2.0, 6.0}) {
        const auto ch = RadialChannels::solve(V, k, +1);
        EXPECT_LT(radial_ls_residual(V, ch, {0.3, 1.0, 2.5, 6.0}), 1e-7) << k;
    }
}

TEST(PartialWaves, PointInteractionPhaseShift)
{
    const PointInteraction p{0.25, {}};
    const double k = 0.8;
    const auto ch = RadialChannels::point_interaction(p, k, +1);
    EXPECT_NEAR(ch.phase_shift(0), std::atan2(k, 4.0 * M_PI * p.alpha), 1e-14);
    const Vec3 x{0.4, 0.9, -0.3};
    std::vector<cplx> g;
    ch.evaluate(norm(x), g);
    const cplx eta = point_interaction_eigenfunction(p, x, {0.0, 0.0, k}) - std::polar(1.0, k * x[2]);
    EXPECT_NEAR(std::abs(g[0] - eta), 0.0, 1e-13);
}

TEST(LippmannSchwinger, ZeroPotentialGivesZero)
{
    const auto V = make_zero_potential();
    const auto s = ls_solve_direct(V, {0.0, 0.0, 1.0}, +1);
    EXPECT_EQ(s.eta.max_abs(), 0.0);
    const auto b = ls_solve_born(V, {0.0, 0.0, 1.0}, +1, 5);
    EXPECT_EQ(b.eta.max_abs(), 0.0);
    EXPECT_LE(b.terms, 1u);
}

TEST(LippmannSchwinger, GaussianResidualAndBornAgreement)
{
    const auto V = make_gaussian_potential(0.1, 1.0);
    LsOperator op(V);
    const Vec3 k{0.0, 0.0, 1.0};
    const auto direct = op.solve(k, +1);
    EXPECT_LT(direct.residual, 1e-6);
    EXPECT_LT(op.residual(k, +1, direct.eta), 1e-6);

    const auto born = op.born(k, +1, 60);
    EXPECT_LT(born.ratio, 0.2);
    EXPECT_LT(max_abs_diff(born.eta, direct.eta), 1e-8 * direct.eta.max_abs());

    const auto first = op.born(k, +1, 1), second = op.born(k, +1, 2);
    const double eta2 = distance(second.eta, first.eta);
    EXPECT_LE(distance(direct.eta, first.eta), 1.5 * eta2);
}

TEST(LippmannSchwinger, StrongRepulsionDivergesInBornSeries)
{
    const auto V = make_gaussian_potential(50.0, 1.0);
    try {
        ls_solve_born(V, {0.0, 0.0, 0.1}, +1, 60);
        FAIL() << "expected divergence";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::divergence);
    }
    EXPECT_TRUE(screen_resonance(V, 0.1).rejected);
    EXPECT_FALSE(screen_resonance(make_gaussian_potential(0.1, 1.0), 0.05).rejected);
}

TEST(LippmannSchwinger, AgreesWithPartialWaves)
{
    const auto V = make_gaussian_potential(0.1, 1.0);
    LsOptions opt;
    opt.points_per_axis = 32;
    LsOperator op(V, opt);
    for (double kk : {1.0, 3.0}) {
        const Vec3 k = kk * normalized(Vec3{0.2, -0.4, 1.0});
        const auto s = op.solve(k, +1);
        const auto ch = RadialChannels::solve(V, kk, +1);
        std::vector<cplx> g;
        std::vector<double> P;
        double worst = 0.0;
        const auto& grid = op.grid();
        for (std::size_t p = 0; p < grid.size(); p += 7) {
            const Vec3 x = grid.point(p);
            const double r = norm(x);
            ch.evaluate(r, g);
            cplx eta = g[0];
            if (r > 0.0) {
                legendre(ch.l_max(), dot(x, k) / (r * kk), P);
                eta = 0.0;
                cplx il = 1.0;
                for (int l = 0; l <= ch.l_max(); ++l, il *= I) eta += (2.0 * l + 1.0) * il * g[l] * P[l];
            }
            worst = std::max(worst, std::abs(eta - s.eta[p]));
        }
        EXPECT_LT(worst, 1e-6) << kk;
    }
}

TEST(LippmannSchwinger, Reciprocity)
{
    const auto V = make_gaussian_potential(0.1, 1.0);
    LsOperator op(V);
    const Vec3 k{0.3, 0.5, 0.8};
    const auto minus = op.solve(k, -1);
    const auto plus = op.solve(-1.0 * k, +1);
    double d = 0.0;
    for (std::size_t i = 0; i < minus.eta.size(); ++i) d = std::max(d, std::abs(minus.eta[i] - std::conj(plus.eta[i])));
    EXPECT_LT(d, 1e-8 * plus.eta.max_abs());
}

TEST(LippmannSchwinger, BoundaryEnvelopeStableUnderDoubling)
{
    const auto V = make_gaussian_potential(0.1, 1.0);
    const Vec3 k{0.0, 0.0, 1.0};
    LsOptions small, large;
    large.box_half_width = 2.0 * small.box_half_width;
    large.points_per_axis = 2 * small.points_per_axis;
    const double c1 = boundary_envelope(ls_solve_direct(V, k, +1, small).eta);
    const double c2 = boundary_envelope(ls_solve_direct(V, k, +1, large).eta);
    EXPECT_GT(c1, 0.0);
    EXPECT_NEAR(c2 / c1, 1.0, 0.2);
}

TEST(EigenfunctionTable, FreeTableIsPlaneWave)
{
    const auto t = EigenfunctionTable::free(small_k_grid(0.5, 2.0, 2), CartesianGrid(8.0, 16));
    const Vec3 x{1.0, 2.0, -0.5};
    EXPECT_EQ(t.eta(x, 5), cplx(0.0));
    EXPECT_NEAR(std::abs(t.phi(x, 5) - std::polar(1.0, dot(t.k_grid().node(5), x))), 0.0, 1e-15);
}

TEST(EigenfunctionTable, ChannelAndSolverBackendsAgree)
{
    const auto V = make_gaussian_potential(0.1, 1.0);
    const auto kg = small_k_grid(0.5, 1.5, 2, AngularRule::product(2, 2));
    const auto solver = EigenfunctionTable::from_solver(V, kg);
    const auto channels = EigenfunctionTable::from_channels(V, kg, solver.x_grid());
    EXPECT_EQ(solver.kind(), TableKind::sampled);
    EXPECT_EQ(channels.kind(), TableKind::channels);
    EXPECT_LT(solver.residual_sup(), 1e-6);
    EXPECT_LT(channels.residual_sup(), 1e-7);
    const auto& g = solver.x_grid();
    for (std::size_t node = 0; node < kg->size(); ++node)
        for (std::size_t p = 0; p < g.size(); p += 101)
            EXPECT_NEAR(std::abs(solver.eta(g.point(p), node) - channels.eta(g.point(p), node)), 0.0, 1e-5);
    // Off-node evaluation re-solves at the requested k.
    const Vec3 x{0.5, 0.25, -1.0}, k{0.1, 0.2, 0.9};
    EXPECT_NEAR(std::abs(solver.eta_at(g.point(g.index(12, 13, 9)), k) - channels.eta_at(g.point(g.index(12, 13, 9)), k)),
                0.0, 1e-5);
    EXPECT_NEAR(std::abs(channels.phi_at(x, k) - std::polar(1.0, dot(k, x)) - channels.eta_at(x, k)), 0.0, 1e-15);
}

TEST(EigenfunctionTable, CacheRoundTripAndCorruption)
{
    const auto V = make_gaussian_potential(0.1, 1.0);
    const auto kg = small_k_grid(0.5, 1.0, 1, AngularRule::product(1, 2));
    const auto t = EigenfunctionTable::from_solver(V, kg);
    const auto dir = std::filesystem::temp_directory_path() / "fastflux_cache_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / (table_cache_key(t) + ".bin");
    save_table(t, path);
    const auto u = load_table(path);
    EXPECT_EQ(table_cache_key(u), table_cache_key(t));
    EXPECT_EQ(u.kind(), TableKind::sampled);
    EXPECT_EQ(u.residual_sup(), t.residual_sup());
    for (std::size_t n = 0; n < kg->size(); ++n) EXPECT_EQ(max_abs_diff(u.samples(n), t.samples(n)), 0.0);

    std::string bytes;
    {
        std::ifstream in(path, std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(in), {});
    }
    auto expect_corrupt = [&](const std::string& content) {
        const auto bad = dir / "bad.bin";
        std::ofstream(bad, std::ios::binary) << content;
        try {
            load_table(bad);
            ADD_FAILURE() << "corruption not detected";
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::cache_corrupt);
            EXPECT_NE(std::string(e.what()).find("bad.bin"), std::string::npos);
        }
    };
    std::string flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x10;
    expect_corrupt(flipped);
    expect_corrupt(bytes.substr(0, bytes.size() - 100));
    std::string magic = bytes;
    magic[0] = 'X';
    expect_corrupt(magic);
    std::filesystem::remove_all(dir);

    const auto other = cache_key(make_gaussian_potential(0.2, 1.0).descriptor(), *kg, t.x_grid(), +1,
                                 TableKind::sampled);
    EXPECT_NE(other, table_cache_key(t));
}

TEST(EigenfunctionTable, ChannelTablesAreNotCached)
{
    const auto t = EigenfunctionTable::from_point_interaction({0.5, {}}, small_k_grid(0.5, 1.0, 1),
                                                              CartesianGrid(8.0, 16));
    EXPECT_THROW(save_table(t, std::filesystem::temp_directory_path() / "never.bin"), Error);
}

TEST(EigenfunctionBounds, FreeEntriesBoundedByOne)
{
    const auto t = EigenfunctionTable::free(small_k_grid(0.05, 2.0, 3), CartesianGrid(8.0, 16));
    const auto rep = check_eigenfunction_bounds(t);
    EXPECT_TRUE(rep.pass) << rep.message;
    EXPECT_NEAR(rep.sup_abs_phi, 1.0, 1e-12);
    for (const auto& e : rep.multi_index) EXPECT_LE(e.unweighted, 1.0 + 1e-6) << e.name;
    for (const auto& e : rep.radial) EXPECT_LE(e.weighted, 1.0 + 1e-6) << e.name;
}

namespace {

double worst_second_order(const BoundCheckReport& rep, bool weighted)
{
    double w = 0.0;
    for (const auto& e : rep.multi_index)
        if (e.order == 2) w = std::max(w, weighted ? e.weighted : e.unweighted);
    return w;
}

}  // namespace

TEST(EigenfunctionBounds, PointInteractionNeedsKappaWeight)
{
    const PointInteraction p{0.2, {}};
    const CartesianGrid xg(8.0, 16);
    const auto coarse = check_eigenfunction_bounds(EigenfunctionTable::from_point_interaction(p, geometric_k_grid(0.128, 1.1), xg));
    const auto fine = check_eigenfunction_bounds(EigenfunctionTable::from_point_interaction(p, geometric_k_grid(0.016, 1.1), xg));
    EXPECT_GT(worst_second_order(fine, false), 2.0 * worst_second_order(coarse, false));
    EXPECT_LT(worst_second_order(fine, true), 1.5 * worst_second_order(coarse, true));
}

TEST(EigenfunctionBounds, GaussianUnweightedSecondDerivativeGrows)
{
    const auto V = make_gaussian_potential(0.1, 1.0);
    const CartesianGrid xg(8.0, 16);
    const auto coarse = check_eigenfunction_bounds(EigenfunctionTable::from_channels(V, geometric_k_grid(0.4, 1.0), xg));
    const auto fine = check_eigenfunction_bounds(EigenfunctionTable::from_channels(V, geometric_k_grid(0.05, 1.0), xg));
    for (const auto* rep : {&coarse, &fine}) {
        for (const auto& e : rep->multi_index) EXPECT_TRUE(std::isfinite(e.weighted)) << e.name;
        for (const auto& e : rep->radial) EXPECT_TRUE(std::isfinite(e.weighted)) << e.name;
    }
    EXPECT_GT(worst_second_order(fine, false), worst_second_order(coarse, false));
}
