#include <gtest/gtest.h>

#include <cmath>

#include "fastflux/error.hpp"
#include "fastflux/potentials.hpp"

using namespace fastflux;

TEST(Potentials, ZeroPotentialPassesWithZeroRatio)
{
    const auto V = make_zero_potential();
    const auto rep = check_class_Vn(V, 4);
    EXPECT_EQ(rep.verdict, Verdict::pass);
    EXPECT_EQ(rep.worst_ratio, 0.0);
    EXPECT_TRUE(V.is_zero());
}

TEST(Potentials, ZeroAmplitudeGaussianIsZero)
{
    const auto V = make_gaussian_potential(0.0, 1.0);
    EXPECT_TRUE(V.is_zero());
    EXPECT_EQ(check_class_Vn(V, 4).verdict, Verdict::pass);
}

TEST(Potentials, GaussianMeetsDeclaredDecay)
{
    for (double A : {0.1, -0.1}) {
        const auto V = make_gaussian_potential(A, 1.0);
        EXPECT_EQ(V.decay().n, 4);
        EXPECT_EQ(V.decay().epsilon, 1.0);
        const auto rep = check_class_Vn(V, V.decay().n);
        EXPECT_EQ(rep.verdict, Verdict::pass) << rep.message;
        EXPECT_LE(rep.worst_ratio, 1.0);
        EXPECT_GT(rep.worst_ratio, 0.5);
    }
}

TEST(Potentials, GaussianEnvelopeBySampling)
{
    const auto V = make_gaussian_potential(0.1, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double r = 5.0 * std::pow(10.0, i / 999.0);
        const Vec3 x = r * normalized(Vec3{std::sin(i), std::cos(3.0 * i), 0.5});
        EXPECT_LE(std::abs(V(x)), 0.1 * std::pow(bracket(r), -5.0));
    }
}

TEST(Potentials, SlowPowerLawFailsClaim)
{
    const auto V = make_power_law_potential(1.0, 3.0, 4, 0.5);
    const auto rep = check_class_Vn(V, 4);
    EXPECT_EQ(rep.verdict, Verdict::fail);
    EXPECT_GT(rep.worst_ratio, 1.0);
}

TEST(Potentials, MembershipIsMonotoneInN)
{
    const auto V = make_power_law_potential(1.0, 6.0, 5, 1.0);
    for (int n = 2; n <= 5; ++n) EXPECT_EQ(check_class_Vn(V, n).verdict, Verdict::pass) << n;
}

TEST(Potentials, SingularityInShellIsIndeterminate)
{
    const Potential V({"custom", {}}, [](const Vec3& x) { return 1.0 / norm(x - Vec3{0.0, 0.0, 3.0}); },
                      {4, 1.0, 1.0, 1.0}, {{0.0, 0.0, 3.0}});
    EXPECT_EQ(check_class_Vn(V, 4).verdict, Verdict::indeterminate);
    EXPECT_DOUBLE_EQ(V.exclusion_radius(0.25), 0.5);
}

TEST(Potentials, GaussianSquareNorm)
{
    const double A = 0.3, w = 1.5;
    const auto rep = check_class_Vn(make_gaussian_potential(A, w), 4);
    EXPECT_NEAR(rep.l2_norm, A * std::pow(M_PI, 0.75) * std::pow(w, 1.5), 1e-8);
}

TEST(Potentials, RejectsSmallN) { EXPECT_THROW(check_class_Vn(make_zero_potential(), 1), Error); }

TEST(Potentials, DescriptorRoundTrip)
{
    const auto V = make_gaussian_potential(0.1, 1.0);
    const auto W = make_potential(V.descriptor());
    EXPECT_EQ(V.descriptor().canonical(), W.descriptor().canonical());
    EXPECT_EQ(V({0.3, 0.2, 0.1}), W({0.3, 0.2, 0.1}));
    EXPECT_THROW(make_potential({"coulomb", {}}), Error);
}

TEST(Potentials, PointInteractionAmplitude)
{
    const PointInteraction p{0.5, {}};
    const double k = 1.3;
    const cplx f = p.amplitude(k, +1);
    EXPECT_NEAR(std::abs(f - 1.0 / (4.0 * M_PI * 0.5 + I * k)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(p.amplitude(k, -1) - std::conj(f)), 0.0, 1e-15);
    EXPECT_TRUE((PointInteraction{HUGE_VAL, {}}.is_free()));
}
