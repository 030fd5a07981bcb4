#pragma once

#include <array>
#include <string>
#include <vector>

#include "fastflux/classes.hpp"
#include "fastflux/momentum.hpp"
#include "fastflux/spectral.hpp"

namespace fastflux {

// Dense quadrature for ∫ e^{-ik²t/2 + ik·x} χ(k) d³k. With k = x/t + ρω the phase is −tρ²/2 up to a
// constant; the angular average of χ is smooth in ρ and sampled on coarse Gauss panels, while the
// radial rule places `nodes_per_period` nodes in every 2π of the phase.
struct OscillatoryOptions {
    double nodes_per_period = 12.0;     // below 8 the probe reports under_resolved
    std::size_t angular_theta = 40;     // product rule n_theta × 2 n_theta about x/t
    double smooth_panel = 0.5;          // panel width of the coarse ρ sampling
    std::size_t smooth_nodes = 16;
    std::size_t max_radial_nodes = 2000000;

    OscillatoryOptions refined() const;  // twice the density in every direction
};

cplx free_evolve_exact(const MomentumSymbol& chi, const Vec3& x, double t, const OscillatoryOptions& options = {});
std::array<cplx, 3> free_evolve_exact_gradient(const MomentumSymbol& chi, const Vec3& x, double t,
                                               const OscillatoryOptions& options = {});

// (2π/it)^{3/2} e^{ix²/2t} χ(x/t), principal branch (the one matching (2π)^{3/2}(1+it)^{-3/2}).
cplx stationary_phase_leading(const MomentumSymbol& chi, const Vec3& x, double t);
// i(x/t) times the leading term.
std::array<cplx, 3> stationary_phase_gradient(const MomentumSymbol& chi, const Vec3& x, double t);

struct ProbeOptions {
    std::vector<double> times{5.0, 10.0, 20.0, 40.0, 80.0};
    std::size_t directions = 6;  // Lebedev-26 subset
    double speed = 0.5;          // |x|/t, the stationary wavenumber
    OscillatoryOptions quadrature{};
    bool density_check = true;   // repeat at doubled density and compare the constants
    double stability = 0.2;
    double slope_low = -2.3, slope_high = -1.7;
};

struct ProbeRow {
    double t = 0.0;
    std::size_t direction = 0;
    Vec3 x{};
    cplx exact{}, leading{};
    double error = 0.0;
    double scaled = 0.0;  // t²·error
};

struct AsymptoticProbe {
    std::string symbol;
    std::vector<ProbeRow> rows;
    double slope = 0.0;      // log–log slope of the largest error per time; NaN for fewer than two times
    double L = 0.0;          // sup t²·error
    double L_refined = 0.0;  // the same at doubled density (0 when not checked)
    bool slope_ok = false;
    bool stable = true;
    std::string warning;

    // t, direction, abs_exact, abs_leading, error, scaled_error
    std::string to_csv() const;
};

AsymptoticProbe error_constant_probe(const MomentumSymbol& chi, const ProbeOptions& options = {});

struct AlphaBetaSplit {
    ComplexField3D alpha;  // plane-wave part, e^{-iH₀t}ψ_out
    ComplexField3D beta;   // scattered part
    double time;
};

// α by FFT free propagation of ψ_out, β by the dense radial expansion (radial tables) or by k-node
// quadrature against the stored η (sampled tables), at absolute time state.time() + t.
AlphaBetaSplit alpha_beta_split(const ScatteringState& state, double t, const EigenfunctionTable& table);

struct BetaBoundOptions {
    std::vector<double> radii{10.0, 20.0, 40.0};
    double T = 1.0;
    double span = 4.0;        // times run from T to T + span·R
    std::size_t times = 24;   // geometric in t
    std::size_t n_theta = 12;
    double variation = 2.0;
};

struct BetaBoundRow {
    double R = 0.0;
    double c = 0.0;           // sup |β|·R(t+R)
    double c_gradient = 0.0;  // sup |∂_rβ|·R(t+R)
    double t_at = 0.0;
    Vec3 direction_at{};
};

struct BetaBoundReport {
    std::vector<BetaBoundRow> rows;
    double variation = 0.0;           // max c / min c
    double gradient_variation = 0.0;
    bool pass = true;
    std::string message;
    // R, c, c_gradient, t_at, variation
    std::string to_csv() const;
};

// The expansion must reach T + span·max(R).
BetaBoundReport beta_bound_check(const OutgoingExpansion& beta, const BetaBoundOptions& options = {});

}  // namespace fastflux
