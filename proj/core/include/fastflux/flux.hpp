#pragma once

#include <array>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fastflux/eigenfunctions.hpp"
#include "fastflux/grid.hpp"
#include "fastflux/momentum.hpp"
#include "fastflux/quadrature.hpp"
#include "fastflux/spectral.hpp"

namespace fastflux {

// Sphere of radius `radius` restricted to the directions of `cone`.
struct DetectorCap {
    Cap cone;
    double radius = 1.0;
};

struct CapQuadrature {
    std::size_t n_theta = 24;
    std::size_t n_phi = 48;
};

// j = Im(conj(ψ) ∇ψ), component by component on the grid.
std::array<std::vector<double>, 3> flux_density(const ComplexField3D& psi);

struct FluxValue {
    double signed_flux = 0.0;  // ∫ j·n
    double abs_flux = 0.0;     // ∫ |j·n|
};

// Flux through the cap for a state held on a grid (band-limited interpolation of ψ and ∇ψ).
FluxValue surface_flux(const ComplexField3D& psi, const DetectorCap& cap, const CapQuadrature& quad = {});

// ψ(x,t) = α + β far from the origin without building ψ(t) on a grid:
// α is the free evolution of ψ_out, evaluated through its chirped transform,
// β is the dense-radial outgoing expansion (absent for free tables).
class FarField {
public:
    // Free evolution of `psi_out`.
    explicit FarField(const ComplexField3D& psi_out);
    // `r_max` is the largest sphere radius that will be requested.
    FarField(const ComplexField3D& psi_out, const EigenfunctionTable& table, double t_max, double r_max,
             ExpansionOptions options = {});

    struct Sample {
        std::vector<cplx> value;
        std::vector<std::array<cplx, 3>> gradient;
    };

    // ψ (and ∇ψ when asked) at arbitrary points.
    Sample evaluate(const std::vector<Vec3>& points, double t, bool with_gradient = true) const;
    // ψ (and ∂_rψ when asked) on the sphere |x| = r for each direction.
    void on_sphere(double r, double t, const std::vector<Vec3>& directions, std::vector<cplx>& psi,
                   std::vector<cplx>* radial_derivative = nullptr) const;

    double t_max() const noexcept { return t_max_; }
    double r_max() const noexcept { return r_max_; }
    // Radius outside of which |ψ_out| is below 1e-12 of its maximum.
    double support_radius() const noexcept { return levels_.front().r_support; }
    bool has_scattered_part() const noexcept { return static_cast<bool>(beta_); }
    const ComplexField3D& out_field() const noexcept { return levels_.front().field; }

private:
    struct Level {
        ComplexField3D field;
        std::vector<double> coords;
        double r_support = 0.0;
        double k_band = 0.0;
        double nyquist = 0.0;
    };
    void init_levels(const ComplexField3D& psi_out);
    const Level& fine_level() const;
    void alpha(const std::vector<Vec3>& points, double t, bool with_gradient, Sample& out) const;

    std::vector<Level> levels_;
    mutable std::mutex fine_mutex_;
    mutable std::unique_ptr<Level> fine_;
    std::unique_ptr<OutgoingExpansion> beta_;
    double t_max_ = 0.0;
    double r_max_ = 0.0;
};

FluxValue surface_flux(const FarField& psi, const DetectorCap& cap, double t, const CapQuadrature& quad = {});

// ∫_{|x|<R} |ψ(x,t)|² by Gauss–Legendre in r times a product rule.
double ball_probability(const FarField& psi, double R, double t, std::size_t radial_nodes = 48,
                        std::size_t n_theta = 24);

struct FluxOptions {
    CapQuadrature quadrature{};
    double tail_epsilon = 1e-5;  // the scan stops once |flux| < tail_epsilon · peak
    double growth = 1.08;        // ratio between consecutive scan times
    double rel_tol = 1e-8;
    std::size_t tail_points = 6;
    std::size_t max_intervals = 200;
};

struct FluxHistory {
    std::vector<double> times;
    std::vector<double> signed_flux;
    std::vector<double> abs_flux;
};

struct TimeIntegratedFlux {
    double signed_total = 0.0;  // over [T, ∞)
    double abs_total = 0.0;
    double early_signed = 0.0;  // over [T, split)
    double early_abs = 0.0;
    double tail_signed = 0.0;  // the part beyond t_end, from the fitted power law
    double tail_abs = 0.0;
    double tail_exponent = 0.0;
    double t_end = 0.0;
    double peak = 0.0;
    std::size_t evaluations = 0;
    FluxHistory history;  // the scan
};

// ∫_T^∞ of the flux through the cap; `split` (≥ T) separates the early part.
TimeIntegratedFlux time_integrated_flux(const FarField& psi, const DetectorCap& cap, double T, double split,
                                        const FluxOptions& options = {});

// ∫ over the cone {k : k/|k| ∈ cone} of |χ(k)|², radial Gauss–Legendre up to `k_max`.
double cone_probability(const MomentumSymbol& chi, const Cap& cone, double k_max, std::size_t radial_nodes = 64,
                        const CapQuadrature& quad = {});

struct FastOptions {
    std::vector<double> radii{20.0, 40.0, 80.0};
    double T = 1.0;
    Cap cone{};
    double split_power = 5.0 / 6.0;  // the early window ends at R^split_power
    FluxOptions flux{};
    double k_max = 0.0;  // radial cut-off of the cone integral; 0 takes the symbol's own
    std::size_t radial_nodes = 64;
};

struct FastRow {
    double R = 0.0;
    bool failed = false;
    std::string message;
    double lhs = 0.0;          // ∫ flux over [T, ∞)
    double lhs_abs = 0.0;      // ∫ |flux|
    double early = 0.0;        // ∫ flux over [T, R^split_power)
    double tail = 0.0;         // fitted contribution beyond t_end
    double tail_exponent = 0.0;
    double t_end = 0.0;
    double relative_error = 0.0;  // |lhs - rhs| / rhs
    double early_fraction = 0.0;  // |early| / |lhs|
    double outwardness = 0.0;     // (lhs_abs - |lhs|) / rhs
};

struct FastReport {
    double rhs = 0.0;
    std::vector<FastRow> rows;
    std::string to_csv() const;
    std::string to_svg() const;  // relative error against R on log axes
};

// Flux through the cap as R grows against the asymptotic cone probability of ψ̂_out.
FastReport fast_experiment(const FarField& psi, const MomentumSymbol& psi_hat_out, const FastOptions& options = {});

struct OutwardnessRow {
    double R = 0.0;
    double ratio = 0.0;  // (lhs_abs - |lhs|) / rhs, 0 when rhs vanishes
    bool degenerate = false;
};

std::vector<OutwardnessRow> outwardness_check(const FastReport& report);

}  // namespace fastflux
