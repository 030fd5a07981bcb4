#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fastflux/eigenfunctions.hpp"
#include "fastflux/momentum.hpp"
#include "fastflux/potentials.hpp"

namespace fastflux {

enum class DecayQuantity {
    value,          // |f|
    gradient,       // max_a |∂_a f|
    kappa_hessian,  // κ·max_ab |∂_a∂_b f|, κ = |k|/⟨k⟩
    radial_first,   // |∂f/∂|k||
    radial_second,  // |∂²f/∂|k|²|
};

// Claimed bound |q(k)| ≤ C⟨k⟩^{-exponent}.
struct DecayLine {
    std::string id;
    DecayQuantity quantity;
    double exponent;
};

struct DecayWindow {
    double k_fit_min = 2.0;
    double k_max = 6.0;
    std::size_t fit_samples = 8;  // geometric radii on [k_fit_min, k_max]
    std::vector<double> inner_radii{0.05, 0.1, 0.25, 0.5, 1.0, 1.5};
    std::size_t directions = 6;
    double step = 0.01;  // finite-difference step relative to ⟨k⟩
    double slope_slack = 0.5;
};

struct DecayEntry {
    std::string id;
    double claimed_exponent = 0.0;
    double fitted_slope = 0.0;  // d log q / d log⟨k⟩ on the fit window; NaN when q vanishes there
    double min_constant = 0.0;  // sup q⟨k⟩^{exponent} over every sample
    Vec3 worst_k{};
    bool pass = true;
};

struct DecayReport {
    std::vector<DecayEntry> entries;
    double k_fit_min = 0.0;
    double k_max = 0.0;
    bool pass = true;
    std::string message;

    const DecayEntry& entry(const std::string& id) const;
    // condition, claimed_exponent, fitted_slope, min_constant, k_min, k_max, pass
    std::string to_csv() const;
};

// A line passes when its constant is finite and its slope is at most −exponent + slack.
DecayReport check_decay(const MomentumSymbol& f, const std::vector<DecayLine>& lines, const DecayWindow& window = {});

// Lines with exponents 15, 6, 5, 3 (value, gradient, κ-weighted Hessian, second radial derivative).
DecayReport check_class_Gplus(const MomentumSymbol& f, const DecayWindow& window = {});
// Lines with exponents 4, 0, 1, 1, 2 (value, gradient, κ-weighted Hessian, radial first and second).
DecayReport check_class_Khat(const MomentumSymbol& f, const DecayWindow& window = {});

struct WeightedNorm {
    int power = 0;         // H^power
    int weight = 2;        // ⟨x⟩^weight
    double norm = 0.0;
    double refined = 0.0;  // on the grid with twice the points per axis
    double noise_floor = 0.0;
    bool stable = true;
};

struct G0Report {
    std::vector<WeightedNorm> entries;  // ⟨x⟩²Hⁿψ for n ≤ 8, then ⟨x⟩⁴Hⁿψ for n ≤ 3
    bool pass = true;
    std::string message;
    std::string to_csv() const;
};

struct G0Options {
    double stability = 0.1;
    double floor_factor = 100.0;  // a norm within this factor of the noise floor is not trusted
};

// Norms of ⟨x⟩^w Hⁿψ on `grid` and on its refinement, with H = −Δ/2 (spectral) + V.
// Throws resolution_limited when a norm sinks into the amplified rounding noise.
G0Report check_class_G0(const std::function<cplx(const Vec3&)>& psi, const Potential& V, const CartesianGrid& grid,
                        const G0Options& options = {});

struct MappingReport {
    DecayReport gplus;                  // on F₊ψ at arbitrary k; reported, not part of the verdict
    std::vector<double> moment_errors;  // n = 1, 2, 3
    double value_slope = 0.0;           // fitted slope of |ψ̂_out| on the decay window
    bool pass = true;
    std::string message;
};

struct MappingOptions {
    DecayWindow window{};
    double moment_tolerance = 1e-3;
    double slope_bound = -6.0;
};

// ψ̂_out = F₊ψ: class lines on the arbitrary-k transform, and (k²/2)ⁿF₊ψ against F₊(Hⁿψ) at the
// table's nodes. Passes on the moment identity and the value slope bound.
MappingReport mapping_check(const ComplexField3D& psi, const EigenfunctionTable& table, const Potential& V,
                            const MappingOptions& options = {});

// F₊ψ as a symbol evaluated by gen_fourier_at.
MomentumSymbol outgoing_symbol(const ComplexField3D& psi, const EigenfunctionTable& table);

}  // namespace fastflux
