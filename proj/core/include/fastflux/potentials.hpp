#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fastflux/vec.hpp"

namespace fastflux {

// Named parameters identifying a potential in configs and cache keys.
struct PotentialDescriptor {
    std::string kind;
    std::vector<std::pair<std::string, double>> params;

    double param(const std::string& name, double fallback = 0.0) const;
    std::string canonical() const;
};

// V(x) with the decay metadata |V(x)| ≤ C0·⟨x⟩^{-n-ε} for |x| ≥ R0.
class Potential {
public:
    using Field = std::function<double(const Vec3&)>;
    using Profile = std::function<double(double)>;

    struct Decay {
        int n = 4;
        double epsilon = 1.0;
        double C0 = 1.0;
        double R0 = 1.0;
    };

    Potential(PotentialDescriptor descriptor, Field field, Decay decay, std::vector<Vec3> singularities = {},
              Profile radial = nullptr, double support_radius = 0.0, double max_abs = 0.0);

    double operator()(const Vec3& x) const { return field_(x); }
    double evaluate(const Vec3& x) const { return field_(x); }

    const PotentialDescriptor& descriptor() const noexcept { return descriptor_; }
    const Decay& decay() const noexcept { return decay_; }
    const std::vector<Vec3>& singularities() const noexcept { return singularities_; }

    // Points closer than this to a singularity are dropped from quadratures.
    double exclusion_radius(double grid_spacing) const { return exclusion_factor_ * grid_spacing; }
    void set_exclusion_factor(double factor) { exclusion_factor_ = factor; }

    // Radially symmetric about the origin: V(x) = profile(|x|).
    bool is_radial() const noexcept { return static_cast<bool>(radial_); }
    double radial(double r) const { return radial_(r); }

    // |V| < 1e-14·max|V| beyond this radius; 0 for the zero potential.
    double support_radius() const noexcept { return support_radius_; }
    double max_abs() const noexcept { return max_abs_; }
    bool is_zero() const noexcept { return max_abs_ == 0.0; }

private:
    PotentialDescriptor descriptor_;
    Field field_;
    Decay decay_;
    std::vector<Vec3> singularities_;
    Profile radial_;
    double support_radius_;
    double max_abs_;
    double exclusion_factor_ = 2.0;
};

Potential make_zero_potential();
// V(x) = amplitude·exp(-|x|²/(2 width²)), declared with n = 4, ε = 1.
Potential make_gaussian_potential(double amplitude, double width);
// V(x) = amplitude·⟨x⟩^{-power} with user-claimed decay metadata (used to exercise the checker).
Potential make_power_law_potential(double amplitude, double power, int claimed_n, double claimed_epsilon,
                                   double R0 = 1.0);
Potential make_potential(const PotentialDescriptor& descriptor);

enum class Verdict { pass, fail, indeterminate };
const char* to_string(Verdict v);

struct ClassVnReport {
    Verdict verdict = Verdict::pass;
    double worst_ratio = 0.0;
    Vec3 worst_point{};
    double l2_norm = 0.0;  // ‖V‖₂ by radial–angular quadrature over the sampled shell and its interior
    std::string message;
};

// Samples |V(x)|·⟨x⟩^{n+ε}/C0 on a log grid of radii in [R0, 10·R0] along a set of directions.
ClassVnReport check_class_Vn(const Potential& V, int n, std::size_t n_radii = 1000);

// Zero-range interaction at `location` with boundary parameter α: ∂_r(rφ) − 4πα·rφ → 0.
struct PointInteraction {
    double alpha = 1.0;
    Vec3 location{0.0, 0.0, 0.0};

    // Scattering amplitude f with φ = e^{ik·x} + f·e^{∓ik|x−a|}/|x−a|, sign = +1 for φ₊.
    cplx amplitude(double k, int sign = +1) const;
    bool is_free() const noexcept { return std::isinf(alpha); }
};

}  // namespace fastflux
