#pragma once

#include <vector>

#include "fastflux/potentials.hpp"

namespace fastflux {

struct PartialWaveOptions {
    double dr_max = 0.0025;       // integration step, further limited to 0.004/k
    double store_spacing = 0.005;  // interpolation table spacing, further limited to 0.02/k
    double phase_floor = 1e-16;  // stop once |sin δ_l| falls below this
    int l_cap = 90;
};

// Radial channels of η(x,k) = φ(x,k) − e^{ik·x} for a radially symmetric interaction at one |k|:
// η = Σ_l (2l+1) i^l g_l(|x|) P_l(k̂·x̂). sign = +1 selects φ₊ (incoming scattered wave e^{-ikr}).
class RadialChannels {
public:
    static RadialChannels solve(const Potential& V, double k, int sign, const PartialWaveOptions& options = {});
    static RadialChannels point_interaction(const PointInteraction& p, double k, int sign);
    static RadialChannels free(double k, int sign);

    double k() const noexcept { return k_; }
    int sign() const noexcept { return sign_; }
    int l_max() const noexcept { return static_cast<int>(delta_.size()) - 1; }
    double phase_shift(int l) const { return delta_[l]; }
    // g_l = c_l·h_l(kr) beyond match_radius(), h = h^{(2)} for sign +1 and h^{(1)} for sign −1.
    cplx exterior_coefficient(int l) const { return coeff_[l]; }
    double match_radius() const noexcept { return r_match_; }

    // g_l(r) for l = 0..l_max, and its radial derivative when dg is given. r = 0 is allowed for
    // smooth potentials; the point interaction is singular there.
    void evaluate(double r, std::vector<cplx>& g, std::vector<cplx>* dg = nullptr) const;

private:
    double k_ = 0.0;
    int sign_ = 1;
    double dr_ = 0.0;
    double r_match_ = 0.0;
    std::vector<double> delta_;
    std::vector<cplx> coeff_;
    std::vector<cplx> phase_;                    // e^{-i·sign·δ_l}
    std::vector<std::vector<double>> u_, du_;  // normalised regular solutions on the interior grid
};

// Sup over channels and sample radii of |g_l − (radial Lippmann–Schwinger right-hand side)|,
// relative to the largest |g_l| seen; evaluated by dense Gauss–Legendre quadrature.
double radial_ls_residual(const Potential& V, const RadialChannels& ch, const std::vector<double>& radii);

}  // namespace fastflux
