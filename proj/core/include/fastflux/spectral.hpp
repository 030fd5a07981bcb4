#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "fastflux/eigenfunctions.hpp"
#include "fastflux/grid.hpp"
#include "fastflux/momentum.hpp"

namespace fastflux {

// Grid points grouped by their distance from a centre.
class RadialShells {
public:
    RadialShells(const CartesianGrid& grid, const Vec3& center);

    const CartesianGrid& grid() const noexcept { return grid_; }
    const Vec3& center() const noexcept { return center_; }
    std::size_t size() const noexcept { return radii_.size(); }
    double radius(std::size_t s) const { return radii_[s]; }
    std::span<const std::size_t> points(std::size_t s) const
    {
        return {order_.data() + offsets_[s], offsets_[s + 1] - offsets_[s]};
    }

    // A[s][lm] = Σ_{x∈s} S_lm(x̂) f(x) for l ≤ l_max. Shells on which f vanishes give empty rows.
    std::vector<std::vector<cplx>> project(const ComplexField3D& f, int l_max) const;
    // out(x) += Σ_lm S_lm(x̂)·C[s(x)][lm]; empty rows are skipped.
    void synthesize(const std::vector<std::vector<cplx>>& C, int l_max, ComplexField3D& out) const;

private:
    CartesianGrid grid_;
    Vec3 center_;
    std::vector<double> radii_;
    std::vector<std::size_t> offsets_, order_;
};

// (F±f)(k) = (2π)^{-3/2} Σ_x h³ φ±*(x,k) f(x) at the table's k-nodes.
MomentumAmplitude gen_fourier_forward(const ComplexField3D& f, const EigenfunctionTable& table);
// The same sum at arbitrary k ≠ 0; η is recomputed for every distinct |k| (radial tables) or k (sampled).
std::vector<cplx> gen_fourier_at(const ComplexField3D& f, const EigenfunctionTable& table, const std::vector<Vec3>& ks);

// (F±^{-1}g)(x) = (2π)^{-3/2} Σ_k w_k φ±(x,k) g(k) on the table's x-grid (or `grid` when given).
ComplexField3D gen_fourier_inverse(const MomentumAmplitude& amp, const EigenfunctionTable& table,
                                   const std::optional<CartesianGrid>& grid = std::nullopt);
// Ω±f = f + Σ_k w_k η(·,k) f̂(k): the plane-wave part is f itself, never resampled.
ComplexField3D wave_operator_apply(const ComplexField3D& f_out, const EigenfunctionTable& table);
// The η part only: (2π)^{-3/2} Σ_k w_k η(x,k) g(k).
ComplexField3D scattered_synthesis(const MomentumAmplitude& amp, const EigenfunctionTable& table,
                                   const CartesianGrid& grid);

struct ExpansionOptions {
    double t_max = 0.0;
    double r_max = 0.0;                // 0: the grid corner
    std::size_t radial_nodes = 0;      // 0: from the oscillation count of e^{-ik²t/2 ∓ ikr}
    double channel_floor = 1e-13;      // (l, m) channels below this fraction of the largest are dropped
    std::size_t nodes_per_panel = 8;
    std::size_t master_nodes = 160;    // Chebyshev nodes in k for interpolating solved channels
};

// β(x,t) = (2π)^{-3/2}∫ η(x,k) e^{-ik²t/2} ψ̂_out(k) d³k for radial tables, by a dense radial rule
// and the spherical-harmonic projections of ψ̂_out, so it can be evaluated anywhere for t ≤ t_max.
class OutgoingExpansion {
public:
    OutgoingExpansion(const EigenfunctionTable& table, const ComplexField3D& psi_out, ExpansionOptions options = {});

    const std::vector<double>& k_nodes() const noexcept { return k_; }
    std::size_t channel_count() const noexcept { return lm_.size(); }
    int l_max() const noexcept { return l_max_; }
    const Vec3& center() const noexcept { return center_; }

    // β and ∂_rβ at radius r about the centre, for each direction.
    void on_sphere(double r, double t, const std::vector<Vec3>& directions, std::vector<cplx>& beta,
                   std::vector<cplx>* radial_derivative = nullptr) const;
    cplx beta(const Vec3& x, double t) const;
    // β(·,t) on every point of a grid.
    ComplexField3D field(const CartesianGrid& grid, double t) const;
    double t_max() const noexcept { return t_max_; }

private:
    struct Radial {
        std::vector<cplx> g, dg;  // [j * n_l + l]
    };
    Radial radial_functions(double r, bool derivative) const;
    void bary_row(double k, std::vector<double>& b) const;

    Vec3 center_;
    double t_max_ = 0.0;
    double r_max_ = 0.0;
    int sign_ = 1;
    int l_max_ = 0;
    int l_act_ = 0;  // largest l among the kept channels
    int nl_ = 1;
    double r_ext_ = 0.0;  // exterior (pure Hankel) form holds beyond this radius
    std::vector<double> k_, w_;
    std::vector<RadialChannels> channels_;  // per k-node, when solved directly
    std::vector<RadialChannels> masters_;   // Chebyshev nodes, when interpolated
    std::vector<double> xm_, wm_;           // Chebyshev masters and barycentric weights
    bool interpolated_ = false;
    std::vector<cplx> coeff_;               // exterior coefficients [j * nl + l]
    std::vector<std::pair<int, int>> lm_;
    std::vector<std::vector<cplx>> amp_;  // [channel][j]: w_j k_j² ψ̃_lm(k_j)·4π(2π)^{-3/2} i^l
    bool free_ = false;
    // Radial functions of the last sphere, reused across times.
    mutable std::mutex cache_mutex_;
    mutable std::shared_ptr<const Radial> cached_;
    mutable double cached_r_ = -1.0;
    mutable bool cached_deriv_ = false;
};

// ψ = F₊^{-1}(e^{-ik²t/2} ψ̂_out) with ψ_out kept in position space for the free part.
class ScatteringState {
public:
    // ψ(0) = Ω₊ψ_out.
    static ScatteringState from_outgoing(const ComplexField3D& psi_out, const EigenfunctionTable& table);
    // ψ̂_out = e^{ik²t/2}F₊ψ; ψ_out is resynthesised from the k-nodes.
    static ScatteringState from_position(const ComplexField3D& psi, const EigenfunctionTable& table, double t = 0.0);

    const ComplexField3D& position_field() const noexcept { return position_; }
    const ComplexField3D& out_field() const noexcept { return out_field_; }
    const MomentumAmplitude& out_amplitude() const noexcept { return out_amplitude_; }
    double time() const noexcept { return time_; }

private:
    friend ScatteringState evolve(const ScatteringState& state, double t, const EigenfunctionTable& table);
    ScatteringState(ComplexField3D position, ComplexField3D out_field, MomentumAmplitude out, double time);

    ComplexField3D position_;
    ComplexField3D out_field_;
    MomentumAmplitude out_amplitude_;
    double time_;
    mutable std::shared_ptr<const OutgoingExpansion> expansion_;
};

// Advances by t: the free part exactly by FFT; the scattered part by the dense radial expansion for
// radial tables and by k-node quadrature for sampled ones.
ScatteringState evolve(const ScatteringState& state, double t, const EigenfunctionTable& table);
// ψ̂_out = F₊ψ.
MomentumAmplitude outgoing_asymptote(const ComplexField3D& psi, const EigenfunctionTable& table);

// Split-step Fourier propagation of ψ under H = −Δ/2 + V (Strang splitting), the independent oracle
// for the diagonalised evolution.
ComplexField3D split_step_evolve(const ComplexField3D& psi, const Potential& V, double t, std::size_t steps);
// Hψ with the Laplacian taken spectrally and V pointwise.
ComplexField3D apply_hamiltonian(const ComplexField3D& psi, const Potential& V);

}  // namespace fastflux
