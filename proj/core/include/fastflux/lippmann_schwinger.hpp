#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "fastflux/grid.hpp"
#include "fastflux/potentials.hpp"

namespace fastflux {

struct LsOptions {
    double box_half_width = 7.5;
    std::size_t points_per_axis = 24;
    double support_threshold = 1e-12;  // relative to max|V|
    double tolerance = 1e-6;            // required relative sup residual
    double gmres_tolerance = 1e-12;
    std::size_t gmres_restart = 60;
    std::size_t max_iterations = 400;
    double condition_limit = 1e8;
    std::size_t residual_targets = 256;
    std::uint64_t seed = 1;
};

// Discrete convolution with the truncated kernel e^{-iκ|x|}/|x|·1{|x| < L}, L = √3·(box side), built from
// its exact Fourier transform so that it acts with spectral accuracy on smooth data supported in the box.
class TruncatedKernel {
public:
    TruncatedKernel(const CartesianGrid& grid, double kappa);

    // out_i = Σ_j G(x_i − x_j) src_j over the n³ grid (no h³ factor).
    void apply(const std::vector<cplx>& src, std::vector<cplx>& out) const;
    // G at the lattice offset (di, dj, dl), |d| < n.
    cplx at(long di, long dj, long dl) const;

    double kappa() const noexcept { return kappa_; }

    // Fourier transform ∫ e^{-iq·x} G(x) d³x of the truncated kernel.
    static cplx transform(double q, double kappa, double L);

private:
    std::size_t n_;
    double kappa_;
    std::vector<cplx> real_;      // (2n)³ circular layout
    std::vector<cplx> spectrum_;  // FFT of real_
};

struct EtaSolution {
    Vec3 k{};
    int sign = 1;
    ComplexField3D eta;
    double residual = 0.0;  // relative sup residual from the direct-sum check
    std::size_t iterations = 0;
    double condition = 1.0;
};

struct BornSolution {
    ComplexField3D eta;
    double ratio = 0.0;  // ‖term_{j+1}‖/‖term_j‖ at the last computed term
    std::size_t terms = 0;
};

// η(x) = −(1/2π)∫ e^{∓ik|x−y|}/|x−y|·V(y)(e^{ik·y} + η(y)) d³y, discretised on a Cartesian box.
// Unknowns live on the support of V; values elsewhere follow from one kernel application.
class LsOperator {
public:
    LsOperator(const Potential& V, LsOptions options = {});

    const CartesianGrid& grid() const noexcept { return grid_; }
    const LsOptions& options() const noexcept { return options_; }
    std::size_t support_size() const noexcept { return support_.size(); }

    EtaSolution solve(const Vec3& k, int sign) const;
    BornSolution born(const Vec3& k, int sign, std::size_t max_terms) const;

    // Relative sup of |η − RHS[η]| at sampled grid points, RHS evaluated by explicit summation.
    double residual(const Vec3& k, int sign, const ComplexField3D& eta) const;

private:
    std::shared_ptr<const TruncatedKernel> kernel(double kappa) const;
    // −(h³/2π)·Σ_{j∈S} G(x − x_j) s_j on the full grid.
    void apply_full(const TruncatedKernel& G, const std::vector<cplx>& support_values, std::vector<cplx>& out) const;
    std::vector<cplx> plane_wave(const Vec3& k) const;

    Potential V_;
    LsOptions options_;
    CartesianGrid grid_;
    std::vector<std::size_t> support_;
    std::vector<double> v_support_;
    mutable std::mutex mutex_;
    mutable std::map<double, std::shared_ptr<const TruncatedKernel>> kernels_;
};

EtaSolution ls_solve_direct(const Potential& V, const Vec3& k, int sign, const LsOptions& options = {});
BornSolution ls_solve_born(const Potential& V, const Vec3& k, int sign, std::size_t max_terms,
                           const LsOptions& options = {});

}  // namespace fastflux
