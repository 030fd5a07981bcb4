#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fastflux/grid.hpp"
#include "fastflux/lippmann_schwinger.hpp"
#include "fastflux/partial_waves.hpp"
#include "fastflux/potentials.hpp"
#include "fastflux/quadrature.hpp"

namespace fastflux {

// e^{ik·x} + f(k)·e^{ik·a}·e^{∓ik|x−a|}/|x−a|, f = 1/(4πα ± ik).
cplx point_interaction_eigenfunction(const PointInteraction& p, const Vec3& x, const Vec3& k, int sign = +1);

enum class TableKind { free, channels, sampled };

// φ±(x,k) = e^{ik·x} + η(x,k) on a spherical k-grid. The plane wave is never stored; η is held as
// radial channels (radially symmetric interactions) or as grid samples from the 3D solver.
class EigenfunctionTable {
public:
    static EigenfunctionTable free(std::shared_ptr<const SphericalKGrid> k_grid, const CartesianGrid& x_grid,
                                   int sign = +1);
    static EigenfunctionTable from_channels(const Potential& V, std::shared_ptr<const SphericalKGrid> k_grid,
                                            const CartesianGrid& x_grid, int sign = +1,
                                            const PartialWaveOptions& options = {});
    static EigenfunctionTable from_point_interaction(const PointInteraction& p,
                                                     std::shared_ptr<const SphericalKGrid> k_grid,
                                                     const CartesianGrid& x_grid, int sign = +1);
    // Solves the 3D equation at every node; η is stored on the solver grid.
    static EigenfunctionTable from_solver(const Potential& V, std::shared_ptr<const SphericalKGrid> k_grid,
                                          int sign = +1, const LsOptions& options = {});
    static EigenfunctionTable from_samples(const PotentialDescriptor& descriptor,
                                           std::shared_ptr<const SphericalKGrid> k_grid, const CartesianGrid& x_grid,
                                           int sign, std::vector<ComplexField3D> eta, double residual_sup);

    TableKind kind() const noexcept { return kind_; }
    int sign() const noexcept { return sign_; }
    const SphericalKGrid& k_grid() const noexcept { return *k_grid_; }
    const std::shared_ptr<const SphericalKGrid>& k_grid_ptr() const noexcept { return k_grid_; }
    const CartesianGrid& x_grid() const noexcept { return x_grid_; }
    double residual_sup() const noexcept { return residual_sup_; }
    const PotentialDescriptor& descriptor() const noexcept { return descriptor_; }
    bool is_free() const noexcept { return kind_ == TableKind::free; }
    const Vec3& center() const noexcept { return center_; }

    const RadialChannels& channels(std::size_t radial_index) const { return channels_.at(radial_index); }
    const ComplexField3D& samples(std::size_t node) const { return samples_.at(node); }

    // η at a k-grid node, and at an arbitrary k ≠ 0 (recomputed by the table's backend).
    cplx eta(const Vec3& x, std::size_t node) const;
    cplx eta_at(const Vec3& x, const Vec3& k) const;
    cplx phi(const Vec3& x, std::size_t node) const;
    cplx phi_at(const Vec3& x, const Vec3& k) const;
    // Radial channels at an arbitrary |k| > 0 (channel tables only).
    RadialChannels channels_at(double k) const;
    // η(·,k) on the solver grid at an arbitrary k (sampled tables only).
    ComplexField3D eta_field_at(const Vec3& k) const;

private:
    cplx channel_sum(const RadialChannels& ch, const Vec3& x, const Vec3& k) const;

    TableKind kind_ = TableKind::free;
    int sign_ = 1;
    std::shared_ptr<const SphericalKGrid> k_grid_;
    CartesianGrid x_grid_{8.0, 8};
    double residual_sup_ = 0.0;
    PotentialDescriptor descriptor_{"zero", {}};
    Vec3 center_{0.0, 0.0, 0.0};
    std::vector<RadialChannels> channels_;
    std::vector<ComplexField3D> samples_;
    std::optional<Potential> potential_;
    std::optional<PointInteraction> point_;
    PartialWaveOptions pw_options_;
    LsOptions ls_options_;
};

// Largest |η|·|x| over the outermost grid shell (the 1/|x| boundary envelope constant).
double boundary_envelope(const ComplexField3D& eta);

struct ResonanceScreen {
    double born_ratio = 0.0;
    double condition = 1.0;
    bool rejected = false;
    std::string reason;
};

// Born contraction and solver conditioning at the smallest k: the zero-energy resonance proxy.
ResonanceScreen screen_resonance(const Potential& V, double k_min, const LsOptions& options = {},
                                 double ratio_limit = 0.9);

struct BoundEntry {
    std::string name;      // "phi", "d_x", "d_xy", "radial_2", ...
    int order = 0;         // |α| or l
    double weighted = 0.0;    // sup |κ^{|α|−1} ∂^α φ| / ⟨x⟩^{|α|}; radial entries: sup |∂_k^l φ| / ⟨x⟩^l
    double unweighted = 0.0;  // sup |∂^α φ| / ⟨x⟩^{|α|}
    double weighted_refined = 0.0;
    Vec3 worst_x{}, worst_k{};
    bool stable = true;
};

struct BoundCheckReport {
    double sup_abs_phi = 0.0;
    std::vector<BoundEntry> multi_index;  // |α| = 1, 2
    std::vector<BoundEntry> radial;       // l = 1, 2
    bool pass = true;
    std::string message;
};

struct BoundCheckOptions {
    std::vector<double> radii{0.0, 1.0, 2.0, 4.0};
    std::size_t directions = 6;   // Lebedev-26 subset for x̂ and k̂
    double step_fraction = 0.5;   // finite-difference step relative to the local radial spacing
    double stability = 0.2;
};

BoundCheckReport check_eigenfunction_bounds(const EigenfunctionTable& table, const BoundCheckOptions& options = {});

// Binary cache: magic "FAST\x01", 8-byte little-endian descriptors, interleaved (re, im) η samples,
// residual_sup, then a CRC-32 of everything before it.
std::string table_cache_key(const EigenfunctionTable& table, const std::string& extra = "");
std::string cache_key(const PotentialDescriptor& potential, const SphericalKGrid& k_grid, const CartesianGrid& x_grid,
                      int sign, TableKind kind, const std::string& extra = "");
void save_table(const EigenfunctionTable& table, const std::filesystem::path& path);
EigenfunctionTable load_table(const std::filesystem::path& path);

}  // namespace fastflux
