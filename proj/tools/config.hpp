#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fastflux/packets.hpp"
#include "fastflux/potentials.hpp"
#include "fastflux/quadrature.hpp"

namespace fastflux::harness {

struct PotentialSpec {
    std::string kind = "zero";  // zero, gaussian, power_law, point
    double amplitude = 0.1;
    double width = 1.0;
    double power = 5.0;
    int claimed_n = 4;
    double claimed_epsilon = 0.5;
    double alpha = 0.1;  // point interaction
    Vec3 location{0.0, 0.0, 0.0};

    bool operator==(const PotentialSpec&) const = default;
};

struct PacketSpec {
    Vec3 center{0.0, 0.0, 0.0};
    double sigma = 1.0;
    Vec3 momentum{0.0, 0.0, 2.0};

    bool operator==(const PacketSpec&) const = default;
};

struct GridSpec {
    double half_width = 12.0;
    std::size_t points = 64;

    bool operator==(const GridSpec&) const = default;
};

struct KGridSpec {
    double k_min = 0.0;
    double k_max = 8.0;
    std::size_t radial = 24;
    std::string angular = "product";  // product or lebedev26
    std::size_t theta = 8;

    bool operator==(const KGridSpec&) const = default;
};

struct DetectorSpec {
    Vec3 axis{0.0, 0.0, 1.0};
    double half_angle_deg = 30.0;
    std::vector<double> radii{20.0, 40.0, 80.0};
    std::size_t n_theta = 24;
    std::size_t n_phi = 48;

    bool operator==(const DetectorSpec&) const = default;
};

struct TimeSpec {
    double T = 1.0;
    double tail_epsilon = 1e-5;
    double t_max = 400.0;  // reach of the scattered-wave expansion

    bool operator==(const TimeSpec&) const = default;
};

struct ToleranceSpec {
    double solver = 1e-6;     // relative sup residual of the integral-equation solve
    double flux_rel = 1e-8;   // time quadrature

    bool operator==(const ToleranceSpec&) const = default;
};

struct SolverSpec {
    double box_half_width = 7.5;
    std::size_t points = 24;

    bool operator==(const SolverSpec&) const = default;
};

struct ProbeSpec {
    double width = 1.0;
    std::vector<double> times{5.0, 10.0, 20.0, 40.0, 80.0};
    std::size_t directions = 6;
    double nodes_per_period = 12.0;
    bool density_check = true;

    bool operator==(const ProbeSpec&) const = default;
};

struct ClassSpec {
    std::string name = "gplus";     // gplus, khat, g0
    std::string symbol = "packet";  // packet, gaussian, bracket, zero
    double width = 1.0;
    double power = 5.0;

    bool operator==(const ClassSpec&) const = default;
};

struct OutputSpec {
    std::string csv;  // empty: stdout
    std::string svg;

    bool operator==(const OutputSpec&) const = default;
};

struct ExperimentConfig {
    PotentialSpec potential;
    PacketSpec packet;
    GridSpec grid;
    KGridSpec k_grid;
    DetectorSpec detector;
    TimeSpec time;
    ToleranceSpec tolerance;
    SolverSpec solver;
    ProbeSpec probe;
    ClassSpec check;
    OutputSpec output;
    std::string cache_dir = ".fastflux-cache";
    std::uint64_t seed = 1;

    bool operator==(const ExperimentConfig&) const = default;
};

// `key = value` lines; `[section]` prefixes the keys that follow, `#` starts a comment.
// Vectors are comma separated. Unknown keys and malformed values throw invalid_argument.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string emit_config(const ExperimentConfig& config);

// Throws invalid_argument naming the first offending key.
void validate(const ExperimentConfig& config);

// FASTFLUX_CACHE_DIR wins over the configured directory.
std::filesystem::path cache_directory(const ExperimentConfig& config);

Potential build_potential(const PotentialSpec& spec);
CartesianGrid build_grid(const GridSpec& spec);
std::shared_ptr<const SphericalKGrid> build_k_grid(const KGridSpec& spec);
GaussianPacket build_packet(const PacketSpec& spec);
Cap build_cone(const DetectorSpec& spec);

}  // namespace fastflux::harness
