#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <optional>

#include <spdlog/spdlog.h>

#include "fastflux/classes.hpp"
#include "fastflux/csv.hpp"
#include "fastflux/eigenfunctions.hpp"
#include "fastflux/fft.hpp"
#include "fastflux/flux.hpp"
#include "fastflux/lippmann_schwinger.hpp"
#include "fastflux/propagation.hpp"

namespace fastflux::harness {

int exit_code_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::grid_mismatch:
    case ErrorCode::not_power_of_two: return exit_usage;
    case ErrorCode::singular_system:
    case ErrorCode::no_convergence:
    case ErrorCode::divergence:
    case ErrorCode::tail_not_convergent: return exit_solver;
    case ErrorCode::cache_corrupt:
    case ErrorCode::io: return exit_persistence;
    case ErrorCode::under_resolved:
    case ErrorCode::resolution_limited:
    case ErrorCode::cap_outside_grid: return exit_resolution;
    }
    return exit_solver;
}

namespace {

// Writes to the configured file, or to `fallback` when no path is set.
void emit(const std::string& path, std::ostream& fallback, const std::string& text)
{
    if (path.empty()) {
        fallback << text;
        fallback.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw Error(ErrorCode::io, "cannot write '" + path + "'");
}

LsOptions solver_options(const ExperimentConfig& c)
{
    LsOptions o;
    o.box_half_width = c.solver.box_half_width;
    o.points_per_axis = c.solver.points;
    o.tolerance = c.tolerance.solver;
    o.seed = c.seed;
    return o;
}

double max_radius(const std::vector<double>& radii)
{
    double r = 0.0;
    for (double x : radii)
        if (std::isfinite(x)) r = std::max(r, x);
    return r;
}

FarField far_field(const ExperimentConfig& c, const ComplexField3D& psi_out)
{
    const std::string& kind = c.potential.kind;
    if (kind == "zero") return FarField(psi_out);
    const auto kg = build_k_grid(c.k_grid);
    const double r_max = std::max(max_radius(c.detector.radii), 1.0);
    if (kind == "point") {
        const auto table = EigenfunctionTable::from_point_interaction(
            PointInteraction{c.potential.alpha, c.potential.location}, kg, psi_out.grid());
        return FarField(psi_out, table, c.time.t_max, r_max);
    }
    const Potential V = build_potential(c.potential);
    if (!V.is_radial())
        throw Error(ErrorCode::invalid_argument, "potential.kind: fast-run needs a radially symmetric potential");
    const auto table = EigenfunctionTable::from_channels(V, kg, psi_out.grid());
    return FarField(psi_out, table, c.time.t_max, r_max);
}

MomentumSymbol class_symbol(const ExperimentConfig& c)
{
    const std::string& s = c.check.symbol;
    if (s == "packet") return build_packet(c.packet).symbol();
    if (s == "gaussian") return MomentumSymbol::gaussian(c.check.width);
    if (s == "bracket") return MomentumSymbol::bracket_power(c.check.power);
    return MomentumSymbol::zero();
}

}  // namespace

int solve_eigen(const ExperimentConfig& c, std::ostream& out)
{
    validate(c);
    if (c.potential.kind == "point") {
        const auto table = EigenfunctionTable::from_point_interaction(
            PointInteraction{c.potential.alpha, c.potential.location}, build_k_grid(c.k_grid), build_grid(c.grid));
        spdlog::info("point interaction: closed-form channels for {} k-nodes, nothing to cache", table.k_grid().size());
        out << csv_row({"status", "nodes", "residual_sup", "path"})
            << csv_row({"closed_form", std::to_string(table.k_grid().size()), format_number(table.residual_sup()), ""});
        return exit_ok;
    }
    const Potential V = build_potential(c.potential);
    const LsOptions opts = solver_options(c);
    const auto kg = build_k_grid(c.k_grid);
    const CartesianGrid solver_grid = LsOperator(V, opts).grid();
    const TableKind kind = V.is_zero() ? TableKind::free : TableKind::sampled;
    const std::string extra = "tol=" + format_number(opts.tolerance) + ";seed=" + std::to_string(opts.seed);
    const auto dir = cache_directory(c);
    const auto path = dir / (cache_key(V.descriptor(), *kg, solver_grid, +1, kind, extra) + ".fftab");

    std::string status;
    std::optional<EigenfunctionTable> table;
    if (std::filesystem::exists(path)) {
        table = load_table(path);
        status = "cache_hit";
        spdlog::info("loaded {} from cache", path.string());
    } else {
        table = EigenfunctionTable::from_solver(V, kg, +1, opts);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw Error(ErrorCode::io, "cannot create cache directory '" + dir.string() + "'");
        save_table(*table, path);
        status = "solved";
        spdlog::info("solved {} k-nodes, sup residual {}; wrote {}", kg->size(), table->residual_sup(), path.string());
    }
    out << csv_row({"status", "nodes", "residual_sup", "path"})
        << csv_row({status, std::to_string(table->k_grid().size()), format_number(table->residual_sup()),
                    path.string()});
    return exit_ok;
}

int fast_run(const ExperimentConfig& c, std::ostream& out)
{
    validate(c);
    FastOptions o;
    o.radii = c.detector.radii;
    o.T = c.time.T;
    o.cone = build_cone(c.detector);
    o.flux.quadrature = {c.detector.n_theta, c.detector.n_phi};
    o.flux.tail_epsilon = c.time.tail_epsilon;
    o.flux.rel_tol = c.tolerance.flux_rel;

    FastReport report;
    try {
        const GaussianPacket packet = build_packet(c.packet);
        const ComplexField3D psi_out = packet.sample(build_grid(c.grid));
        const FarField ff = far_field(c, psi_out);
        report = fast_experiment(ff, packet.symbol(), o);
    } catch (const Error& e) {
        emit(c.output.csv, out,
             csv_row({"R", "lhs", "lhs_abs", "rhs", "early_fraction", "tail_estimate", "status"}) +
                 csv_row({"", "", "", "", "", "", std::string("FAILED: ") + e.what()}));
        throw;
    }
    emit(c.output.csv, out, report.to_csv());
    if (!c.output.svg.empty()) emit(c.output.svg, out, report.to_svg());
    std::size_t failed = 0;
    for (const auto& r : report.rows) {
        if (r.failed) {
            ++failed;
            spdlog::warn("R = {}: {}", r.R, r.message);
        } else {
            spdlog::info("R = {}: lhs {} rhs {} relative error {}", r.R, r.lhs, report.rhs, r.relative_error);
        }
    }
    return failed ? exit_solver : exit_ok;
}

int statphase_probe(const ExperimentConfig& c, std::ostream& out)
{
    validate(c);
    ProbeOptions o;
    o.times = c.probe.times;
    o.directions = c.probe.directions;
    o.quadrature.nodes_per_period = c.probe.nodes_per_period;
    o.density_check = c.probe.density_check;
    const auto probe = error_constant_probe(MomentumSymbol::gaussian(c.probe.width), o);
    emit(c.output.csv, out, probe.to_csv());
    if (!probe.warning.empty()) spdlog::warn("{}", probe.warning);
    spdlog::info("slope {} (window [{}, {}]), L = {}, refined L = {}", format_number(probe.slope), o.slope_low,
                 o.slope_high, probe.L, probe.L_refined);
    return exit_ok;
}

int class_check(const ExperimentConfig& c, std::ostream& out)
{
    validate(c);
    if (c.check.name == "g0") {
        if (c.check.symbol != "packet" && c.check.symbol != "zero")
            throw Error(ErrorCode::invalid_argument, "class.symbol: g0 checks a packet or zero in position space");
        if (c.potential.kind == "point")
            throw Error(ErrorCode::invalid_argument, "potential.kind: g0 needs a potential function");
        const GaussianPacket p = build_packet(c.packet);
        const bool zero = c.check.symbol == "zero";
        const auto rep = check_class_G0([&](const Vec3& x) { return zero ? cplx{} : p(x); },
                                        build_potential(c.potential), build_grid(c.grid));
        emit(c.output.csv, out, rep.to_csv());
        spdlog::info("g0: {}{}", rep.pass ? "pass" : "fail", rep.message.empty() ? "" : " (" + rep.message + ")");
        return exit_ok;
    }
    const MomentumSymbol f = class_symbol(c);
    const DecayReport rep = c.check.name == "gplus" ? check_class_Gplus(f) : check_class_Khat(f);
    emit(c.output.csv, out, rep.to_csv());
    spdlog::info("{}: {}{}", c.check.name, rep.pass ? "pass" : "fail",
                 rep.message.empty() ? "" : " (" + rep.message + ")");
    return exit_ok;
}

int self_test(const ExperimentConfig& c, std::ostream& out)
{
    validate(c);
    struct Check {
        std::string name;
        std::function<double()> measure;
        double bound;
    };
    const GaussianPacket packet{{0.0, 0.0, 0.0}, 1.0, {0.0, 0.0, 1.0}};
    const std::vector<Check> checks{
        {"config_round_trip", [&] { return parse_config(emit_config(c)) == c ? 0.0 : 1.0; }, 0.5},
        {"plancherel",
         [&] {
             const ComplexField3D f = packet.sample(CartesianGrid(12.0, 32));
             return std::abs(fft_forward(f).norm() - f.norm());
         },
         1e-10},
        {"free_propagator_closed_form",
         [] {
             const MomentumSymbol chi = MomentumSymbol::gaussian(1.0);
             return std::abs(free_evolve_exact(chi, {}, 2.0) - std::pow(2.0 * pi, 1.5) * std::pow(cplx(1.0, 2.0), -1.5));
         },
         1e-10},
        {"integral_equation_residual",
         [] { return ls_solve_direct(make_gaussian_potential(0.1, 1.0), {0.0, 0.0, 1.0}, +1).residual; }, 1e-6},
        {"gaussian_in_gplus", [] { return check_class_Gplus(MomentumSymbol::gaussian(1.0)).pass ? 0.0 : 1.0; }, 0.5},
        {"bracket_outside_gplus",
         [] { return check_class_Gplus(MomentumSymbol::bracket_power(5.0)).pass ? 1.0 : 0.0; }, 0.5},
        {"flux_balance",
         [&] {
             const FarField ff(packet.sample(CartesianGrid(12.0, 64)));
             const double R = 6.0, t = 3.0, h = 0.05;
             const double dPdt = (ball_probability(ff, R, t + 2 * h) - 8 * ball_probability(ff, R, t + h) +
                                  8 * ball_probability(ff, R, t - h) - ball_probability(ff, R, t - 2 * h)) /
                                 (12.0 * h);
             const double flux = surface_flux(ff, DetectorCap{Cap{}, R}, t).signed_flux;
             return std::abs(dPdt - flux) / std::abs(flux);
         },
         1e-3},
    };
    out << csv_row({"check", "value", "bound", "status"});
    bool all = true;
    for (const auto& ch : checks) {
        double v = 0.0;
        std::string status;
        try {
            v = ch.measure();
            status = v <= ch.bound ? "pass" : "fail";
        } catch (const Error& e) {
            v = std::nan("");
            status = std::string("error: ") + e.what();
        }
        all = all && status == "pass";
        out << csv_row({ch.name, format_number(v), format_number(ch.bound), status});
        out.flush();
    }
    return all ? exit_ok : exit_self_test;
}

}  // namespace fastflux::harness
