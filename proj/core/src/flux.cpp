#include "fastflux/flux.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "fastflux/csv.hpp"
#include "fastflux/dft.hpp"
#include "fastflux/error.hpp"
#include "fastflux/fft.hpp"

namespace fastflux {

namespace {

constexpr double kSupportTolerance = 1e-12;

double inv_two_pi_32() { return std::pow(2.0 * pi, -1.5); }

ComplexField3D zero_padded(const ComplexField3D& f)
{
    const CartesianGrid& g = f.grid();
    const std::size_t n = g.points_per_axis(), n2 = 2 * n;
    const CartesianGrid fine(g.half_width(), n2);
    const MomentumAmplitude amp = fft_forward(f);
    std::vector<cplx> padded(fine.size(), cplx{});
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 1; j < n; ++j)
            for (std::size_t l = 1; l < n; ++l)
                padded[fine.index(i + n / 2, j + n / 2, l + n / 2)] = amp[g.index(i, j, l)];
    return fft_inverse(MomentumAmplitude(MomentumLayout{CartesianDual{fine}}, std::move(padded)));
}

}  // namespace

std::array<std::vector<double>, 3> flux_density(const ComplexField3D& psi)
{
    const auto grad = gradient(psi);
    std::array<std::vector<double>, 3> j;
    for (int a = 0; a < 3; ++a) {
        j[a].resize(psi.size());
        for (std::size_t i = 0; i < psi.size(); ++i) j[a][i] = std::imag(std::conj(psi[i]) * grad[a][i]);
    }
    return j;
}

FluxValue surface_flux(const ComplexField3D& psi, const DetectorCap& cap, const CapQuadrature& quad)
{
    const CartesianGrid& g = psi.grid();
    if (!(cap.radius > 0.0)) throw Error(ErrorCode::invalid_argument, "cap radius must be positive");
    if (cap.radius > 0.9 * g.half_width())
        throw Error(ErrorCode::cap_outside_grid, "cap radius exceeds 0.9 of the grid half-width");
    const AngularRule rule = AngularRule::cap(cap.cone, quad.n_theta, quad.n_phi);
    std::vector<Vec3> points;
    points.reserve(rule.size());
    for (const auto& nd : rule.nodes()) points.push_back(cap.radius * nd.direction);
    const auto values = interpolate_at(psi, points);
    const auto grad = gradient(psi);
    std::array<std::vector<cplx>, 3> dv;
    for (int a = 0; a < 3; ++a) dv[a] = interpolate_at(grad[a], points);
    FluxValue out;
    const double r2 = cap.radius * cap.radius;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const Vec3& n = rule[i].direction;
        const cplx dr = n[0] * dv[0][i] + n[1] * dv[1][i] + n[2] * dv[2][i];
        const double jn = std::imag(std::conj(values[i]) * dr);
        out.signed_flux += rule[i].weight * r2 * jn;
        out.abs_flux += rule[i].weight * r2 * std::abs(jn);
    }
    return out;
}

FarField::FarField(const ComplexField3D& psi_out) : t_max_(std::numeric_limits<double>::infinity()),
                                                     r_max_(std::numeric_limits<double>::infinity())
{
    init_levels(psi_out);
}

FarField::FarField(const ComplexField3D& psi_out, const EigenfunctionTable& table, double t_max, double r_max,
                   ExpansionOptions options)
    : t_max_(t_max), r_max_(r_max)
{
    if (!(t_max > 0.0) || !(r_max > 0.0)) throw Error(ErrorCode::invalid_argument, "far field needs t_max, r_max > 0");
    init_levels(psi_out);
    if (table.is_free()) {
        t_max_ = std::numeric_limits<double>::infinity();
        r_max_ = std::numeric_limits<double>::infinity();
        return;
    }
    options.t_max = t_max;
    options.r_max = r_max + norm(table.center());
    beta_ = std::make_unique<OutgoingExpansion>(table, psi_out, options);
}

void FarField::init_levels(const ComplexField3D& psi_out)
{
    Level lv{psi_out, grid_coordinates(psi_out.grid())};
    const CartesianGrid& g = psi_out.grid();
    lv.nyquist = g.nyquist();
    const double vmax = psi_out.max_abs();
    if (vmax > 0.0) {
        for (std::size_t i = 0; i < g.size(); ++i)
            if (std::abs(psi_out[i]) > kSupportTolerance * vmax) lv.r_support = std::max(lv.r_support, norm(g.point(i)));
        const MomentumAmplitude amp = fft_forward(psi_out);
        double amax = 0.0;
        for (const auto& a : amp.values()) amax = std::max(amax, std::abs(a));
        for (std::size_t i = 0; i < g.size(); ++i)
            if (std::abs(amp[i]) > kSupportTolerance * amax) lv.k_band = std::max(lv.k_band, norm(g.momentum_point(i)));
        if (lv.k_band >= lv.nyquist)
            throw Error(ErrorCode::under_resolved, "outgoing state is not band-limited on its grid");
    }
    levels_.push_back(std::move(lv));
}

const FarField::Level& FarField::fine_level() const
{
    std::lock_guard lock(fine_mutex_);
    if (!fine_) {
        const Level& base = levels_.front();
        ComplexField3D f = zero_padded(base.field);
        auto coords = grid_coordinates(f.grid());
        const double nyq = f.grid().nyquist();
        fine_ = std::make_unique<Level>(Level{std::move(f), std::move(coords), base.r_support, base.k_band, nyq});
    }
    return *fine_;
}

void FarField::alpha(const std::vector<Vec3>& points, double t, bool with_gradient, Sample& out) const
{
    out.value.assign(points.size(), cplx{});
    if (with_gradient) out.gradient.assign(points.size(), {});
    if (t == 0.0) throw Error(ErrorCode::invalid_argument, "far field needs t != 0");
    const Level& base = levels_.front();
    if (base.r_support == 0.0 && base.k_band == 0.0 && base.field.max_abs() == 0.0) return;
    // Band of the chirped state g_t = e^{i|y|²/2t} ψ_out: its transform at q picks up
    // aliases from q + 2·nyquist·m, so a level serves q when band + |q| < 2·nyquist.
    const double band = base.r_support / std::abs(t) + base.k_band;
    std::vector<std::size_t> on_base, on_fine;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double q = norm(points[i]) / std::abs(t);
        if (q >= band) continue;
        if (band + q < 2.0 * base.nyquist)
            on_base.push_back(i);
        else if (band + q < 4.0 * base.nyquist)
            on_fine.push_back(i);
        else
            throw Error(ErrorCode::under_resolved, "chirped state exceeds the refined grid band at t = " +
                                                       format_number(t));
    }
    const cplx pre = std::pow(cplx(0.0, t), -1.5);
    auto run = [&](const Level& lv, const std::vector<std::size_t>& idx) {
        if (idx.empty()) return;
        const CartesianGrid& g = lv.field.grid();
        std::vector<cplx> chirped(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Vec3 y = g.point(i);
            chirped[i] = std::polar(1.0, dot(y, y) / (2.0 * t)) * lv.field[i];
        }
        std::vector<Vec3> qs(idx.size());
        for (std::size_t m = 0; m < idx.size(); ++m) qs[m] = (1.0 / t) * points[idx[m]];
        const double c = inv_two_pi_32() * g.cell_volume();
        if (!with_gradient) {
            const auto s = lattice_sum(chirped, lv.coords, qs, -1);
            for (std::size_t m = 0; m < idx.size(); ++m) {
                const Vec3& x = points[idx[m]];
                out.value[idx[m]] = pre * std::polar(c, dot(x, x) / (2.0 * t)) * s[m];
            }
            return;
        }
        const auto s = lattice_sum_with_moments(chirped, lv.coords, qs, -1);
        for (std::size_t m = 0; m < idx.size(); ++m) {
            const Vec3& x = points[idx[m]];
            const cplx f = pre * std::polar(c, dot(x, x) / (2.0 * t));
            out.value[idx[m]] = f * s[m].value;
            for (int a = 0; a < 3; ++a)
                out.gradient[idx[m]][a] = f * (I * (qs[m][a]) * s[m].value - (I / t) * s[m].moment[a]);
        }
    };
    run(base, on_base);
    if (!on_fine.empty()) run(fine_level(), on_fine);
}

FarField::Sample FarField::evaluate(const std::vector<Vec3>& points, double t, bool with_gradient) const
{
    Sample out;
    alpha(points, t, with_gradient, out);
    if (!beta_) return out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        out.value[i] += beta_->beta(points[i], t);
        if (!with_gradient) continue;
        const double h = 1e-4 * std::max(1.0, norm(points[i]));
        for (int a = 0; a < 3; ++a) {
            Vec3 p = points[i], m = points[i];
            p[a] += h;
            m[a] -= h;
            out.gradient[i][a] += (beta_->beta(p, t) - beta_->beta(m, t)) / (2.0 * h);
        }
    }
    return out;
}

void FarField::on_sphere(double r, double t, const std::vector<Vec3>& directions, std::vector<cplx>& psi,
                         std::vector<cplx>* radial_derivative) const
{
    std::vector<Vec3> points(directions.size());
    for (std::size_t i = 0; i < directions.size(); ++i) points[i] = r * directions[i];
    const bool deriv = radial_derivative != nullptr;
    Sample a;
    alpha(points, t, deriv, a);
    psi = std::move(a.value);
    if (deriv) {
        radial_derivative->resize(directions.size());
        for (std::size_t i = 0; i < directions.size(); ++i) {
            const Vec3& n = directions[i];
            (*radial_derivative)[i] = n[0] * a.gradient[i][0] + n[1] * a.gradient[i][1] + n[2] * a.gradient[i][2];
        }
    }
    if (!beta_) return;
    if (r > r_max_) throw Error(ErrorCode::invalid_argument, "sphere radius beyond the expansion's r_max");
    if (norm(beta_->center()) == 0.0) {
        std::vector<cplx> b, db;
        beta_->on_sphere(r, t, directions, b, deriv ? &db : nullptr);
        for (std::size_t i = 0; i < directions.size(); ++i) {
            psi[i] += b[i];
            if (deriv) (*radial_derivative)[i] += db[i];
        }
        return;
    }
    const double h = 1e-4 * std::max(1.0, r);
    for (std::size_t i = 0; i < directions.size(); ++i) {
        psi[i] += beta_->beta(points[i], t);
        if (deriv)
            (*radial_derivative)[i] +=
                (beta_->beta((r + h) * directions[i], t) - beta_->beta((r - h) * directions[i], t)) / (2.0 * h);
    }
}

FluxValue surface_flux(const FarField& psi, const DetectorCap& cap, double t, const CapQuadrature& quad)
{
    if (!(cap.radius > 0.0)) throw Error(ErrorCode::invalid_argument, "cap radius must be positive");
    const AngularRule rule = AngularRule::cap(cap.cone, quad.n_theta, quad.n_phi);
    std::vector<Vec3> dirs;
    dirs.reserve(rule.size());
    for (const auto& nd : rule.nodes()) dirs.push_back(nd.direction);
    std::vector<cplx> v, dv;
    psi.on_sphere(cap.radius, t, dirs, v, &dv);
    FluxValue out;
    const double r2 = cap.radius * cap.radius;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double jn = std::imag(std::conj(v[i]) * dv[i]);
        out.signed_flux += rule[i].weight * r2 * jn;
        out.abs_flux += rule[i].weight * r2 * std::abs(jn);
    }
    return out;
}

double ball_probability(const FarField& psi, double R, double t, std::size_t radial_nodes, std::size_t n_theta)
{
    if (!(R > 0.0)) throw Error(ErrorCode::invalid_argument, "ball radius must be positive");
    const std::size_t panels = std::max<std::size_t>(1, (radial_nodes + 7) / 8);
    std::vector<double> edges(panels + 1);
    for (std::size_t p = 0; p <= panels; ++p) edges[p] = R * static_cast<double>(p) / static_cast<double>(panels);
    const auto radial = composite_gauss_legendre(edges, 8);
    const AngularRule ang = AngularRule::product(n_theta, 2 * n_theta);
    std::vector<Vec3> dirs;
    dirs.reserve(ang.size());
    for (const auto& nd : ang.nodes()) dirs.push_back(nd.direction);
    double total = 0.0;
    std::vector<cplx> v;
    for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
        const double r = radial.nodes[i];
        psi.on_sphere(r, t, dirs, v);
        double shell = 0.0;
        for (std::size_t a = 0; a < ang.size(); ++a) shell += ang[a].weight * std::norm(v[a]);
        total += radial.weights[i] * r * r * shell;
    }
    return total;
}

namespace {

struct FluxIntegrand {
    std::function<FluxValue(double)> eval;
    bool absolute = false;
};

double flux_integrand(double t, void* p)
{
    const auto* f = static_cast<FluxIntegrand*>(p);
    const FluxValue v = f->eval(t);
    return f->absolute ? v.abs_flux : v.signed_flux;
}

double integrate(FluxIntegrand& f, double a, double b, double abs_tol, const FluxOptions& opt)
{
    if (!(b > a)) return 0.0;
    std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)> ws(
        gsl_integration_workspace_alloc(opt.max_intervals), &gsl_integration_workspace_free);
    gsl_function fn{&flux_integrand, &f};
    double result = 0.0, err = 0.0;
    const int status = gsl_integration_qag(&fn, a, b, abs_tol, opt.rel_tol, opt.max_intervals, GSL_INTEG_GAUSS21,
                                           ws.get(), &result, &err);
    if (status != GSL_SUCCESS && err > 1e-4 * std::max(std::abs(result), abs_tol))
        throw Error(ErrorCode::no_convergence, std::string("flux time quadrature: ") + gsl_strerror(status));
    return result;
}

}  // namespace

TimeIntegratedFlux time_integrated_flux(const FarField& psi, const DetectorCap& cap, double T, double split,
                                        const FluxOptions& options)
{
    if (!std::isfinite(T) || !(T > 0.0)) throw Error(ErrorCode::invalid_argument, "T must be finite and positive");
    if (!(options.growth > 1.0)) throw Error(ErrorCode::invalid_argument, "scan growth must exceed 1");
    if (options.tail_points < 2) throw Error(ErrorCode::invalid_argument, "tail fit needs at least two points");
    TimeIntegratedFlux out;
    if (psi.out_field().max_abs() == 0.0) {
        out.t_end = T;
        return out;
    }
    gsl_set_error_handler_off();

    std::map<double, FluxValue> memo;
    auto eval = [&](double t) {
        auto it = memo.find(t);
        if (it != memo.end()) return it->second;
        const FluxValue v = surface_flux(psi, cap, t, options.quadrature);
        memo.emplace(t, v);
        return v;
    };

    // Geometric scan: locates the peak and the time after which the flux has died away.
    auto& h = out.history;
    double t_peak = T;
    const double t_limit = std::min(psi.t_max(), T * std::pow(options.growth, 2000.0));
    for (double t = T;; t *= options.growth) {
        if (t > t_limit) break;
        const FluxValue v = eval(t);
        h.times.push_back(t);
        h.signed_flux.push_back(v.signed_flux);
        h.abs_flux.push_back(v.abs_flux);
        if (v.abs_flux > out.peak) {
            out.peak = v.abs_flux;
            t_peak = t;
        }
        if (t > t_peak && v.abs_flux < options.tail_epsilon * out.peak && h.times.size() >= options.tail_points)
            break;
    }
    out.t_end = h.times.back();
    if (out.peak == 0.0) return out;

    // Power-law fit of the last scan points carries the flux past t_end.
    std::vector<double> lx, ly;
    for (std::size_t i = h.times.size() - std::min(h.times.size(), options.tail_points); i < h.times.size(); ++i)
        if (h.abs_flux[i] > 0.0) {
            lx.push_back(std::log(h.times[i]));
            ly.push_back(std::log(h.abs_flux[i]));
        }
    if (lx.size() >= 2) {
        const double n = static_cast<double>(lx.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        const double p = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        out.tail_exponent = p;
        if (!(p < -1.5))
            throw Error(ErrorCode::tail_not_convergent,
                        "flux decays like t^" + format_number(p) + " at t = " + format_number(out.t_end));
        const double factor = out.t_end / (-p - 1.0);
        out.tail_signed = h.signed_flux.back() * factor;
        out.tail_abs = h.abs_flux.back() * factor;
    }

    const double s = std::clamp(split, T, out.t_end);
    const double abs_tol = 1e-12 * out.peak * (out.t_end - T);
    FluxIntegrand fs{eval, false}, fa{eval, true};
    out.early_signed = integrate(fs, T, s, abs_tol, options);
    out.early_abs = integrate(fa, T, s, abs_tol, options);
    const double late_signed = integrate(fs, s, out.t_end, abs_tol, options);
    const double late_abs = integrate(fa, s, out.t_end, abs_tol, options);
    out.signed_total = out.early_signed + late_signed + out.tail_signed;
    out.abs_total = out.early_abs + late_abs + out.tail_abs;
    out.evaluations = memo.size();
    return out;
}

double cone_probability(const MomentumSymbol& chi, const Cap& cone, double k_max, std::size_t radial_nodes,
                        const CapQuadrature& quad)
{
    if (!(k_max > 0.0) || !std::isfinite(k_max))
        throw Error(ErrorCode::invalid_argument, "cone integral needs a finite k_max > 0");
    const std::size_t panels = std::max<std::size_t>(1, (radial_nodes + 15) / 16);
    std::vector<double> edges(panels + 1);
    for (std::size_t p = 0; p <= panels; ++p) edges[p] = k_max * static_cast<double>(p) / static_cast<double>(panels);
    const auto radial = composite_gauss_legendre(edges, 16);
    const AngularRule rule = AngularRule::cap(cone, quad.n_theta, quad.n_phi);
    std::vector<Vec3> ks;
    ks.reserve(radial.nodes.size() * rule.size());
    for (double k : radial.nodes)
        for (const auto& nd : rule.nodes()) ks.push_back(k * nd.direction);
    const auto v = chi(ks);
    double total = 0.0;
    for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
        const double k = radial.nodes[i];
        double shell = 0.0;
        for (std::size_t a = 0; a < rule.size(); ++a) shell += rule[a].weight * std::norm(v[i * rule.size() + a]);
        total += radial.weights[i] * k * k * shell;
    }
    return total;
}

FastReport fast_experiment(const FarField& psi, const MomentumSymbol& psi_hat_out, const FastOptions& options)
{
    FastReport rep;
    double k_max = options.k_max;
    if (k_max <= 0.0) k_max = psi_hat_out.cutoff();
    if (!std::isfinite(k_max)) {
        // ψ̂_out of a grid state: its band on that grid.
        const CartesianGrid& g = psi.out_field().grid();
        const MomentumAmplitude amp = fft_forward(psi.out_field());
        double amax = 0.0;
        for (const auto& a : amp.values()) amax = std::max(amax, std::abs(a));
        k_max = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (std::abs(amp[i]) > kSupportTolerance * amax) k_max = std::max(k_max, norm(g.momentum_point(i)));
        k_max = std::max(k_max, g.momentum_spacing());
    }
    if (k_max > 0.0) rep.rhs = cone_probability(psi_hat_out, options.cone, k_max, options.radial_nodes, options.flux.quadrature);

    for (double R : options.radii) {
        FastRow row;
        row.R = R;
        if (!std::isfinite(R) || !(R > 0.0)) {
            row.failed = true;
            row.message = "radius must be finite and positive";
        } else if (R > psi.r_max()) {
            row.failed = true;
            row.message = "radius beyond the far-field expansion range";
        }
        if (row.failed) {
            rep.rows.push_back(row);
            continue;
        }
        const DetectorCap cap{options.cone, R};
        const double split = std::max(options.T, std::pow(R, options.split_power));
        const TimeIntegratedFlux f = time_integrated_flux(psi, cap, options.T, split, options.flux);
        row.lhs = f.signed_total;
        row.lhs_abs = f.abs_total;
        row.early = f.early_signed;
        row.tail = f.tail_signed;
        row.tail_exponent = f.tail_exponent;
        row.t_end = f.t_end;
        row.relative_error = rep.rhs > 0.0 ? std::abs(row.lhs - rep.rhs) / rep.rhs : std::abs(row.lhs);
        row.early_fraction = row.lhs != 0.0 ? std::abs(row.early) / std::abs(row.lhs) : 0.0;
        row.outwardness = rep.rhs > 0.0 ? (row.lhs_abs - std::abs(row.lhs)) / rep.rhs : 0.0;
        rep.rows.push_back(row);
    }
    return rep;
}

std::vector<OutwardnessRow> outwardness_check(const FastReport& report)
{
    std::vector<OutwardnessRow> out;
    for (const auto& row : report.rows) {
        if (row.failed) continue;
        OutwardnessRow o;
        o.R = row.R;
        if (report.rhs > 0.0)
            o.ratio = (row.lhs_abs - std::abs(row.lhs)) / report.rhs;
        else
            o.degenerate = true;
        out.push_back(o);
    }
    return out;
}

std::string FastReport::to_csv() const
{
    std::string s = csv_row({"R", "lhs", "lhs_abs", "rhs", "early_fraction", "tail_estimate", "status"});
    for (const auto& r : rows) {
        if (r.failed) {
            s += csv_row({format_number(r.R), "", "", format_number(rhs), "", "", "FAILED: " + r.message});
            continue;
        }
        s += csv_row({format_number(r.R), format_number(r.lhs), format_number(r.lhs_abs), format_number(rhs),
                      format_number(r.early_fraction), format_number(r.tail), "ok"});
    }
    return s;
}

std::string FastReport::to_svg() const
{
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows)
        if (!r.failed && r.R > 0.0 && r.relative_error > 0.0) pts.emplace_back(std::log10(r.R), std::log10(r.relative_error));
    const double W = 480, H = 320, m = 48;
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<line x1=\"" << m << "\" y1=\"" << H - m << "\" x2=\"" << W - m / 2 << "\" y2=\"" << H - m
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << m << "\" y1=\"" << m / 2 << "\" x2=\"" << m << "\" y2=\"" << H - m << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">log10 R</text>\n";
    o << "<text x=\"14\" y=\"" << H / 2 << "\" transform=\"rotate(-90 14 " << H / 2
      << ")\" text-anchor=\"middle\">log10 |lhs - rhs| / rhs</text>\n";
    if (!pts.empty()) {
        double x0 = pts.front().first, x1 = x0, y0 = pts.front().second, y1 = y0;
        for (const auto& [x, y] : pts) {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
        if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
        if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
        auto px = [&](double x) { return m + (x - x0) / (x1 - x0) * (W - 1.5 * m); };
        auto py = [&](double y) { return H - m - (y - y0) / (y1 - y0) * (H - 1.5 * m); };
        o << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
        for (const auto& [x, y] : pts) o << px(x) << "," << py(y) << " ";
        o << "\"/>\n";
        for (const auto& [x, y] : pts)
            o << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"4\" fill=\"steelblue\"/>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace fastflux
