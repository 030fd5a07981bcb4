#include "fastflux/propagation.hpp"

#include <algorithm>
#include <limits>

#include "fastflux/csv.hpp"
#include "fastflux/error.hpp"
#include "fastflux/fft.hpp"
#include "fastflux/parallel.hpp"
#include "fastflux/quadrature.hpp"

namespace fastflux {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Barycentric weights for interpolation through arbitrary nodes.
std::vector<double> barycentric_weights(const std::vector<double>& x)
{
    std::vector<double> w(x.size(), 1.0);
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j)
            if (i != j) w[i] /= (x[i] - x[j]);
    return w;
}

// value = Σ over the four outputs: 0 → ∫e^{...}χ, 1..3 → ∫e^{...} i k_a χ.
std::array<cplx, 4> oscillatory_integral(const MomentumSymbol& chi, const Vec3& x, double t, bool gradient,
                                         const OscillatoryOptions& o)
{
    if (t == 0.0) throw Error(ErrorCode::invalid_argument, "oscillatory integral needs t != 0");
    if (o.nodes_per_period < 8.0)
        throw Error(ErrorCode::under_resolved, "fewer than 8 radial nodes per phase period");
    if (!std::isfinite(chi.cutoff()))
        throw Error(ErrorCode::invalid_argument, "symbol '" + chi.name() + "' has no finite extent");
    std::array<cplx, 4> out{};
    if (chi.cutoff() <= 0.0) return out;

    const Vec3 ks = (1.0 / t) * x;
    const double rho_lo = std::max(0.0, norm(ks) - chi.cutoff());
    const double rho_hi = norm(ks) + chi.cutoff();
    const AngularRule sphere = AngularRule::product(o.angular_theta, 2 * o.angular_theta);
    const std::size_t n_out = gradient ? 4 : 1;

    const std::size_t panels = std::max<std::size_t>(1, std::ceil((rho_hi - rho_lo) / o.smooth_panel));
    const double at = std::abs(t);
    const std::size_t per_period = static_cast<std::size_t>(std::ceil(o.nodes_per_period));
    std::size_t total = 0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double a = rho_lo + (rho_hi - rho_lo) * p / panels, b = rho_lo + (rho_hi - rho_lo) * (p + 1) / panels;
        total += per_period * static_cast<std::size_t>(std::ceil(at * (b * b - a * a) / (4.0 * pi)) + 1);
    }
    if (total > o.max_radial_nodes)
        throw Error(ErrorCode::under_resolved, "oscillatory quadrature needs " + std::to_string(total) +
                                                   " radial nodes, more than the allowed " +
                                                   std::to_string(o.max_radial_nodes));

    std::vector<std::array<cplx, 4>> panel_sums(panels);
    parallel_for(panels, [&](std::size_t p0, std::size_t p1) {
        std::vector<Vec3> pts(sphere.size());
        for (std::size_t p = p0; p < p1; ++p) {
            const double a = rho_lo + (rho_hi - rho_lo) * p / panels;
            const double b = rho_lo + (rho_hi - rho_lo) * (p + 1) / panels;
            // Angular averages at the smooth nodes of this panel.
            const QuadratureRule smooth = gauss_legendre(o.smooth_nodes, a, b);
            const auto bw = barycentric_weights(smooth.nodes);
            std::vector<std::array<cplx, 4>> Y(smooth.nodes.size());
            for (std::size_t m = 0; m < smooth.nodes.size(); ++m) {
                for (std::size_t q = 0; q < sphere.size(); ++q)
                    pts[q] = ks + smooth.nodes[m] * sphere[q].direction;
                const auto v = chi(pts);
                std::array<cplx, 4> y{};
                for (std::size_t q = 0; q < sphere.size(); ++q) {
                    const cplx wv = sphere[q].weight * v[q];
                    y[0] += wv;
                    if (gradient)
                        for (int c = 0; c < 3; ++c) y[1 + c] += I * pts[q][c] * wv;
                }
                Y[m] = y;
            }
            // Dense rule, equal steps in ρ² so every sub-panel spans at most one period of the phase.
            const std::size_t sub = static_cast<std::size_t>(std::ceil(at * (b * b - a * a) / (4.0 * pi)) + 1);
            std::array<cplx, 4> acc{};
            for (std::size_t s = 0; s < sub; ++s) {
                const double r0 = std::sqrt(a * a + (b * b - a * a) * s / sub);
                const double r1 = std::sqrt(a * a + (b * b - a * a) * (s + 1) / sub);
                const QuadratureRule dense = gauss_legendre(per_period, r0, r1);
                for (std::size_t i = 0; i < dense.nodes.size(); ++i) {
                    const double r = dense.nodes[i];
                    std::array<cplx, 4> y{};
                    double den = 0.0;
                    bool exact = false;
                    for (std::size_t m = 0; m < smooth.nodes.size() && !exact; ++m) {
                        const double d = r - smooth.nodes[m];
                        if (d == 0.0) {
                            y = Y[m];
                            den = 1.0;
                            exact = true;
                            break;
                        }
                        const double c = bw[m] / d;
                        den += c;
                        for (std::size_t k = 0; k < n_out; ++k) y[k] += c * Y[m][k];
                    }
                    const cplx f = dense.weights[i] * r * r * std::polar(1.0, -0.5 * t * r * r) / den;
                    for (std::size_t k = 0; k < n_out; ++k) acc[k] += f * y[k];
                }
            }
            panel_sums[p] = acc;
        }
    });
    const cplx outer = std::polar(1.0, 0.5 * dot(x, x) / t);
    for (const auto& ps : panel_sums)
        for (std::size_t k = 0; k < n_out; ++k) out[k] += ps[k];
    for (auto& v : out) v *= outer;
    return out;
}

}  // namespace

OscillatoryOptions OscillatoryOptions::refined() const
{
    OscillatoryOptions r = *this;
    r.nodes_per_period *= 2.0;
    r.angular_theta *= 2;
    r.smooth_panel *= 0.5;
    r.max_radial_nodes *= 2;
    return r;
}

cplx free_evolve_exact(const MomentumSymbol& chi, const Vec3& x, double t, const OscillatoryOptions& options)
{
    return oscillatory_integral(chi, x, t, false, options)[0];
}

std::array<cplx, 3> free_evolve_exact_gradient(const MomentumSymbol& chi, const Vec3& x, double t,
                                               const OscillatoryOptions& options)
{
    const auto v = oscillatory_integral(chi, x, t, true, options);
    return {v[1], v[2], v[3]};
}

cplx stationary_phase_leading(const MomentumSymbol& chi, const Vec3& x, double t)
{
    if (t == 0.0) throw Error(ErrorCode::invalid_argument, "stationary phase needs t != 0");
    const cplx prefactor = std::pow(cplx(0.0, -2.0 * pi / t), 1.5);
    return prefactor * std::polar(1.0, 0.5 * dot(x, x) / t) * chi((1.0 / t) * x);
}

std::array<cplx, 3> stationary_phase_gradient(const MomentumSymbol& chi, const Vec3& x, double t)
{
    const cplx lead = stationary_phase_leading(chi, x, t);
    return {I * x[0] / t * lead, I * x[1] / t * lead, I * x[2] / t * lead};
}

// ---------------------------------------------------------------------------------------------

std::string AsymptoticProbe::to_csv() const
{
    std::string s = "t,direction,abs_exact,abs_leading,error,scaled_error\n";
    for (const auto& r : rows)
        s += csv_row({format_number(r.t), std::to_string(r.direction), format_number(std::abs(r.exact)),
                      format_number(std::abs(r.leading)), format_number(r.error), format_number(r.scaled)});
    return s;
}

namespace {

std::vector<ProbeRow> probe_rows(const MomentumSymbol& chi, const ProbeOptions& o, const OscillatoryOptions& q)
{
    const AngularRule lebedev = AngularRule::lebedev26();
    const auto& leb = lebedev.nodes();
    const std::size_t nd = std::min<std::size_t>(o.directions, leb.size());
    const Frame tilt = Frame::about({0.21, 0.13, 1.0});
    std::vector<ProbeRow> rows;
    for (double t : o.times) {
        if (t == 0.0) throw Error(ErrorCode::invalid_argument, "probe times must be nonzero");
        for (std::size_t d = 0; d < nd; ++d) {
            ProbeRow r;
            r.t = t;
            r.direction = d;
            r.x = (t * o.speed) * tilt.to_world(leb[d].direction);
            rows.push_back(r);
        }
    }
    for (auto& r : rows) {
        r.exact = free_evolve_exact(chi, r.x, r.t, q);
        r.leading = stationary_phase_leading(chi, r.x, r.t);
        r.error = std::abs(r.exact - r.leading);
        r.scaled = r.t * r.t * r.error;
    }
    return rows;
}

double sup_scaled(const std::vector<ProbeRow>& rows)
{
    double L = 0.0;
    for (const auto& r : rows) L = std::max(L, r.scaled);
    return L;
}

}  // namespace

AsymptoticProbe error_constant_probe(const MomentumSymbol& chi, const ProbeOptions& o)
{
    AsymptoticProbe p;
    p.symbol = chi.name();
    p.rows = probe_rows(chi, o, o.quadrature);
    p.L = sup_scaled(p.rows);

    std::vector<double> ts = o.times;
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    if (ts.size() < 2) {
        p.slope = kNaN;
        p.warning = "slope undefined for a single time";
    } else {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t n = 0;
        for (double t : ts) {
            double e = 0.0;
            for (const auto& r : p.rows)
                if (r.t == t) e = std::max(e, r.error);
            if (!(e > 0.0)) continue;
            const double lx = std::log(std::abs(t)), ly = std::log(e);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++n;
        }
        const double den = n * sxx - sx * sx;
        p.slope = (n >= 2 && den > 0.0) ? (n * sxy - sx * sy) / den : kNaN;
        if (std::isnan(p.slope)) p.warning = "slope undefined: the error vanishes";
    }
    p.slope_ok = p.slope >= o.slope_low && p.slope <= o.slope_high;
    if (o.density_check) {
        p.L_refined = sup_scaled(probe_rows(chi, o, o.quadrature.refined()));
        p.stable = std::abs(p.L_refined - p.L) <= o.stability * std::max(p.L_refined, p.L);
    }
    return p;
}

// ---------------------------------------------------------------------------------------------

AlphaBetaSplit alpha_beta_split(const ScatteringState& state, double t, const EigenfunctionTable& table)
{
    const double T = state.time() + t;
    AlphaBetaSplit s{free_propagate(state.out_field(), T), ComplexField3D(state.out_field().grid()), T};
    switch (table.kind()) {
    case TableKind::free: break;
    case TableKind::channels: {
        ExpansionOptions opt;
        opt.t_max = std::max(std::abs(T), 8.0);
        s.beta = OutgoingExpansion(table, state.out_field(), opt).field(s.alpha.grid(), T);
        break;
    }
    case TableKind::sampled: {
        MomentumAmplitude phased = state.out_amplitude();
        for (std::size_t n = 0; n < phased.size(); ++n) {
            const Vec3 k = phased.node(n);
            phased[n] *= std::polar(1.0, -0.5 * dot(k, k) * T);
        }
        s.beta = scattered_synthesis(phased, table, s.alpha.grid());
        break;
    }
    }
    return s;
}

// ---------------------------------------------------------------------------------------------

std::string BetaBoundReport::to_csv() const
{
    std::string s = "R,c,c_gradient,t_at,variation\n";
    for (const auto& r : rows)
        s += csv_row({format_number(r.R), format_number(r.c), format_number(r.c_gradient), format_number(r.t_at),
                      format_number(variation)});
    return s;
}

BetaBoundReport beta_bound_check(const OutgoingExpansion& beta, const BetaBoundOptions& o)
{
    if (o.radii.empty() || o.times < 2) throw Error(ErrorCode::invalid_argument, "need radii and at least two times");
    if (!(o.T > 0.0)) throw Error(ErrorCode::invalid_argument, "start time must be positive");
    const double R_max = *std::max_element(o.radii.begin(), o.radii.end());
    if (beta.t_max() < o.T + o.span * R_max)
        throw Error(ErrorCode::invalid_argument, "expansion does not reach the last sampled time");
    const AngularRule sphere = AngularRule::product(o.n_theta, 2 * o.n_theta);
    std::vector<Vec3> dirs;
    for (const auto& n : sphere.nodes()) dirs.push_back(n.direction);

    BetaBoundReport rep;
    for (double R : o.radii) {
        BetaBoundRow row;
        row.R = R;
        const double t_end = o.T + o.span * R;
        std::vector<cplx> b, db;
        for (std::size_t i = 0; i < o.times; ++i) {
            const double t = o.T * std::pow(t_end / o.T, double(i) / double(o.times - 1));
            beta.on_sphere(R, t, dirs, b, &db);
            const double env = R * (t + R);
            for (std::size_t d = 0; d < dirs.size(); ++d) {
                if (std::abs(b[d]) * env > row.c) {
                    row.c = std::abs(b[d]) * env;
                    row.t_at = t;
                    row.direction_at = dirs[d];
                }
                row.c_gradient = std::max(row.c_gradient, std::abs(db[d]) * env);
            }
        }
        rep.rows.push_back(row);
    }
    auto spread = [&](auto get) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& r : rep.rows) {
            lo = std::min(lo, get(r));
            hi = std::max(hi, get(r));
        }
        if (hi == 0.0) return 1.0;
        return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    };
    rep.variation = spread([](const BetaBoundRow& r) { return r.c; });
    rep.gradient_variation = spread([](const BetaBoundRow& r) { return r.c_gradient; });
    rep.pass = rep.variation < o.variation;
    if (!rep.pass)
        rep.message = "sup |β|·R(t+R) varies by a factor " + format_number(rep.variation) + " across the radii";
    return rep;
}

}  // namespace fastflux
