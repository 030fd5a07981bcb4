#include "fastflux/classes.hpp"

#include <algorithm>
#include <limits>
#include <memory>

#include "fastflux/csv.hpp"
#include "fastflux/error.hpp"
#include "fastflux/fft.hpp"
#include "fastflux/spectral.hpp"

namespace fastflux {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stencil layout per sample: 0 centre, 1..6 ±h e_a, 7..18 mixed (a<b, ±±), 19..20 ±h k̂.
constexpr std::size_t kStencil = 21;

struct Sample {
    Vec3 k;
    double h;
};

std::vector<Vec3> stencil_points(const Sample& s)
{
    std::vector<Vec3> p;
    p.reserve(kStencil);
    p.push_back(s.k);
    for (int a = 0; a < 3; ++a)
        for (int sg : {1, -1}) {
            Vec3 q = s.k;
            q[a] += sg * s.h;
            p.push_back(q);
        }
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b)
            for (int sa : {1, -1})
                for (int sb : {1, -1}) {
                    Vec3 q = s.k;
                    q[a] += sa * s.h;
                    q[b] += sb * s.h;
                    p.push_back(q);
                }
    const Vec3 u = normalized(s.k);
    p.push_back(s.k + s.h * u);
    p.push_back(s.k - s.h * u);
    return p;
}

double quantity(DecayQuantity q, const Sample& s, const cplx* v)
{
    const double h = s.h;
    switch (q) {
    case DecayQuantity::value: return std::abs(v[0]);
    case DecayQuantity::gradient: {
        double m = 0.0;
        for (int a = 0; a < 3; ++a) m = std::max(m, std::abs((v[1 + 2 * a] - v[2 + 2 * a]) / (2.0 * h)));
        return m;
    }
    case DecayQuantity::kappa_hessian: {
        double m = 0.0;
        for (int a = 0; a < 3; ++a)
            m = std::max(m, std::abs((v[1 + 2 * a] - 2.0 * v[0] + v[2 + 2 * a]) / (h * h)));
        for (int pair = 0; pair < 3; ++pair) {
            const cplx* w = v + 7 + 4 * pair;  // (+,+), (+,−), (−,+), (−,−)
            m = std::max(m, std::abs((w[0] - w[1] - w[2] + w[3]) / (4.0 * h * h)));
        }
        const double r = norm(s.k);
        return r / bracket(r) * m;
    }
    case DecayQuantity::radial_first: return std::abs((v[19] - v[20]) / (2.0 * h));
    case DecayQuantity::radial_second: return std::abs((v[19] - 2.0 * v[0] + v[20]) / (h * h));
    }
    return 0.0;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(y[i] > 0.0)) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return kNaN;
    const double d = n * sxx - sx * sx;
    return d > 0.0 ? (n * sxy - sx * sy) / d : kNaN;
}

const char* quantity_id(DecayQuantity q)
{
    switch (q) {
    case DecayQuantity::value: return "value";
    case DecayQuantity::gradient: return "gradient";
    case DecayQuantity::kappa_hessian: return "kappa_hessian";
    case DecayQuantity::radial_first: return "radial_first";
    case DecayQuantity::radial_second: return "radial_second";
    }
    return "?";
}

std::vector<DecayLine> make_lines(std::initializer_list<std::pair<DecayQuantity, double>> spec)
{
    std::vector<DecayLine> lines;
    for (const auto& [q, e] : spec) lines.push_back({quantity_id(q), q, e});
    return lines;
}

}  // namespace

const DecayEntry& DecayReport::entry(const std::string& id) const
{
    for (const auto& e : entries)
        if (e.id == id) return e;
    throw Error(ErrorCode::invalid_argument, "no decay line '" + id + "'");
}

std::string DecayReport::to_csv() const
{
    std::string s = "condition,claimed_exponent,fitted_slope,min_constant,k_min,k_max,pass\n";
    for (const auto& e : entries)
        s += csv_row({e.id, format_number(e.claimed_exponent), format_number(e.fitted_slope),
                      format_number(e.min_constant), format_number(k_fit_min), format_number(k_max),
                      e.pass ? "1" : "0"});
    return s;
}

DecayReport check_decay(const MomentumSymbol& f, const std::vector<DecayLine>& lines, const DecayWindow& w)
{
    if (w.fit_samples < 8) throw Error(ErrorCode::invalid_argument, "decay fits need at least 8 samples");
    if (!(w.k_fit_min > 0.0) || !(w.k_max > w.k_fit_min))
        throw Error(ErrorCode::invalid_argument, "decay window must satisfy 0 < k_min < k_max");
    const AngularRule lebedev = AngularRule::lebedev26();
    const auto& leb = lebedev.nodes();
    const std::size_t nd = std::min<std::size_t>(w.directions, leb.size());
    const Frame tilt = Frame::about({0.21, 0.13, 1.0});

    std::vector<double> fit_radii(w.fit_samples);
    for (std::size_t i = 0; i < w.fit_samples; ++i)
        fit_radii[i] = w.k_fit_min * std::pow(w.k_max / w.k_fit_min, double(i) / double(w.fit_samples - 1));
    std::vector<double> radii = w.inner_radii;
    radii.insert(radii.end(), fit_radii.begin(), fit_radii.end());

    std::vector<Sample> samples;
    for (double r : radii) {
        if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "decay samples exclude k = 0");
        const double h = std::min(w.step * bracket(r), 0.5 * r);
        for (std::size_t d = 0; d < nd; ++d) samples.push_back({r * tilt.to_world(leb[d].direction), h});
    }
    std::vector<Vec3> pts;
    pts.reserve(samples.size() * kStencil);
    for (const auto& s : samples) {
        const auto p = stencil_points(s);
        pts.insert(pts.end(), p.begin(), p.end());
    }
    const std::vector<cplx> v = f(pts);

    DecayReport rep;
    rep.k_fit_min = w.k_fit_min;
    rep.k_max = w.k_max;
    const std::size_t n_inner = w.inner_radii.size();
    for (const auto& line : lines) {
        DecayEntry e;
        e.id = line.id;
        e.claimed_exponent = line.exponent;
        std::vector<double> fit_x, fit_y;
        for (std::size_t ri = 0; ri < radii.size(); ++ri) {
            double q_max = 0.0;
            for (std::size_t d = 0; d < nd; ++d) {
                const std::size_t si = ri * nd + d;
                const double q = quantity(line.quantity, samples[si], &v[si * kStencil]);
                const double c = q * std::pow(bracket(radii[ri]), line.exponent);
                if (!(c <= e.min_constant)) {
                    e.min_constant = c;
                    e.worst_k = samples[si].k;
                }
                q_max = std::max(q_max, q);
            }
            if (ri >= n_inner) {
                fit_x.push_back(bracket(radii[ri]));
                fit_y.push_back(q_max);
            }
        }
        e.fitted_slope = fit_slope(fit_x, fit_y);
        const bool slope_ok = std::isnan(e.fitted_slope) || e.fitted_slope <= -line.exponent + w.slope_slack;
        e.pass = std::isfinite(e.min_constant) && slope_ok;
        if (!e.pass && rep.pass) {
            rep.pass = false;
            rep.message = "line " + e.id + " violated near |k| = " + format_number(norm(e.worst_k));
        }
        rep.entries.push_back(e);
    }
    return rep;
}

DecayReport check_class_Gplus(const MomentumSymbol& f, const DecayWindow& window)
{
    using Q = DecayQuantity;
    return check_decay(f, make_lines({{Q::value, 15}, {Q::gradient, 6}, {Q::kappa_hessian, 5}, {Q::radial_second, 3}}),
                       window);
}

DecayReport check_class_Khat(const MomentumSymbol& f, const DecayWindow& window)
{
    using Q = DecayQuantity;
    return check_decay(f,
                       make_lines({{Q::value, 4},
                                   {Q::gradient, 0},
                                   {Q::kappa_hessian, 1},
                                   {Q::radial_first, 1},
                                   {Q::radial_second, 2}}),
                       window);
}

// ---------------------------------------------------------------------------------------------

std::string G0Report::to_csv() const
{
    std::string s = "power,weight,norm,refined,noise_floor,stable\n";
    for (const auto& e : entries)
        s += csv_row({std::to_string(e.power), std::to_string(e.weight), format_number(e.norm),
                      format_number(e.refined), format_number(e.noise_floor), e.stable ? "1" : "0"});
    return s;
}

namespace {

struct PowerNorms {
    std::vector<double> w2, w4, floor2, floor4;
};

// Drops the Fourier modes that sit at rounding level, so powers of the Laplacian act on the signal
// rather than on amplified noise.
void drop_rounding_modes(ComplexField3D& f)
{
    MomentumAmplitude a = fft_forward(f);
    double peak = 0.0;
    for (const auto& v : a.values()) peak = std::max(peak, std::abs(v));
    const double cut = 64.0 * std::numeric_limits<double>::epsilon() * peak;
    for (auto& v : a.values())
        if (std::abs(v) < cut) v = 0.0;
    f = fft_inverse(a);
}

PowerNorms weighted_power_norms(const std::function<cplx(const Vec3&)>& psi, const Potential& V,
                                const CartesianGrid& grid)
{
    ComplexField3D f = ComplexField3D::sample(grid, psi);
    drop_rounding_modes(f);
    std::vector<double> br2(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) br2[p] = 1.0 + dot(grid.point(p), grid.point(p));
    const double h3 = grid.cell_volume();
    auto weighted = [&](const ComplexField3D& g, int power) {
        double s = 0.0;
        for (std::size_t p = 0; p < grid.size(); ++p) s += std::pow(br2[p], power) * std::norm(g[p]);
        return std::sqrt(s * h3);
    };
    const double band = 0.5 * grid.nyquist() * grid.nyquist() + V.max_abs();
    PowerNorms out;
    const double eps = std::numeric_limits<double>::epsilon();
    const double base2 = weighted(f, 2), base4 = weighted(f, 4);
    for (int n = 0; n <= 8; ++n) {
        if (n > 0) {
            f = apply_hamiltonian(f, V);
            drop_rounding_modes(f);
        }
        const double amp = eps * std::pow(band, n) * std::sqrt(double(grid.points_per_axis()));
        out.w2.push_back(weighted(f, 2));
        out.floor2.push_back(amp * base2);
        if (n <= 3) {
            out.w4.push_back(weighted(f, 4));
            out.floor4.push_back(amp * base4);
        }
    }
    return out;
}

}  // namespace

G0Report check_class_G0(const std::function<cplx(const Vec3&)>& psi, const Potential& V, const CartesianGrid& grid,
                        const G0Options& options)
{
    const CartesianGrid fine(grid.half_width(), 2 * grid.points_per_axis());
    const PowerNorms a = weighted_power_norms(psi, V, grid);
    const PowerNorms b = weighted_power_norms(psi, V, fine);
    G0Report rep;
    auto add = [&](int n, int weight, double x, double y, double floor) {
        WeightedNorm e{n, weight, x, y, floor, true};
        const bool zero = x == 0.0 && y == 0.0;
        e.stable = zero || (std::isfinite(x) && std::isfinite(y) && std::abs(x - y) <= options.stability * std::abs(y));
        if (!zero && e.stable && x < options.floor_factor * floor)
            throw Error(ErrorCode::resolution_limited, "‖⟨x⟩^" + std::to_string(weight) + "H^" + std::to_string(n) +
                                                           "ψ‖ is within the amplified rounding noise");
        if (!e.stable && rep.pass) {
            rep.pass = false;
            rep.message = "‖⟨x⟩^" + std::to_string(weight) + "H^" + std::to_string(n) +
                          "ψ‖ changes by more than the stability tolerance under refinement";
        }
        rep.entries.push_back(e);
    };
    for (int n = 0; n <= 8; ++n) add(n, 2, a.w2[n], b.w2[n], a.floor2[n]);
    for (int n = 0; n <= 3; ++n) add(n, 4, a.w4[n], b.w4[n], a.floor4[n]);
    return rep;
}

// ---------------------------------------------------------------------------------------------

MomentumSymbol outgoing_symbol(const ComplexField3D& psi, const EigenfunctionTable& table)
{
    auto f = std::make_shared<const ComplexField3D>(psi);
    auto t = std::make_shared<const EigenfunctionTable>(table);
    return MomentumSymbol("outgoing", [f, t](const std::vector<Vec3>& ks) { return gen_fourier_at(*f, *t, ks); });
}

MappingReport mapping_check(const ComplexField3D& psi, const EigenfunctionTable& table, const Potential& V,
                            const MappingOptions& options)
{
    if (table.descriptor().kind == "point_interaction")
        throw Error(ErrorCode::invalid_argument, "the moment identity needs a pointwise potential");
    if (table.descriptor().canonical() != V.descriptor().canonical())
        throw Error(ErrorCode::invalid_argument, "potential does not match the eigenfunction table");
    MappingReport rep;
    rep.gplus = check_class_Gplus(outgoing_symbol(psi, table), options.window);
    rep.value_slope = rep.gplus.entry("value").fitted_slope;

    const MomentumAmplitude out = outgoing_asymptote(psi, table);
    ComplexField3D Hn = psi;
    for (int n = 1; n <= 3; ++n) {
        Hn = apply_hamiltonian(Hn, V);
        const MomentumAmplitude rhs = gen_fourier_forward(Hn, table);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const Vec3 k = out.node(i);
            const cplx lhs = std::pow(0.5 * dot(k, k), n) * out[i];
            num += out.weight(i) * std::norm(lhs - rhs[i]);
            den += out.weight(i) * std::norm(rhs[i]);
        }
        rep.moment_errors.push_back(den > 0.0 ? std::sqrt(num / den) : std::sqrt(num));
    }
    const bool moments_ok = std::all_of(rep.moment_errors.begin(), rep.moment_errors.end(),
                                        [&](double e) { return e <= options.moment_tolerance; });
    const bool slope_ok = std::isnan(rep.value_slope) || rep.value_slope < options.slope_bound;
    rep.pass = moments_ok && slope_ok;
    if (!moments_ok)
        rep.message = "moment identity off by more than " + format_number(options.moment_tolerance);
    else if (!slope_ok)
        rep.message = "decay slope " + format_number(rep.value_slope) + " not below " + format_number(options.slope_bound);
    return rep;
}

}  // namespace fastflux
