#include "fastflux/spectral.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>

#include "fastflux/dft.hpp"
#include "fastflux/error.hpp"
#include "fastflux/fft.hpp"
#include "fastflux/parallel.hpp"
#include "fastflux/quadrature.hpp"
#include "fastflux/special.hpp"

namespace fastflux {

namespace {

const double kInvTwoPi32 = std::pow(2.0 * pi, -1.5);

std::size_t sh_count(int l_max) { return static_cast<std::size_t>((l_max + 1) * (l_max + 1)); }

cplx i_pow(int l)
{
    static const cplx p[4] = {1.0, I, -1.0, -I};
    return p[((l % 4) + 4) % 4];
}

Vec3 direction_or_z(const Vec3& d, double r) { return r > 0.0 ? (1.0 / r) * d : Vec3{0.0, 0.0, 1.0}; }

bool singular_centre(const EigenfunctionTable& t) { return t.descriptor().kind == "point_interaction"; }

// g_l(r) for l ≤ l_max, zero-padded; zero at the centre of a point interaction.
void channel_values(const EigenfunctionTable& t, const RadialChannels& ch, double r, int l_max, std::vector<cplx>& g)
{
    g.assign(l_max + 1, 0.0);
    if (r < 1e-12 && singular_centre(t)) return;
    std::vector<cplx> v;
    ch.evaluate(r, v);
    for (int l = 0; l <= std::min(l_max, ch.l_max()); ++l) g[l] = v[l];
}

int table_l_max(const EigenfunctionTable& t)
{
    int L = 0;
    for (std::size_t i = 0; i < t.k_grid().radial_count(); ++i) L = std::max(L, t.channels(i).l_max());
    return L;
}

std::vector<Vec3> node_list(const SphericalKGrid& kg)
{
    std::vector<Vec3> q(kg.size());
    for (std::size_t i = 0; i < kg.size(); ++i) q[i] = kg.node(i);
    return q;
}

// S_lm at every angular node of the table, [a][lm].
std::vector<std::vector<double>> angular_harmonics(const AngularRule& rule, int l_max)
{
    std::vector<std::vector<double>> s(rule.size());
    for (std::size_t a = 0; a < rule.size(); ++a) real_spherical_harmonics(l_max, rule[a].direction, s[a]);
    return s;
}

void require_sampled_grid(const EigenfunctionTable& t, const CartesianGrid& g)
{
    if (!(t.x_grid() == g))
        throw Error(ErrorCode::grid_mismatch, "sampled eigenfunctions live on a different grid than the field");
}

}  // namespace

// ---------------------------------------------------------------------------------------------

RadialShells::RadialShells(const CartesianGrid& grid, const Vec3& center) : grid_(grid), center_(center)
{
    const std::size_t N = grid.size();
    std::vector<double> r(N);
    for (std::size_t p = 0; p < N; ++p) r[p] = norm(grid.point(p) - center);
    order_.resize(N);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return r[a] < r[b]; });
    const double tol = 1e-9 * grid.spacing();
    for (std::size_t i = 0; i < N; ++i) {
        const double ri = r[order_[i]];
        if (radii_.empty() || ri - radii_.back() > tol) {
            radii_.push_back(ri);
            offsets_.push_back(i);
        }
    }
    offsets_.push_back(N);
}

std::vector<std::vector<cplx>> RadialShells::project(const ComplexField3D& f, int l_max) const
{
    require_same_grid(f.grid(), grid_, "shell projection");
    const double floor = 1e-17 * f.max_abs();
    const std::size_t nlm = sh_count(l_max);
    std::vector<std::vector<cplx>> A(size());
    parallel_for(size(), [&](std::size_t b, std::size_t e) {
        std::vector<double> S;
        for (std::size_t s = b; s < e; ++s) {
            const auto pts = points(s);
            bool any = false;
            for (std::size_t p : pts) any = any || std::abs(f[p]) > floor;
            if (!any) continue;
            A[s].assign(nlm, 0.0);
            for (std::size_t p : pts) {
                const Vec3 d = grid_.point(p) - center_;
                real_spherical_harmonics(l_max, direction_or_z(d, radii_[s]), S);
                const cplx v = f[p];
                for (std::size_t i = 0; i < nlm; ++i) A[s][i] += S[i] * v;
            }
        }
    });
    return A;
}

void RadialShells::synthesize(const std::vector<std::vector<cplx>>& C, int l_max, ComplexField3D& out) const
{
    require_same_grid(out.grid(), grid_, "shell synthesis");
    const std::size_t nlm = sh_count(l_max);
    parallel_for(size(), [&](std::size_t b, std::size_t e) {
        std::vector<double> S;
        for (std::size_t s = b; s < e; ++s) {
            if (C[s].empty()) continue;
            for (std::size_t p : points(s)) {
                const Vec3 d = grid_.point(p) - center_;
                real_spherical_harmonics(l_max, direction_or_z(d, radii_[s]), S);
                cplx v = 0.0;
                for (std::size_t i = 0; i < nlm; ++i) v += S[i] * C[s][i];
                out[p] += v;
            }
        }
    });
}

// ---------------------------------------------------------------------------------------------

MomentumAmplitude gen_fourier_forward(const ComplexField3D& f, const EigenfunctionTable& table)
{
    const SphericalKGrid& kg = table.k_grid();
    const auto nodes = node_list(kg);
    MomentumAmplitude out(MomentumLayout{table.k_grid_ptr()}, fourier_at(f, nodes));
    const CartesianGrid& g = f.grid();
    const double h3 = g.cell_volume();

    switch (table.kind()) {
    case TableKind::free: break;
    case TableKind::sampled: {
        require_sampled_grid(table, g);
        parallel_for(kg.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t n = b; n < e; ++n) {
                const auto& eta = table.samples(n);
                cplx s = 0.0;
                for (std::size_t p = 0; p < g.size(); ++p) s += std::conj(eta[p]) * f[p];
                out[n] += kInvTwoPi32 * h3 * s;
            }
        });
        break;
    }
    case TableKind::channels: {
        const int L = table_l_max(table);
        const std::size_t nlm = sh_count(L);
        const RadialShells shells(g, table.center());
        const auto A = shells.project(f, L);
        const auto S = angular_harmonics(kg.angular(), L);
        const std::size_t na = kg.angular_count();
        const double c = 4.0 * pi * kInvTwoPi32 * h3;
        parallel_for(kg.radial_count(), [&](std::size_t b, std::size_t e) {
            std::vector<cplx> gl, M;
            for (std::size_t i = b; i < e; ++i) {
                const auto& ch = table.channels(i);
                const int li = ch.l_max();
                M.assign(nlm, 0.0);
                for (std::size_t s = 0; s < shells.size(); ++s) {
                    if (A[s].empty()) continue;
                    channel_values(table, ch, shells.radius(s), li, gl);
                    for (int l = 0; l <= li; ++l) {
                        const cplx gc = std::conj(gl[l]);
                        for (int m = -l; m <= l; ++m) M[sh_index(l, m)] += gc * A[s][sh_index(l, m)];
                    }
                }
                for (std::size_t a = 0; a < na; ++a) {
                    cplx v = 0.0;
                    for (int l = 0; l <= li; ++l) {
                        cplx vl = 0.0;
                        for (int m = -l; m <= l; ++m) vl += S[a][sh_index(l, m)] * M[sh_index(l, m)];
                        v += i_pow(-l) * vl;
                    }
                    const std::size_t n = i * na + a;
                    out[n] += c * std::polar(1.0, -dot(kg.node(n), table.center())) * v;
                }
            }
        });
        break;
    }
    }
    return out;
}

std::vector<cplx> gen_fourier_at(const ComplexField3D& f, const EigenfunctionTable& table, const std::vector<Vec3>& ks)
{
    std::vector<cplx> out = fourier_at(f, ks);
    const CartesianGrid& g = f.grid();
    const double h3 = g.cell_volume();
    switch (table.kind()) {
    case TableKind::free: break;
    case TableKind::sampled: {
        require_sampled_grid(table, g);
        for (std::size_t n = 0; n < ks.size(); ++n) out[n] += kInvTwoPi32 * inner(table.eta_field_at(ks[n]), f);
        break;
    }
    case TableKind::channels: {
        std::vector<double> radii;
        for (const auto& k : ks) radii.push_back(norm(k));
        std::sort(radii.begin(), radii.end());
        radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
        if (!radii.empty() && !(radii.front() > 0.0))
            throw Error(ErrorCode::invalid_argument, "generalized transform needs k != 0");
        std::vector<std::optional<RadialChannels>> channels(radii.size());
        parallel_for(radii.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) channels[i] = table.channels_at(radii[i]);
        });
        int L = 0;
        for (const auto& ch : channels) L = std::max(L, ch->l_max());
        const RadialShells shells(g, table.center());
        const auto A = shells.project(f, L);
        const double c = 4.0 * pi * kInvTwoPi32 * h3;
        parallel_for(ks.size(), [&](std::size_t b, std::size_t e) {
            std::vector<cplx> gl;
            std::vector<double> S;
            for (std::size_t n = b; n < e; ++n) {
                const double kn = norm(ks[n]);
                const auto& ch = *channels[std::lower_bound(radii.begin(), radii.end(), kn) - radii.begin()];
                const int li = ch.l_max();
                real_spherical_harmonics(li, (1.0 / kn) * ks[n], S);
                cplx v = 0.0;
                for (std::size_t s = 0; s < shells.size(); ++s) {
                    if (A[s].empty()) continue;
                    channel_values(table, ch, shells.radius(s), li, gl);
                    for (int l = 0; l <= li; ++l) {
                        cplx vl = 0.0;
                        for (int m = -l; m <= l; ++m) vl += S[sh_index(l, m)] * A[s][sh_index(l, m)];
                        v += i_pow(-l) * std::conj(gl[l]) * vl;
                    }
                }
                out[n] += c * std::polar(1.0, -dot(ks[n], table.center())) * v;
            }
        });
        break;
    }
    }
    return out;
}

ComplexField3D scattered_synthesis(const MomentumAmplitude& amp, const EigenfunctionTable& table,
                                   const CartesianGrid& grid)
{
    const SphericalKGrid& kg = table.k_grid();
    if (amp.is_cartesian() || amp.size() != kg.size())
        throw Error(ErrorCode::grid_mismatch, "amplitude is not on the table's k-grid");
    ComplexField3D out(grid);
    switch (table.kind()) {
    case TableKind::free: break;
    case TableKind::sampled: {
        require_sampled_grid(table, grid);
        parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t n = 0; n < kg.size(); ++n) {
                const cplx a = kInvTwoPi32 * kg.weight(n) * amp[n];
                if (a == 0.0) continue;
                const auto& eta = table.samples(n);
                for (std::size_t p = b; p < e; ++p) out[p] += a * eta[p];
            }
        });
        break;
    }
    case TableKind::channels: {
        const int L = table_l_max(table);
        const std::size_t nlm = sh_count(L);
        const auto S = angular_harmonics(kg.angular(), L);
        const std::size_t na = kg.angular_count(), nr = kg.radial_count();
        std::vector<std::vector<cplx>> B(nr, std::vector<cplx>(nlm, 0.0));
        for (std::size_t i = 0; i < nr; ++i)
            for (std::size_t a = 0; a < na; ++a) {
                const std::size_t n = i * na + a;
                const cplx w = kg.weight(n) * amp[n] * std::polar(1.0, dot(kg.node(n), table.center()));
                for (std::size_t lm = 0; lm < nlm; ++lm) B[i][lm] += S[a][lm] * w;
            }
        const RadialShells shells(grid, table.center());
        std::vector<std::vector<cplx>> C(shells.size());
        const double c = 4.0 * pi * kInvTwoPi32;
        parallel_for(shells.size(), [&](std::size_t b, std::size_t e) {
            std::vector<cplx> gl;
            for (std::size_t s = b; s < e; ++s) {
                C[s].assign(nlm, 0.0);
                for (std::size_t i = 0; i < nr; ++i) {
                    const auto& ch = table.channels(i);
                    channel_values(table, ch, shells.radius(s), ch.l_max(), gl);
                    for (int l = 0; l <= ch.l_max(); ++l) {
                        const cplx f = c * i_pow(l) * gl[l];
                        for (int m = -l; m <= l; ++m) C[s][sh_index(l, m)] += f * B[i][sh_index(l, m)];
                    }
                }
            }
        });
        shells.synthesize(C, L, out);
        break;
    }
    }
    return out;
}

ComplexField3D gen_fourier_inverse(const MomentumAmplitude& amp, const EigenfunctionTable& table,
                                   const std::optional<CartesianGrid>& grid)
{
    const CartesianGrid g = grid ? *grid : table.x_grid();
    const SphericalKGrid& kg = table.k_grid();
    ComplexField3D out = scattered_synthesis(amp, table, g);
    std::vector<cplx> a(kg.size());
    for (std::size_t n = 0; n < kg.size(); ++n) a[n] = kInvTwoPi32 * kg.weight(n) * amp[n];
    lattice_synthesis(node_list(kg), a, grid_coordinates(g), +1, out.values());
    return out;
}

ComplexField3D wave_operator_apply(const ComplexField3D& f_out, const EigenfunctionTable& table)
{
    if (table.is_free()) return f_out;
    MomentumAmplitude fhat(MomentumLayout{table.k_grid_ptr()}, fourier_at(f_out, node_list(table.k_grid())));
    ComplexField3D out = scattered_synthesis(fhat, table, f_out.grid());
    out += f_out;
    return out;
}

MomentumAmplitude outgoing_asymptote(const ComplexField3D& psi, const EigenfunctionTable& table)
{
    return gen_fourier_forward(psi, table);
}

// ---------------------------------------------------------------------------------------------

ScatteringState::ScatteringState(ComplexField3D position, ComplexField3D out_field, MomentumAmplitude out,
                                 double time)
    : position_(std::move(position)), out_field_(std::move(out_field)), out_amplitude_(std::move(out)), time_(time)
{
}

ScatteringState ScatteringState::from_outgoing(const ComplexField3D& psi_out, const EigenfunctionTable& table)
{
    MomentumAmplitude out(MomentumLayout{table.k_grid_ptr()}, fourier_at(psi_out, node_list(table.k_grid())));
    if (table.kind() == TableKind::channels) {
        ExpansionOptions opt;
        opt.t_max = 8.0;
        auto expansion = std::make_shared<const OutgoingExpansion>(table, psi_out, opt);
        ComplexField3D psi = expansion->field(psi_out.grid(), 0.0);
        psi += psi_out;
        ScatteringState s(std::move(psi), psi_out, std::move(out), 0.0);
        s.expansion_ = std::move(expansion);
        return s;
    }
    ComplexField3D psi = scattered_synthesis(out, table, psi_out.grid());
    psi += psi_out;
    return ScatteringState(std::move(psi), psi_out, std::move(out), 0.0);
}

ScatteringState ScatteringState::from_position(const ComplexField3D& psi, const EigenfunctionTable& table, double t)
{
    MomentumAmplitude out = gen_fourier_forward(psi, table);
    const SphericalKGrid& kg = table.k_grid();
    for (std::size_t n = 0; n < kg.size(); ++n) {
        const double k2 = dot(kg.node(n), kg.node(n));
        out[n] *= std::polar(1.0, 0.5 * k2 * t);
    }
    ComplexField3D psi_out(psi.grid());
    std::vector<cplx> a(kg.size());
    for (std::size_t n = 0; n < kg.size(); ++n) a[n] = kInvTwoPi32 * kg.weight(n) * out[n];
    lattice_synthesis(node_list(kg), a, grid_coordinates(psi.grid()), +1, psi_out.values());
    return ScatteringState(psi, std::move(psi_out), std::move(out), t);
}

ScatteringState evolve(const ScatteringState& state, double t, const EigenfunctionTable& table)
{
    const double T = state.time() + t;
    ComplexField3D alpha = free_propagate(state.out_field(), T);
    if (table.kind() == TableKind::channels) {
        if (!state.expansion_ || state.expansion_->t_max() < std::abs(T)) {
            ExpansionOptions opt;
            opt.t_max = std::max(2.0 * std::abs(T), 8.0);
            state.expansion_ = std::make_shared<const OutgoingExpansion>(table, state.out_field(), opt);
        }
        ComplexField3D psi = state.expansion_->field(alpha.grid(), T);
        psi += alpha;
        ScatteringState next(std::move(psi), state.out_field(), state.out_amplitude(), T);
        next.expansion_ = state.expansion_;
        return next;
    }
    MomentumAmplitude phased = state.out_amplitude();
    const SphericalKGrid& kg = table.k_grid();
    for (std::size_t n = 0; n < kg.size(); ++n) {
        const double k2 = dot(kg.node(n), kg.node(n));
        phased[n] *= std::polar(1.0, -0.5 * k2 * T);
    }
    ComplexField3D psi = scattered_synthesis(phased, table, alpha.grid());
    psi += alpha;
    return ScatteringState(std::move(psi), state.out_field(), state.out_amplitude(), T);
}

ComplexField3D apply_hamiltonian(const ComplexField3D& psi, const Potential& V)
{
    ComplexField3D out = laplacian(psi);
    const CartesianGrid& g = psi.grid();
    for (std::size_t p = 0; p < g.size(); ++p) out[p] = -0.5 * out[p] + V(g.point(p)) * psi[p];
    return out;
}

ComplexField3D split_step_evolve(const ComplexField3D& psi, const Potential& V, double t, std::size_t steps)
{
    if (steps == 0) throw Error(ErrorCode::invalid_argument, "split-step needs at least one step");
    const CartesianGrid& g = psi.grid();
    const double dt = t / static_cast<double>(steps);
    std::vector<cplx> half(g.size());
    for (std::size_t p = 0; p < g.size(); ++p) half[p] = std::polar(1.0, -0.5 * dt * V(g.point(p)));
    ComplexField3D cur = psi;
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t p = 0; p < g.size(); ++p) cur[p] *= half[p];
        cur = free_propagate(cur, dt);
        for (std::size_t p = 0; p < g.size(); ++p) cur[p] *= half[p];
    }
    return cur;
}

// ---------------------------------------------------------------------------------------------

namespace {

void hankel(int l_max, double x, int sign, std::vector<cplx>& h, std::vector<cplx>* dh)
{
    std::vector<double> j, y, dj, dy;
    spherical_bessel_j(std::max(l_max, 1), x, j);
    spherical_bessel_y(std::max(l_max, 1), x, y);
    h.resize(l_max + 1);
    for (int l = 0; l <= l_max; ++l) h[l] = cplx(j[l], -sign * y[l]);
    if (dh) {
        spherical_bessel_derivative(std::max(l_max, 1), x, j, dj);
        spherical_bessel_derivative(std::max(l_max, 1), x, y, dy);
        dh->resize(l_max + 1);
        for (int l = 0; l <= l_max; ++l) (*dh)[l] = cplx(dj[l], -sign * dy[l]);
    }
}

}  // namespace

OutgoingExpansion::OutgoingExpansion(const EigenfunctionTable& table, const ComplexField3D& psi_out,
                                     ExpansionOptions opt)
    : center_(table.center()), t_max_(opt.t_max)
{
    if (table.is_free()) {
        free_ = true;
        return;
    }
    if (table.kind() != TableKind::channels)
        throw Error(ErrorCode::invalid_argument, "the dense expansion needs a radially symmetric table");
    const CartesianGrid& g = psi_out.grid();
    sign_ = table.sign();
    const double kmin = table.k_grid().k_min(), kmax = table.k_grid().k_max();
    double r_max = opt.r_max;
    if (r_max <= 0.0) r_max = norm(Vec3{g.half_width(), g.half_width(), g.half_width()}) + norm(center_);
    r_max_ = r_max;

    // Composite Gauss–Legendre in k: each panel spans at most π of the phase k²t/2 + kr.
    std::size_t panels = static_cast<std::size_t>(std::ceil((opt.t_max * kmax + r_max) * (kmax - kmin) / pi));
    panels = std::max<std::size_t>(panels, 4);
    if (opt.radial_nodes > 0) panels = std::max<std::size_t>(1, opt.radial_nodes / opt.nodes_per_panel);
    std::vector<double> edges(panels + 1);
    for (std::size_t p = 0; p <= panels; ++p) edges[p] = kmin + (kmax - kmin) * static_cast<double>(p) / panels;
    const auto rule = composite_gauss_legendre(edges, opt.nodes_per_panel);
    k_ = rule.nodes;
    w_ = rule.weights;
    const std::size_t J = k_.size();

    // Channels: closed form or direct solves when cheap, otherwise Chebyshev interpolation in k.
    const bool point = table.descriptor().kind == "point_interaction";
    const auto make = [&](double k) {
        if (point) {
            const PointInteraction p{table.descriptor().param("alpha"), center_};
            return RadialChannels::point_interaction(p, k, sign_);
        }
        return RadialChannels::solve(make_potential(table.descriptor()), k, sign_);
    };
    const std::size_t M = opt.master_nodes;
    const bool through_masters = J > M;
    interpolated_ = !point && through_masters;
    if (through_masters) {
        xm_.resize(M);
        wm_.resize(M);
        for (std::size_t m = 0; m < M; ++m) {
            const double th = pi * (m + 0.5) / static_cast<double>(M);
            xm_[m] = 0.5 * (kmin + kmax) + 0.5 * (kmax - kmin) * std::cos(th);
            wm_[m] = (m % 2 ? -1.0 : 1.0) * std::sin(th);
        }
    }
    std::vector<double> b;
    if (interpolated_) {
        masters_.resize(M);
        parallel_for(M, [&](std::size_t b0, std::size_t e0) {
            for (std::size_t m = b0; m < e0; ++m) masters_[m] = make(xm_[m]);
        });
        for (const auto& ch : masters_) {
            l_max_ = std::max(l_max_, ch.l_max());
            r_ext_ = std::max(r_ext_, ch.match_radius());
        }
        nl_ = l_max_ + 1;
        coeff_.assign(J * nl_, 0.0);
        for (std::size_t j = 0; j < J; ++j) {
            bary_row(k_[j], b);
            for (std::size_t m = 0; m < M; ++m)
                for (int l = 0; l <= masters_[m].l_max(); ++l)
                    coeff_[j * nl_ + l] += b[m] * masters_[m].exterior_coefficient(l);
        }
    } else {
        channels_.resize(J);
        parallel_for(J, [&](std::size_t b0, std::size_t e0) {
            for (std::size_t j = b0; j < e0; ++j) channels_[j] = make(k_[j]);
        });
        for (const auto& ch : channels_) {
            l_max_ = std::max(l_max_, ch.l_max());
            r_ext_ = std::max(r_ext_, ch.match_radius());
        }
        nl_ = l_max_ + 1;
        coeff_.assign(J * nl_, 0.0);
        for (std::size_t j = 0; j < J; ++j)
            for (int l = 0; l <= channels_[j].l_max(); ++l) coeff_[j * nl_ + l] = channels_[j].exterior_coefficient(l);
    }
    if (point) r_ext_ = 0.0;

    // Projections ψ̃_lm(k) = ∫ S_lm(k̂) e^{ik·a} ψ̂_out(k k̂) dk̂ by the grid quadrature about the centre,
    // at the Chebyshev masters when the dense rule is long, at the nodes otherwise.
    const RadialShells shells(g, center_);
    const auto A = shells.project(psi_out, l_max_);
    const std::size_t nlm = sh_count(l_max_);
    const std::vector<double>& kp = through_masters ? xm_ : k_;
    const std::size_t P_count = kp.size();
    std::vector<std::vector<cplx>> P(P_count, std::vector<cplx>(nlm, 0.0));
    parallel_for(P_count, [&](std::size_t b0, std::size_t e0) {
        std::vector<double> jl;
        for (std::size_t j = b0; j < e0; ++j)
            for (std::size_t s = 0; s < shells.size(); ++s) {
                if (A[s].empty()) continue;
                const double x = kp[j] * shells.radius(s);
                if (x == 0.0) {
                    P[j][0] += A[s][0];
                    continue;
                }
                spherical_bessel_j(l_max_, x, jl);
                for (int l = 0; l <= l_max_; ++l)
                    for (int m = -l; m <= l; ++m) P[j][sh_index(l, m)] += jl[l] * A[s][sh_index(l, m)];
            }
    });
    const double h3 = g.cell_volume();
    std::vector<double> cmax(nl_, 0.0);
    for (std::size_t j = 0; j < J; ++j)
        for (int l = 0; l < nl_; ++l) cmax[l] = std::max(cmax[l], std::abs(coeff_[j * nl_ + l]));
    std::vector<double> size(nlm, 0.0);
    double biggest = 0.0;
    for (int l = 0; l <= l_max_; ++l)
        for (int m = -l; m <= l; ++m) {
            double p = 0.0;
            for (std::size_t j = 0; j < P_count; ++j)
                p = std::max(p, std::abs(P[j][sh_index(l, m)]) * kp[j] * kp[j]);
            size[sh_index(l, m)] = p * std::max(cmax[l], 1e-300);
            biggest = std::max(biggest, size[sh_index(l, m)]);
        }
    std::vector<std::size_t> kept;
    for (int l = 0; l <= l_max_; ++l)
        for (int m = -l; m <= l; ++m) {
            if (biggest == 0.0 || size[sh_index(l, m)] < opt.channel_floor * biggest) continue;
            lm_.emplace_back(l, m);
            kept.push_back(sh_index(l, m));
            l_act_ = std::max(l_act_, l);
        }
    const double pref = 4.0 * pi * kInvTwoPi32;
    amp_.assign(kept.size(), std::vector<cplx>(J, 0.0));
    parallel_for(J, [&](std::size_t b0, std::size_t e0) {
        std::vector<double> bj;
        for (std::size_t j = b0; j < e0; ++j) {
            if (through_masters) bary_row(k_[j], bj);
            for (std::size_t c = 0; c < kept.size(); ++c) {
                const int l = lm_[c].first;
                cplx p = 0.0;
                if (through_masters) {
                    // ψ̃_lm ~ k^l near 0: interpolate ψ̃_lm/(k/k_max)^l so the error keeps that scaling.
                    for (std::size_t m = 0; m < M; ++m) p += bj[m] * P[m][kept[c]] / std::pow(xm_[m] / kmax, l);
                    p *= std::pow(k_[j] / kmax, l);
                } else {
                    p = P[j][kept[c]];
                }
                const cplx psi_lm = kInvTwoPi32 * 4.0 * pi * i_pow(-l) * h3 * p;
                amp_[c][j] = pref * i_pow(l) * w_[j] * k_[j] * k_[j] * psi_lm;
            }
        }
    });
}

void OutgoingExpansion::bary_row(double k, std::vector<double>& b) const
{
    const std::size_t M = xm_.size();
    b.assign(M, 0.0);
    double den = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        const double d = k - xm_[m];
        if (d == 0.0) {
            std::fill(b.begin(), b.end(), 0.0);
            b[m] = 1.0;
            return;
        }
        b[m] = wm_[m] / d;
        den += b[m];
    }
    for (auto& x : b) x /= den;
}

OutgoingExpansion::Radial OutgoingExpansion::radial_functions(double r, bool derivative) const
{
    const std::size_t J = k_.size();
    Radial out;
    out.g.assign(J * nl_, 0.0);
    if (derivative) out.dg.assign(J * nl_, 0.0);
    if (r < 1e-12 && r_ext_ == 0.0) return out;
    std::vector<cplx> h, dh, v, dv;
    if (r >= r_ext_) {
        for (std::size_t j = 0; j < J; ++j) {
            hankel(l_act_, k_[j] * r, sign_, h, derivative ? &dh : nullptr);
            for (int l = 0; l <= l_act_; ++l) {
                out.g[j * nl_ + l] = coeff_[j * nl_ + l] * h[l];
                if (derivative) out.dg[j * nl_ + l] = coeff_[j * nl_ + l] * k_[j] * dh[l];
            }
        }
        return out;
    }
    if (!interpolated_) {
        for (std::size_t j = 0; j < J; ++j) {
            channels_[j].evaluate(r, v, derivative ? &dv : nullptr);
            for (int l = 0; l <= std::min(l_act_, channels_[j].l_max()); ++l) {
                out.g[j * nl_ + l] = v[l];
                if (derivative) out.dg[j * nl_ + l] = dv[l];
            }
        }
        return out;
    }
    const std::size_t M = masters_.size();
    std::vector<cplx> G(M * nl_, 0.0), dG(M * nl_, 0.0);
    for (std::size_t m = 0; m < M; ++m) {
        masters_[m].evaluate(r, v, derivative ? &dv : nullptr);
        for (int l = 0; l <= std::min(l_act_, masters_[m].l_max()); ++l) {
            G[m * nl_ + l] = v[l];
            if (derivative) dG[m * nl_ + l] = dv[l];
        }
    }
    std::vector<double> b;
    for (std::size_t j = 0; j < J; ++j) {
        bary_row(k_[j], b);
        for (std::size_t m = 0; m < M; ++m) {
            if (b[m] == 0.0) continue;
            for (int l = 0; l <= l_act_; ++l) {
                out.g[j * nl_ + l] += b[m] * G[m * nl_ + l];
                if (derivative) out.dg[j * nl_ + l] += b[m] * dG[m * nl_ + l];
            }
        }
    }
    return out;
}

void OutgoingExpansion::on_sphere(double r, double t, const std::vector<Vec3>& directions, std::vector<cplx>& beta,
                                  std::vector<cplx>* radial_derivative) const
{
    beta.assign(directions.size(), 0.0);
    if (radial_derivative) radial_derivative->assign(directions.size(), 0.0);
    if (free_ || lm_.empty()) return;
    const bool deriv = radial_derivative != nullptr;
    std::shared_ptr<const Radial> cached;
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        if (cached_ && cached_r_ == r && (cached_deriv_ || !deriv)) cached = cached_;
    }
    if (!cached) {
        cached = std::make_shared<const Radial>(radial_functions(r, deriv));
        std::lock_guard<std::mutex> lock(cache_mutex_);
        cached_ = cached;
        cached_r_ = r;
        cached_deriv_ = deriv;
    }
    const Radial& rf = *cached;
    const std::size_t J = k_.size();
    std::vector<cplx> phase(J);
    for (std::size_t j = 0; j < J; ++j) phase[j] = std::polar(1.0, -0.5 * k_[j] * k_[j] * t);
    std::vector<cplx> C(lm_.size(), 0.0), dC(lm_.size(), 0.0);
    for (std::size_t c = 0; c < lm_.size(); ++c) {
        const int l = lm_[c].first;
        for (std::size_t j = 0; j < J; ++j) {
            const cplx a = amp_[c][j] * phase[j];
            C[c] += a * rf.g[j * nl_ + l];
            if (deriv) dC[c] += a * rf.dg[j * nl_ + l];
        }
    }
    std::vector<double> S;
    for (std::size_t d = 0; d < directions.size(); ++d) {
        real_spherical_harmonics(l_act_, directions[d], S);
        cplx v = 0.0, dv = 0.0;
        for (std::size_t c = 0; c < lm_.size(); ++c) {
            const double s = S[sh_index(lm_[c].first, lm_[c].second)];
            v += s * C[c];
            if (deriv) dv += s * dC[c];
        }
        beta[d] = v;
        if (deriv) (*radial_derivative)[d] = dv;
    }
}

ComplexField3D OutgoingExpansion::field(const CartesianGrid& grid, double t) const
{
    ComplexField3D out(grid);
    if (free_ || lm_.empty()) return out;
    const RadialShells shells(grid, center_);
    const std::size_t J = k_.size();
    std::vector<cplx> phase(J);
    for (std::size_t j = 0; j < J; ++j) phase[j] = std::polar(1.0, -0.5 * k_[j] * k_[j] * t);
    const std::size_t nlm = sh_count(l_act_);
    std::vector<std::vector<cplx>> C(shells.size());
    parallel_for(shells.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t s = b; s < e; ++s) {
            const Radial rf = radial_functions(shells.radius(s), false);
            C[s].assign(nlm, 0.0);
            for (std::size_t c = 0; c < lm_.size(); ++c) {
                const int l = lm_[c].first;
                cplx v = 0.0;
                for (std::size_t j = 0; j < J; ++j) v += amp_[c][j] * phase[j] * rf.g[j * nl_ + l];
                C[s][sh_index(l, lm_[c].second)] = v;
            }
        }
    });
    shells.synthesize(C, l_act_, out);
    return out;
}

cplx OutgoingExpansion::beta(const Vec3& x, double t) const
{
    const Vec3 d = x - center_;
    const double r = norm(d);
    std::vector<cplx> b;
    on_sphere(r, t, {direction_or_z(d, r)}, b);
    return b[0];
}

}  // namespace fastflux
