#include "fastflux/eigenfunctions.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>

#include "fastflux/error.hpp"
#include "fastflux/parallel.hpp"
#include "fastflux/special.hpp"

namespace fastflux {

cplx point_interaction_eigenfunction(const PointInteraction& p, const Vec3& x, const Vec3& k, int sign)
{
    const double r = norm(x - p.location);
    if (r == 0.0) throw Error(ErrorCode::invalid_argument, "point interaction eigenfunction is singular at its centre");
    if (norm(k) == 0.0) throw Error(ErrorCode::invalid_argument, "eigenfunction needs k != 0");
    const double kk = norm(k);
    return std::polar(1.0, dot(k, x)) + p.amplitude(kk, sign) * std::polar(1.0 / r, dot(k, p.location) - sign * kk * r);
}

EigenfunctionTable EigenfunctionTable::free(std::shared_ptr<const SphericalKGrid> k_grid, const CartesianGrid& x_grid,
                                            int sign)
{
    EigenfunctionTable t;
    t.kind_ = TableKind::free;
    t.sign_ = sign;
    t.k_grid_ = std::move(k_grid);
    t.x_grid_ = x_grid;
    t.potential_ = make_zero_potential();
    return t;
}

EigenfunctionTable EigenfunctionTable::from_channels(const Potential& V, std::shared_ptr<const SphericalKGrid> k_grid,
                                                     const CartesianGrid& x_grid, int sign,
                                                     const PartialWaveOptions& options)
{
    if (V.is_zero()) {
        auto t = free(std::move(k_grid), x_grid, sign);
        t.descriptor_ = V.descriptor();
        return t;
    }
    EigenfunctionTable t;
    t.kind_ = TableKind::channels;
    t.sign_ = sign;
    t.k_grid_ = std::move(k_grid);
    t.x_grid_ = x_grid;
    t.descriptor_ = V.descriptor();
    t.potential_ = V;
    t.pw_options_ = options;
    const auto& radial = t.k_grid_->radial();
    t.channels_.resize(radial.size());
    std::vector<double> residuals(radial.size());
    const double rs = V.support_radius();
    const std::vector<double> probe{0.1 * rs, 0.25 * rs, 0.5 * rs, rs, 2.0 * rs};
    parallel_for(radial.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            t.channels_[i] = RadialChannels::solve(V, radial[i].k, sign, options);
            residuals[i] = radial_ls_residual(V, t.channels_[i], probe);
        }
    });
    for (double r : residuals) t.residual_sup_ = std::max(t.residual_sup_, r);
    return t;
}

EigenfunctionTable EigenfunctionTable::from_point_interaction(const PointInteraction& p,
                                                              std::shared_ptr<const SphericalKGrid> k_grid,
                                                              const CartesianGrid& x_grid, int sign)
{
    EigenfunctionTable t;
    t.kind_ = p.is_free() ? TableKind::free : TableKind::channels;
    t.sign_ = sign;
    t.k_grid_ = std::move(k_grid);
    t.x_grid_ = x_grid;
    t.descriptor_ = {"point_interaction",
                     {{"alpha", p.alpha}, {"x", p.location[0]}, {"y", p.location[1]}, {"z", p.location[2]}}};
    t.point_ = p;
    t.center_ = p.location;
    for (const auto& r : t.k_grid_->radial()) t.channels_.push_back(RadialChannels::point_interaction(p, r.k, sign));
    return t;
}

EigenfunctionTable EigenfunctionTable::from_solver(const Potential& V, std::shared_ptr<const SphericalKGrid> k_grid,
                                                   int sign, const LsOptions& options)
{
    LsOperator op(V, options);
    if (V.is_zero()) {
        auto t = free(std::move(k_grid), op.grid(), sign);
        t.descriptor_ = V.descriptor();
        t.ls_options_ = options;
        return t;
    }
    const std::size_t N = k_grid->size();
    std::vector<ComplexField3D> eta(N, ComplexField3D(op.grid()));
    std::vector<double> res(N);
    parallel_for(N, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            auto s = op.solve(k_grid->node(i), sign);
            res[i] = s.residual;
            eta[i] = std::move(s.eta);
        }
    });
    double sup = 0.0;
    for (double r : res) sup = std::max(sup, r);
    auto t = from_samples(V.descriptor(), std::move(k_grid), op.grid(), sign, std::move(eta), sup);
    t.ls_options_ = options;
    return t;
}

EigenfunctionTable EigenfunctionTable::from_samples(const PotentialDescriptor& descriptor,
                                                    std::shared_ptr<const SphericalKGrid> k_grid,
                                                    const CartesianGrid& x_grid, int sign,
                                                    std::vector<ComplexField3D> eta, double residual_sup)
{
    EigenfunctionTable t;
    t.sign_ = sign;
    t.k_grid_ = std::move(k_grid);
    t.x_grid_ = x_grid;
    t.descriptor_ = descriptor;
    t.residual_sup_ = residual_sup;
    t.ls_options_.box_half_width = x_grid.half_width();
    t.ls_options_.points_per_axis = x_grid.points_per_axis();
    try {
        t.potential_ = make_potential(descriptor);
    } catch (const Error&) {
    }
    if (eta.empty()) {
        t.kind_ = TableKind::free;
        return t;
    }
    if (eta.size() != t.k_grid_->size()) throw Error(ErrorCode::grid_mismatch, "one η sample set per k-node expected");
    for (const auto& e : eta) require_same_grid(e.grid(), x_grid, "eigenfunction samples");
    t.kind_ = TableKind::sampled;
    t.samples_ = std::move(eta);
    return t;
}

cplx EigenfunctionTable::channel_sum(const RadialChannels& ch, const Vec3& x, const Vec3& k) const
{
    const Vec3 d = x - center_;
    const double r = norm(d);
    std::vector<cplx> g;
    ch.evaluate(r, g);
    const cplx shift = std::polar(1.0, dot(k, center_));
    if (r == 0.0) return shift * g[0];
    const double u = dot(d, k) / (r * norm(k));
    std::vector<double> P;
    legendre(ch.l_max(), u, P);
    cplx s = 0.0, il = 1.0;
    for (int l = 0; l <= ch.l_max(); ++l) {
        s += (2.0 * l + 1.0) * il * g[l] * P[l];
        il *= I;
    }
    return shift * s;
}

namespace {

cplx trilinear(const ComplexField3D& f, const Vec3& x)
{
    const CartesianGrid& g = f.grid();
    const double h = g.spacing();
    const std::size_t n = g.points_per_axis();
    std::array<std::size_t, 3> i0;
    std::array<double, 3> t;
    for (int a = 0; a < 3; ++a) {
        const double s = (x[a] + g.half_width()) / h;
        if (s < 0.0 || s > static_cast<double>(n - 1))
            throw Error(ErrorCode::invalid_argument, "point lies outside the sampled eigenfunction grid");
        i0[a] = std::min(static_cast<std::size_t>(s), n - 2);
        t[a] = s - static_cast<double>(i0[a]);
    }
    cplx v = 0.0;
    for (int c = 0; c < 8; ++c) {
        const std::size_t a = c >> 2 & 1, b = c >> 1 & 1, d = c & 1;
        const double w = (a ? t[0] : 1 - t[0]) * (b ? t[1] : 1 - t[1]) * (d ? t[2] : 1 - t[2]);
        v += w * f[g.index(i0[0] + a, i0[1] + b, i0[2] + d)];
    }
    return v;
}

}  // namespace

cplx EigenfunctionTable::eta(const Vec3& x, std::size_t node) const
{
    switch (kind_) {
    case TableKind::free: return 0.0;
    case TableKind::channels: return channel_sum(channels_[k_grid_->radial_index(node)], x, k_grid_->node(node));
    case TableKind::sampled: return trilinear(samples_[node], x);
    }
    return 0.0;
}

cplx EigenfunctionTable::eta_at(const Vec3& x, const Vec3& k) const
{
    if (norm(k) == 0.0) throw Error(ErrorCode::invalid_argument, "eigenfunction needs k != 0");
    switch (kind_) {
    case TableKind::free: return 0.0;
    case TableKind::channels: return channel_sum(channels_at(norm(k)), x, k);
    case TableKind::sampled: {
        return trilinear(eta_field_at(k), x);
    }
    }
    return 0.0;
}

RadialChannels EigenfunctionTable::channels_at(double k) const
{
    if (kind_ != TableKind::channels) throw Error(ErrorCode::invalid_argument, "table is not radial");
    if (!(k > 0.0)) throw Error(ErrorCode::invalid_argument, "channels need k > 0");
    return point_ ? RadialChannels::point_interaction(*point_, k, sign_)
                  : RadialChannels::solve(*potential_, k, sign_, pw_options_);
}

ComplexField3D EigenfunctionTable::eta_field_at(const Vec3& k) const
{
    if (kind_ != TableKind::sampled) throw Error(ErrorCode::invalid_argument, "table is not sampled");
    if (!potential_) throw Error(ErrorCode::invalid_argument, "table has no potential to solve off-node");
    return ls_solve_direct(*potential_, k, sign_, ls_options_).eta;
}

cplx EigenfunctionTable::phi(const Vec3& x, std::size_t node) const
{
    return std::polar(1.0, dot(k_grid_->node(node), x)) + eta(x, node);
}

cplx EigenfunctionTable::phi_at(const Vec3& x, const Vec3& k) const { return std::polar(1.0, dot(k, x)) + eta_at(x, k); }

double boundary_envelope(const ComplexField3D& eta)
{
    const CartesianGrid& g = eta.grid();
    const std::size_t n = g.points_per_axis();
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t l = 0; l < n; ++l) {
                if (i != 0 && j != 0 && l != 0 && i != n - 1 && j != n - 1 && l != n - 1) continue;
                const std::size_t p = g.index(i, j, l);
                c = std::max(c, std::abs(eta[p]) * norm(g.point(p)));
            }
    return c;
}

ResonanceScreen screen_resonance(const Potential& V, double k_min, const LsOptions& options, double ratio_limit)
{
    ResonanceScreen s;
    LsOperator op(V, options);
    const Vec3 k{0.0, 0.0, k_min};
    try {
        s.born_ratio = op.born(k, +1, 60).ratio;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::divergence) throw;
        s.rejected = true;
        s.born_ratio = HUGE_VAL;
        s.reason = e.what();
    }
    try {
        s.condition = op.solve(k, +1).condition;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::singular_system && e.code() != ErrorCode::no_convergence) throw;
        s.rejected = true;
        s.reason = e.what();
    }
    if (!s.rejected && s.born_ratio > ratio_limit) {
        s.rejected = true;
        s.reason = "Born ratio " + std::to_string(s.born_ratio) + " at the smallest k exceeds the limit";
    }
    return s;
}

namespace {

// Evaluates η(·, k) for one k with the backend's per-k preparation done once.
std::function<cplx(const Vec3&)> eta_evaluator(const EigenfunctionTable& t, const Vec3& k)
{
    return [&t, k](const Vec3& x) { return t.eta_at(x, k); };
}

struct Stencil {
    Vec3 k;
    double h;
    std::array<double, 3> s;  // one-sided direction per axis, 0 for central
    Vec3 khat;
    bool central_radial;
};

}  // namespace

BoundCheckReport check_eigenfunction_bounds(const EigenfunctionTable& table, const BoundCheckOptions& opt)
{
    BoundCheckReport rep;
    const auto& kg = table.k_grid();
    const auto leb = AngularRule::lebedev26();
    const std::size_t nd = std::min<std::size_t>(opt.directions, leb.size());
    std::vector<Vec3> dirs;
    for (std::size_t i = 0; i < nd; ++i) dirs.push_back(leb[i].direction);
    // Tilt the directions off the axes so mixed derivatives are generic.
    const Frame tilt = Frame::about(normalized(Vec3{0.3, 0.5, 1.0}));
    for (auto& d : dirs) d = tilt.to_world(d);

    std::vector<Vec3> xs;
    for (double r : opt.radii) {
        if (r == 0.0) {
            xs.push_back({0.0, 0.0, 0.0});
            continue;
        }
        for (const auto& d : dirs) xs.push_back(r * d);
    }
    if (table.kind() == TableKind::channels && table.descriptor().kind == "point_interaction") {
        // The closed form is singular at the centre: nudge off it.
        for (auto& x : xs)
            if (norm(x - table.center()) == 0.0) x = table.center() + Vec3{0.0, 0.0, 0.25};
    }

    const char* first_names[3] = {"d_x", "d_y", "d_z"};
    const char* second_names[6] = {"d_xx", "d_yy", "d_zz", "d_xy", "d_xz", "d_yz"};
    const int pairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};
    for (int a = 0; a < 3; ++a) rep.multi_index.push_back({first_names[a], 1});
    for (int p = 0; p < 6; ++p) rep.multi_index.push_back({second_names[p], 2});
    rep.radial.push_back({"radial_1", 1});
    rep.radial.push_back({"radial_2", 2});

    const auto& radial = kg.radial();
    for (std::size_t ri = 0; ri < radial.size(); ++ri) {
        double spacing = HUGE_VAL;
        if (ri > 0) spacing = std::min(spacing, radial[ri].k - radial[ri - 1].k);
        if (ri + 1 < radial.size()) spacing = std::min(spacing, radial[ri + 1].k - radial[ri].k);
        if (!std::isfinite(spacing)) spacing = radial[ri].k;
        for (const auto& kd : dirs) {
            const Vec3 k = radial[ri].k * kd;
            const double kk = norm(k);
            const double kappa = kk / bracket(kk);
            for (int pass = 0; pass < 2; ++pass) {
                const double h = opt.step_fraction * spacing / (pass == 0 ? 1.0 : 2.0);
                const bool one_sided = kk < 3.0 * h;
                std::array<double, 3> s{};
                for (int a = 0; a < 3; ++a) s[a] = one_sided ? (k[a] >= 0.0 ? 1.0 : -1.0) : 0.0;

                // Collect η at the stencil points.
                std::vector<Vec3> pts{k};
                auto add = [&](const Vec3& q) {
                    pts.push_back(q);
                    return pts.size() - 1;
                };
                std::array<std::size_t, 3> p1{}, m1{}, p2{};
                std::array<std::size_t, 3> mix_pp{}, mix_pm{}, mix_mp{}, mix_mm{};
                for (int a = 0; a < 3; ++a) {
                    Vec3 e{};
                    e[a] = h;
                    if (one_sided) {
                        p1[a] = add(k + s[a] * e);
                        p2[a] = add(k + 2.0 * s[a] * e);
                    } else {
                        p1[a] = add(k + e);
                        m1[a] = add(k - e);
                    }
                }
                for (int p = 3; p < 6; ++p) {
                    const int a = pairs[p][0], b = pairs[p][1];
                    Vec3 ea{}, eb{};
                    ea[a] = h;
                    eb[b] = h;
                    if (one_sided) {
                        mix_pp[p - 3] = add(k + s[a] * ea + s[b] * eb);
                    } else {
                        mix_pp[p - 3] = add(k + ea + eb);
                        mix_pm[p - 3] = add(k + ea - eb);
                        mix_mp[p - 3] = add(k - ea + eb);
                        mix_mm[p - 3] = add(k - ea - eb);
                    }
                }
                const Vec3 kh = normalized(k);
                const std::size_t rp = add(k + h * kh), rp2 = add(k + 2.0 * h * kh);
                const std::size_t rm = one_sided ? 0 : add(k - h * kh);

                std::vector<std::vector<cplx>> vals(pts.size(), std::vector<cplx>(xs.size()));
                parallel_for(pts.size(), [&](std::size_t b, std::size_t e) {
                    for (std::size_t q = b; q < e; ++q) {
                        const auto f = eta_evaluator(table, pts[q]);
                        for (std::size_t xi = 0; xi < xs.size(); ++xi) vals[q][xi] = f(xs[xi]);
                    }
                });

                for (std::size_t xi = 0; xi < xs.size(); ++xi) {
                    const Vec3& x = xs[xi];
                    const double bx = bracket(norm(x));
                    const cplx e0 = std::polar(1.0, dot(k, x));
                    const auto v = [&](std::size_t q) { return vals[q][xi]; };
                    const cplx phi0 = e0 + v(0);
                    if (pass == 0) rep.sup_abs_phi = std::max(rep.sup_abs_phi, std::abs(phi0));

                    auto record = [&](BoundEntry& en, cplx d, int order) {
                        const double un = std::abs(d) / std::pow(bx, order);
                        const double w = std::pow(kappa, order - 1) * un;
                        if (!std::isfinite(un)) {
                            rep.pass = false;
                            rep.message = "non-finite " + en.name;
                        }
                        if (pass == 0) {
                            if (w > en.weighted) {
                                en.weighted = w;
                                en.worst_x = x;
                                en.worst_k = k;
                            }
                            en.unweighted = std::max(en.unweighted, un);
                        } else {
                            en.weighted_refined = std::max(en.weighted_refined, w);
                        }
                    };
                    auto record_radial = [&](BoundEntry& en, cplx d, int order) {
                        const double w = std::abs(d) / std::pow(bx, order);
                        if (pass == 0) {
                            if (w > en.weighted) {
                                en.weighted = w;
                                en.worst_x = x;
                                en.worst_k = k;
                            }
                            en.unweighted = std::max(en.unweighted, w);
                        } else {
                            en.weighted_refined = std::max(en.weighted_refined, w);
                        }
                    };

                    for (int a = 0; a < 3; ++a) {
                        const cplx exact = I * x[a] * e0;
                        const cplx d = one_sided ? (-3.0 * v(0) + 4.0 * v(p1[a]) - v(p2[a])) / (2.0 * s[a] * h)
                                                 : (v(p1[a]) - v(m1[a])) / (2.0 * h);
                        record(rep.multi_index[a], exact + d, 1);
                    }
                    for (int p = 0; p < 6; ++p) {
                        const int a = pairs[p][0], b = pairs[p][1];
                        const cplx exact = -x[a] * x[b] * e0;
                        cplx d;
                        if (a == b) {
                            d = one_sided ? (v(0) - 2.0 * v(p1[a]) + v(p2[a])) / (h * h)
                                          : (v(p1[a]) - 2.0 * v(0) + v(m1[a])) / (h * h);
                        } else if (one_sided) {
                            d = (v(mix_pp[p - 3]) - v(p1[a]) - v(p1[b]) + v(0)) / (s[a] * s[b] * h * h);
                        } else {
                            d = (v(mix_pp[p - 3]) - v(mix_pm[p - 3]) - v(mix_mp[p - 3]) + v(mix_mm[p - 3])) /
                                (4.0 * h * h);
                        }
                        record(rep.multi_index[3 + p], exact + d, 2);
                    }
                    const double kx = dot(kh, x);
                    const cplx d1 = one_sided ? (-3.0 * v(0) + 4.0 * v(rp) - v(rp2)) / (2.0 * h)
                                              : (v(rp) - v(rm)) / (2.0 * h);
                    const cplx d2 = one_sided ? (v(0) - 2.0 * v(rp) + v(rp2)) / (h * h)
                                              : (v(rp) - 2.0 * v(0) + v(rm)) / (h * h);
                    record_radial(rep.radial[0], I * kx * e0 + d1, 1);
                    record_radial(rep.radial[1], -kx * kx * e0 + d2, 2);
                }
            }
        }
    }
    auto judge = [&](BoundEntry& en) {
        const double ref = std::max(en.weighted, 1e-300);
        en.stable = std::abs(en.weighted - en.weighted_refined) <= opt.stability * ref;
        if (!en.stable) {
            rep.pass = false;
            if (rep.message.empty()) rep.message = "entry " + en.name + " unstable under step halving";
        }
    };
    for (auto& e : rep.multi_index) judge(e);
    for (auto& e : rep.radial) judge(e);
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Cache

namespace {

static_assert(std::endian::native == std::endian::little, "cache writer assumes a little-endian host");

constexpr char kMagic[5] = {'F', 'A', 'S', 'T', '\x01'};

class Writer {
public:
    void bytes(const void* p, std::size_t n)
    {
        const auto* c = static_cast<const char*>(p);
        buf_.insert(buf_.end(), c, c + n);
    }
    void u64(std::uint64_t v) { bytes(&v, 8); }
    void i64(std::int64_t v) { bytes(&v, 8); }
    void f64(double v) { bytes(&v, 8); }
    void str(const std::string& s)
    {
        u64(s.size());
        bytes(s.data(), s.size());
        const std::size_t pad = (8 - s.size() % 8) % 8;
        buf_.insert(buf_.end(), pad, '\0');
    }
    std::vector<char>& data() { return buf_; }

private:
    std::vector<char> buf_;
};

class Reader {
public:
    Reader(const std::vector<char>& buf, std::string name) : buf_(buf), name_(std::move(name)) {}
    void bytes(void* p, std::size_t n)
    {
        if (pos_ + n > buf_.size()) fail("truncated");
        std::memcpy(p, buf_.data() + pos_, n);
        pos_ += n;
    }
    std::uint64_t u64()
    {
        std::uint64_t v;
        bytes(&v, 8);
        return v;
    }
    std::int64_t i64()
    {
        std::int64_t v;
        bytes(&v, 8);
        return v;
    }
    double f64()
    {
        double v;
        bytes(&v, 8);
        return v;
    }
    std::string str()
    {
        const std::uint64_t n = u64();
        if (n > buf_.size()) fail("bad string length");
        std::string s(n, '\0');
        bytes(s.data(), n);
        const std::size_t pad = (8 - n % 8) % 8;
        pos_ += pad;
        return s;
    }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return buf_.size() - pos_; }
    [[noreturn]] void fail(const std::string& why) const
    {
        throw Error(ErrorCode::cache_corrupt, "cache file '" + name_ + "' is corrupt: " + why);
    }

private:
    const std::vector<char>& buf_;
    std::string name_;
    std::size_t pos_ = 0;
};

std::uint32_t crc(const void* p, std::size_t n)
{
    return static_cast<std::uint32_t>(::crc32(0L, static_cast<const Bytef*>(p), static_cast<uInt>(n)));
}

PotentialDescriptor parse_descriptor(const std::string& canonical)
{
    PotentialDescriptor d;
    std::stringstream ss(canonical);
    std::string item;
    std::getline(ss, d.kind, ';');
    while (std::getline(ss, item, ';')) {
        const auto eq = item.find('=');
        d.params.emplace_back(item.substr(0, eq), std::stod(item.substr(eq + 1)));
    }
    return d;
}

void write_descriptors(Writer& w, const PotentialDescriptor& pot, const SphericalKGrid& kg, const CartesianGrid& xg,
                       int sign, TableKind kind)
{
    w.i64(static_cast<std::int64_t>(kind));
    w.i64(sign);
    w.str(pot.canonical());
    w.f64(xg.half_width());
    w.u64(xg.points_per_axis());
    w.u64(kg.radial_count());
    for (const auto& r : kg.radial()) {
        w.f64(r.k);
        w.f64(r.weight);
    }
    w.i64(kg.radial_degree());
    w.u64(kg.angular_count());
    for (const auto& a : kg.angular().nodes()) {
        w.f64(a.direction[0]);
        w.f64(a.direction[1]);
        w.f64(a.direction[2]);
        w.f64(a.weight);
    }
    w.i64(kg.angular().degree());
}

}  // namespace

std::string cache_key(const PotentialDescriptor& potential, const SphericalKGrid& k_grid, const CartesianGrid& x_grid,
                      int sign, TableKind kind, const std::string& extra)
{
    Writer w;
    write_descriptors(w, potential, k_grid, x_grid, sign, kind);
    w.str(extra);
    const auto& d = w.data();
    std::vector<char> rev(d.rbegin(), d.rend());
    char buf[32];
    std::snprintf(buf, sizeof buf, "%08x%08x", crc(d.data(), d.size()), crc(rev.data(), rev.size()));
    return buf;
}

std::string table_cache_key(const EigenfunctionTable& t, const std::string& extra)
{
    return cache_key(t.descriptor(), t.k_grid(), t.x_grid(), t.sign(), t.kind(), extra);
}

void save_table(const EigenfunctionTable& t, const std::filesystem::path& path)
{
    if (t.kind() == TableKind::channels)
        throw Error(ErrorCode::invalid_argument, "channel tables are rebuilt on demand and are not cached");
    Writer w;
    w.bytes(kMagic, sizeof kMagic);
    write_descriptors(w, t.descriptor(), t.k_grid(), t.x_grid(), t.sign(), t.kind());
    const std::size_t blocks = t.kind() == TableKind::sampled ? t.k_grid().size() : 0;
    const std::size_t per = t.kind() == TableKind::sampled ? t.x_grid().size() : 0;
    w.u64(blocks);
    w.u64(per);
    for (std::size_t b = 0; b < blocks; ++b)
        for (const auto& v : t.samples(b).values()) {
            w.f64(v.real());
            w.f64(v.imag());
        }
    w.f64(t.residual_sup());
    const std::uint32_t c = crc(w.data().data(), w.data().size());
    w.u64(c);

    std::filesystem::create_directories(path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error(ErrorCode::io, "cannot write cache file '" + tmp + "'");
        out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
        if (!out) throw Error(ErrorCode::io, "short write to '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

EigenfunctionTable load_table(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open cache file '" + path.string() + "'");
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r(buf, path.string());
    char magic[5];
    r.bytes(magic, 5);
    if (std::memcmp(magic, kMagic, 4) != 0) r.fail("bad magic");
    if (magic[4] != kMagic[4]) r.fail("unsupported version " + std::to_string(static_cast<int>(magic[4])));
    if (buf.size() < 5 + 8) r.fail("truncated");
    std::uint64_t stored;
    std::memcpy(&stored, buf.data() + buf.size() - 8, 8);
    if (crc(buf.data(), buf.size() - 8) != stored) r.fail("checksum mismatch");

    const auto kind = static_cast<TableKind>(r.i64());
    const int sign = static_cast<int>(r.i64());
    const PotentialDescriptor pot = parse_descriptor(r.str());
    const double half_width = r.f64();
    const std::size_t n = r.u64();
    const std::size_t nr = r.u64();
    if (nr > buf.size() / 16) r.fail("bad radial count");
    std::vector<RadialNode> radial(nr);
    for (auto& rn : radial) {
        rn.k = r.f64();
        rn.weight = r.f64();
    }
    const int rdeg = static_cast<int>(r.i64());
    const std::size_t na = r.u64();
    if (na > buf.size() / 32) r.fail("bad angular count");
    std::vector<AngularNode> ang(na);
    for (auto& a : ang) {
        a.direction = {r.f64(), r.f64(), r.f64()};
        a.weight = r.f64();
    }
    const int adeg = static_cast<int>(r.i64());
    auto kg = std::make_shared<const SphericalKGrid>(std::move(radial), AngularRule::from_nodes(std::move(ang), adeg),
                                                     rdeg);
    const CartesianGrid xg(half_width, n);
    const std::size_t blocks = r.u64(), per = r.u64();
    if (blocks * per * 16 + 16 != r.remaining()) r.fail("length mismatch");
    std::vector<ComplexField3D> eta;
    if (kind == TableKind::sampled) {
        if (blocks != kg->size() || per != xg.size()) r.fail("sample shape mismatch");
        eta.reserve(blocks);
        for (std::size_t b = 0; b < blocks; ++b) {
            ComplexField3D f(xg);
            for (auto& v : f.values()) {
                const double re = r.f64();
                v = {re, r.f64()};
            }
            eta.push_back(std::move(f));
        }
    } else if (blocks != 0) {
        r.fail("free table with samples");
    }
    const double residual = r.f64();
    return EigenfunctionTable::from_samples(pot, std::move(kg), xg, sign, std::move(eta), residual);
}

}  // namespace fastflux
