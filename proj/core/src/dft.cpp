#include "fastflux/dft.hpp"

#include <map>

#include "fastflux/error.hpp"
#include "fastflux/fft.hpp"
#include "fastflux/parallel.hpp"

namespace fastflux {

namespace {

std::vector<std::vector<std::size_t>> group_by_z(const std::vector<Vec3>& q)
{
    std::map<double, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < q.size(); ++i) groups[q[i][2]].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    out.reserve(groups.size());
    for (auto& [z, idx] : groups) out.push_back(std::move(idx));
    return out;
}

void phases(double q, const std::vector<double>& coords, int sign, std::vector<cplx>& out)
{
    out.resize(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) out[i] = std::polar(1.0, sign * q * coords[i]);
}

template <bool Moments>
void lattice_sum_impl(const std::vector<cplx>& v, const std::vector<double>& c, const std::vector<Vec3>& q,
                      int sign, std::vector<LatticeSum>& out)
{
    const std::size_t n = c.size();
    if (v.size() != n * n * n) throw Error(ErrorCode::grid_mismatch, "lattice sum: value count mismatch");
    out.assign(q.size(), LatticeSum{});
    const auto groups = group_by_z(q);
    parallel_for(groups.size(), [&](std::size_t g0, std::size_t g1) {
        std::vector<cplx> A(n * n), Az, phx, phy, phz, B(n), Bx, Bz;
        if constexpr (Moments) {
            Az.resize(n * n);
            Bx.resize(n);
            Bz.resize(n);
        }
        for (std::size_t g = g0; g < g1; ++g) {
            const auto& idx = groups[g];
            phases(q[idx.front()][2], c, sign, phz);
            for (std::size_t ij = 0; ij < n * n; ++ij) {
                const cplx* row = &v[ij * n];
                cplx s = 0.0, sz = 0.0;
                for (std::size_t l = 0; l < n; ++l) {
                    const cplx t = row[l] * phz[l];
                    s += t;
                    if constexpr (Moments) sz += t * c[l];
                }
                A[ij] = s;
                if constexpr (Moments) Az[ij] = sz;
            }
            for (std::size_t qi : idx) {
                phases(q[qi][0], c, sign, phx);
                phases(q[qi][1], c, sign, phy);
                std::fill(B.begin(), B.end(), cplx{});
                if constexpr (Moments) {
                    std::fill(Bx.begin(), Bx.end(), cplx{});
                    std::fill(Bz.begin(), Bz.end(), cplx{});
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const cplx p = phx[i];
                    const cplx* a = &A[i * n];
                    for (std::size_t j = 0; j < n; ++j) B[j] += a[j] * p;
                    if constexpr (Moments) {
                        const cplx px = p * c[i];
                        const cplx* az = &Az[i * n];
                        for (std::size_t j = 0; j < n; ++j) {
                            Bx[j] += a[j] * px;
                            Bz[j] += az[j] * p;
                        }
                    }
                }
                LatticeSum r{};
                for (std::size_t j = 0; j < n; ++j) {
                    r.value += B[j] * phy[j];
                    if constexpr (Moments) {
                        r.moment[0] += Bx[j] * phy[j];
                        r.moment[1] += B[j] * phy[j] * c[j];
                        r.moment[2] += Bz[j] * phy[j];
                    }
                }
                out[qi] = r;
            }
        }
    });
}

}  // namespace

std::vector<cplx> lattice_sum(const std::vector<cplx>& v, const std::vector<double>& coords,
                              const std::vector<Vec3>& q, int sign)
{
    std::vector<LatticeSum> full;
    lattice_sum_impl<false>(v, coords, q, sign, full);
    std::vector<cplx> out(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) out[i] = full[i].value;
    return out;
}

std::vector<LatticeSum> lattice_sum_with_moments(const std::vector<cplx>& v, const std::vector<double>& coords,
                                                 const std::vector<Vec3>& q, int sign)
{
    std::vector<LatticeSum> out;
    lattice_sum_impl<true>(v, coords, q, sign, out);
    return out;
}

void lattice_synthesis(const std::vector<Vec3>& q, const std::vector<cplx>& a, const std::vector<double>& c, int sign,
                       std::vector<cplx>& out)
{
    const std::size_t n = c.size();
    if (out.size() != n * n * n) throw Error(ErrorCode::grid_mismatch, "lattice synthesis: output size mismatch");
    if (a.size() != q.size()) throw Error(ErrorCode::invalid_argument, "lattice synthesis: amplitude count mismatch");
    const auto groups = group_by_z(q);
    std::vector<cplx> A(n * n);
    std::vector<std::vector<cplx>> phx, phy;
    std::vector<cplx> phz;
    for (const auto& group : groups) {
        phx.resize(group.size());
        phy.resize(group.size());
        for (std::size_t g = 0; g < group.size(); ++g) {
            phases(q[group[g]][0], c, sign, phx[g]);
            phases(q[group[g]][1], c, sign, phy[g]);
        }
        phases(q[group.front()][2], c, sign, phz);
        parallel_for(n, [&](std::size_t i0, std::size_t i1) {
            for (std::size_t i = i0; i < i1; ++i) {
                cplx* row = &A[i * n];
                std::fill(row, row + n, cplx{});
                for (std::size_t g = 0; g < group.size(); ++g) {
                    const cplx ax = a[group[g]] * phx[g][i];
                    const auto& py = phy[g];
                    for (std::size_t j = 0; j < n; ++j) row[j] += ax * py[j];
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const cplx aij = row[j];
                    cplx* o = &out[(i * n + j) * n];
                    for (std::size_t l = 0; l < n; ++l) o[l] += aij * phz[l];
                }
            }
        });
    }
}

std::vector<double> grid_coordinates(const CartesianGrid& grid)
{
    std::vector<double> c(grid.points_per_axis());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = grid.coordinate(i);
    return c;
}

std::vector<cplx> fourier_at(const ComplexField3D& field, const std::vector<Vec3>& ks)
{
    std::vector<cplx> out = lattice_sum(field.values(), grid_coordinates(field.grid()), ks, -1);
    const double c = field.grid().cell_volume() * std::pow(2.0 * pi, -1.5);
    for (auto& x : out) x *= c;
    return out;
}

std::vector<cplx> interpolate_at(const ComplexField3D& field, const std::vector<Vec3>& points)
{
    const CartesianGrid& g = field.grid();
    MomentumAmplitude amp = fft_forward(field);
    const std::size_t n = g.points_per_axis();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t l = 0; l < n; ++l)
                if (i == 0 || j == 0 || l == 0) amp[g.index(i, j, l)] = 0.0;
    std::vector<double> kc(n);
    for (std::size_t m = 0; m < n; ++m) kc[m] = g.momentum(m);
    std::vector<cplx> out = lattice_sum(amp.values(), kc, points, +1);
    const double dk = g.momentum_spacing();
    const double c = dk * dk * dk * std::pow(2.0 * pi, -1.5);
    for (auto& x : out) x *= c;
    return out;
}

}  // namespace fastflux
