#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "fastflux/quadrature.hpp"
#include "fastflux/vec.hpp"

namespace fastflux::oracle {

// max |(−½Δ − k²/2)φ| over the cubes of side `cell` tiling [−outer, outer]³ outside [−inner, inner]³.
// The Laplacian is taken by tensor-product Chebyshev differentiation on each cube.
inline double helmholtz_residual_on_shell(const std::function<cplx(const Vec3&)>& phi, double k, double inner,
                                          double outer, double cell = 1.0, std::size_t n = 20)
{
    const int cells = static_cast<int>(std::lround(2.0 * outer / cell));
    auto at = [n](std::size_t i, std::size_t j, std::size_t l) { return (i * n + j) * n + l; };
    double worst = 0.0;
    for (int ci = 0; ci < cells; ++ci)
        for (int cj = 0; cj < cells; ++cj)
            for (int cl = 0; cl < cells; ++cl) {
                const std::array<double, 3> lo{-outer + ci * cell, -outer + cj * cell, -outer + cl * cell};
                bool inside = true;
                for (double a : lo) inside = inside && a >= -inner && a + cell <= inner;
                if (inside) continue;
                std::array<ChebyshevBasis, 3> b;
                for (int a = 0; a < 3; ++a) b[a] = ChebyshevBasis::make(n, lo[a], lo[a] + cell);
                std::vector<cplx> f(n * n * n);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j)
                        for (std::size_t l = 0; l < n; ++l)
                            f[at(i, j, l)] = phi({b[0].points[i], b[1].points[j], b[2].points[l]});
                std::vector<cplx> lap(f.size(), 0.0);
                for (int a = 0; a < 3; ++a) {
                    std::vector<cplx> cur = f;
                    for (int pass = 0; pass < 2; ++pass) {
                        std::vector<cplx> next(f.size());
                        for (std::size_t i = 0; i < n; ++i)
                            for (std::size_t j = 0; j < n; ++j)
                                for (std::size_t l = 0; l < n; ++l) {
                                    const std::size_t row = a == 0 ? i : a == 1 ? j : l;
                                    cplx s = 0.0;
                                    for (std::size_t m = 0; m < n; ++m)
                                        s += b[a].d(row, m) *
                                             cur[a == 0 ? at(m, j, l) : a == 1 ? at(i, m, l) : at(i, j, m)];
                                    next[at(i, j, l)] = s;
                                }
                        cur = std::move(next);
                    }
                    for (std::size_t p = 0; p < f.size(); ++p) lap[p] += cur[p];
                }
                for (std::size_t p = 0; p < f.size(); ++p)
                    worst = std::max(worst, std::abs(-0.5 * lap[p] - 0.5 * k * k * f[p]));
            }
    return worst;
}

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace fastflux::oracle
