#include "fastflux/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "fastflux/error.hpp"

namespace fastflux {

namespace detail {

namespace {

struct PlanCache {
    std::mutex mutex;
    std::map<std::tuple<std::size_t, std::size_t, std::size_t, int>, fftw_plan> plans;

    ~PlanCache()
    {
        for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n0, std::size_t n1, std::size_t n2, int sign)
    {
        std::lock_guard lock(mutex);
        const auto key = std::make_tuple(n0, n1, n2, sign);
        if (auto it = plans.find(key); it != plans.end()) return it->second;
        std::vector<cplx> scratch(n0 * n1 * n2);
        auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft_3d(static_cast<int>(n0), static_cast<int>(n1), static_cast<int>(n2), p, p,
                                          sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans.emplace(key, plan);
        return plan;
    }
};

PlanCache& plan_cache()
{
    static PlanCache cache;
    return cache;
}

}  // namespace

void fft3d(std::vector<cplx>& data, std::size_t n0, std::size_t n1, std::size_t n2, int sign)
{
    if (data.size() != n0 * n1 * n2) throw Error(ErrorCode::grid_mismatch, "FFT buffer size mismatch");
    fftw_plan plan = plan_cache().get(n0, n1, n2, sign);
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
}

}  // namespace detail

namespace {

void require_fft_grid(const CartesianGrid& grid)
{
    if (!grid.is_power_of_two())
        throw Error(ErrorCode::not_power_of_two,
                    "FFT needs a power-of-two grid, got " + std::to_string(grid.points_per_axis()));
}

// (-1)^{i+j+l}
void checkerboard(std::vector<cplx>& v, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t l = (i + j) % 2; l < n; l += 2) v[(i * n + j) * n + l] = -v[(i * n + j) * n + l];
}

double standard_frequency(std::size_t m, std::size_t n, double dk)
{
    if (2 * m == n) return 0.0;
    const double mm = m < n / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(n);
    return mm * dk;
}

}  // namespace

MomentumAmplitude fft_forward(const ComplexField3D& field)
{
    const CartesianGrid& g = field.grid();
    require_fft_grid(g);
    const std::size_t n = g.points_per_axis();
    std::vector<cplx> v = field.values();
    checkerboard(v, n);
    detail::fft3d(v, n, n, n, -1);
    checkerboard(v, n);
    const double half_shift_sign = ((3 * (n / 2)) % 2 == 0) ? 1.0 : -1.0;
    const double c = half_shift_sign * g.cell_volume() * std::pow(2.0 * pi, -1.5);
    for (auto& x : v) x *= c;
    return MomentumAmplitude(CartesianDual{g}, std::move(v));
}

ComplexField3D fft_inverse(const MomentumAmplitude& amp)
{
    if (!amp.is_cartesian()) throw Error(ErrorCode::grid_mismatch, "fft_inverse needs a Cartesian dual layout");
    const CartesianGrid& g = amp.dual_of();
    require_fft_grid(g);
    const std::size_t n = g.points_per_axis();
    std::vector<cplx> v = amp.values();
    checkerboard(v, n);
    detail::fft3d(v, n, n, n, +1);
    checkerboard(v, n);
    const double dk = g.momentum_spacing();
    const double half_shift_sign = ((3 * (n / 2)) % 2 == 0) ? 1.0 : -1.0;
    const double c = half_shift_sign * dk * dk * dk * std::pow(2.0 * pi, -1.5);
    for (auto& x : v) x *= c;
    return ComplexField3D(g, std::move(v));
}

namespace {

template <class Multiplier>
ComplexField3D spectral_apply(const ComplexField3D& field, Multiplier&& mult)
{
    const CartesianGrid& g = field.grid();
    require_fft_grid(g);
    const std::size_t n = g.points_per_axis();
    const double dk = g.momentum_spacing();
    std::vector<cplx> v = field.values();
    detail::fft3d(v, n, n, n, -1);
    const double inv = 1.0 / static_cast<double>(g.size());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t l = 0; l < n; ++l) {
                const Vec3 k{standard_frequency(i, n, dk), standard_frequency(j, n, dk), standard_frequency(l, n, dk)};
                const bool nyquist = 2 * i == n || 2 * j == n || 2 * l == n;
                auto& x = v[(i * n + j) * n + l];
                x *= mult(k, nyquist) * inv;
            }
    detail::fft3d(v, n, n, n, +1);
    return ComplexField3D(g, std::move(v));
}

}  // namespace

std::array<ComplexField3D, 3> gradient(const ComplexField3D& field)
{
    return {spectral_apply(field, [](const Vec3& k, bool nyq) { return nyq ? cplx{} : I * k[0]; }),
            spectral_apply(field, [](const Vec3& k, bool nyq) { return nyq ? cplx{} : I * k[1]; }),
            spectral_apply(field, [](const Vec3& k, bool nyq) { return nyq ? cplx{} : I * k[2]; })};
}

ComplexField3D laplacian(const ComplexField3D& field)
{
    return spectral_apply(field, [](const Vec3& k, bool nyq) { return nyq ? cplx{} : cplx{-dot(k, k)}; });
}

ComplexField3D free_propagate(const ComplexField3D& field, double t)
{
    MomentumAmplitude a = fft_forward(field);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Vec3 k = a.node(i);
        a[i] *= std::exp(-I * (0.5 * t * dot(k, k)));
    }
    return fft_inverse(a);
}

}  // namespace fastflux
