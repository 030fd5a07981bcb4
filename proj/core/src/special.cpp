#include "fastflux/special.hpp"

#include "fastflux/error.hpp"

namespace fastflux {

void spherical_bessel_j(int l_max, double x, std::vector<double>& j)
{
    j.assign(static_cast<std::size_t>(l_max) + 1, 0.0);
    if (x < 1e-8) {
        j[0] = 1.0 - x * x / 6.0;
        if (l_max >= 1) j[1] = x / 3.0;
        return;
    }
    const double s = std::sin(x), c = std::cos(x);
    j[0] = s / x;
    if (l_max == 0) return;
    if (static_cast<double>(l_max) <= x) {
        j[1] = s / (x * x) - c / x;
        for (int l = 1; l < l_max; ++l) j[l + 1] = (2 * l + 1) / x * j[l] - j[l - 1];
        return;
    }
    // Miller: start well above max(l_max, x) and normalise against j_0.
    const int start = l_max + 20 + static_cast<int>(std::sqrt(40.0 * (l_max + x)));
    double fp1 = 0.0, f = 1e-300;
    std::vector<double> tmp(static_cast<std::size_t>(l_max) + 1);
    for (int l = start; l > 0; --l) {
        const double fm1 = (2 * l + 1) / x * f - fp1;
        fp1 = f;
        f = fm1;
        if (l - 1 <= l_max) tmp[l - 1] = f;
        if (std::abs(f) > 1e250) {
            f *= 1e-250;
            fp1 *= 1e-250;
            for (int i = l - 1; i <= l_max; ++i) tmp[i] *= 1e-250;
        }
    }
    // Normalise with j_0 or j_1, whichever is larger in magnitude.
    const double j1 = s / (x * x) - c / x;
    const double scale = std::abs(j[0]) > std::abs(j1) ? j[0] / tmp[0] : j1 / tmp[1];
    for (int l = 0; l <= l_max; ++l) j[l] = tmp[l] * scale;
}

void spherical_bessel_y(int l_max, double x, std::vector<double>& y)
{
    y.assign(static_cast<std::size_t>(l_max) + 1, 0.0);
    const double s = std::sin(x), c = std::cos(x);
    y[0] = -c / x;
    if (l_max == 0) return;
    y[1] = -c / (x * x) - s / x;
    for (int l = 1; l < l_max; ++l) {
        y[l + 1] = (2 * l + 1) / x * y[l] - y[l - 1];
        if (!std::isfinite(y[l + 1])) y[l + 1] = -HUGE_VAL;
    }
}

void spherical_bessel_derivative(int l_max, double x, const std::vector<double>& f, std::vector<double>& df)
{
    if (l_max < 1 || f.size() < static_cast<std::size_t>(l_max) + 1)
        throw Error(ErrorCode::invalid_argument, "derivative recurrence needs orders 0 and 1");
    df.assign(static_cast<std::size_t>(l_max) + 1, 0.0);
    df[0] = -f[1];
    for (int l = 1; l <= l_max; ++l) df[l] = f[l - 1] - (l + 1) / x * f[l];
}

void legendre(int l_max, double u, std::vector<double>& p)
{
    p.assign(static_cast<std::size_t>(l_max) + 1, 0.0);
    p[0] = 1.0;
    if (l_max >= 1) p[1] = u;
    for (int l = 1; l < l_max; ++l) p[l + 1] = ((2 * l + 1) * u * p[l] - l * p[l - 1]) / (l + 1);
}

void real_spherical_harmonics(int l_max, const Vec3& w, std::vector<double>& s)
{
    const std::size_t count = static_cast<std::size_t>(l_max + 1) * static_cast<std::size_t>(l_max + 1);
    s.assign(count, 0.0);
    const double ct = w[2];
    const double rho = std::hypot(w[0], w[1]);
    const double cphi = rho > 0.0 ? w[0] / rho : 1.0, sphi = rho > 0.0 ? w[1] / rho : 0.0;
    const double st = rho;

    // Normalised associated Legendre functions P̄_l^m(cos θ) with Σ_m-normalisation such that
    // S_l0 = P̄_l^0 and S_l,±m = √2·P̄_l^m·{cos, sin}(mφ).
    std::vector<double> pm(static_cast<std::size_t>(l_max) + 1);
    double pmm = std::sqrt(1.0 / (4.0 * pi));
    double cm = 1.0, sm = 0.0;  // cos(mφ), sin(mφ)
    for (int m = 0; m <= l_max; ++m) {
        if (m > 0) {
            pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * st;
            const double c2 = cm * cphi - sm * sphi;
            sm = sm * cphi + cm * sphi;
            cm = c2;
        }
        pm[m] = pmm;
        if (m < l_max) pm[m + 1] = std::sqrt(2.0 * m + 3.0) * ct * pmm;
        for (int l = m + 2; l <= l_max; ++l) {
            const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l * l - m * m)));
            const double b = std::sqrt(((l - 1.0) * (l - 1.0) - m * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
            pm[l] = a * (ct * pm[l - 1] - b * pm[l - 2]);
        }
        for (int l = m; l <= l_max; ++l) {
            if (m == 0) {
                s[sh_index(l, 0)] = pm[l];
            } else {
                s[sh_index(l, m)] = std::sqrt(2.0) * pm[l] * cm;
                s[sh_index(l, -m)] = std::sqrt(2.0) * pm[l] * sm;
            }
        }
    }
}

}  // namespace fastflux
