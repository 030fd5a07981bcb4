#include "fastflux/csv.hpp"

#include <charconv>
#include <cmath>

namespace fastflux {

std::string format_number(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    const double a = std::abs(x);
    const auto fmt = (a != 0.0 && (a < 1e-6 || a >= 1e6)) ? std::chars_format::scientific : std::chars_format::fixed;
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, fmt);
    return std::string(buf, res.ptr);
}

std::string csv_row(const std::vector<std::string>& cells)
{
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) s += ',';
        s += cells[i];
    }
    s += '\n';
    return s;
}

}  // namespace fastflux
