#include "fastflux/momentum.hpp"

#include "fastflux/dft.hpp"
#include "fastflux/error.hpp"

namespace fastflux {

std::size_t layout_size(const MomentumLayout& layout)
{
    if (const auto* c = std::get_if<CartesianDual>(&layout)) return c->grid.size();
    return std::get<std::shared_ptr<const SphericalKGrid>>(layout)->size();
}

bool same_layout(const MomentumLayout& a, const MomentumLayout& b)
{
    if (a.index() != b.index()) return false;
    if (const auto* c = std::get_if<CartesianDual>(&a)) return c->grid == std::get<CartesianDual>(b).grid;
    return std::get<1>(a).get() == std::get<1>(b).get();
}

MomentumAmplitude::MomentumAmplitude(MomentumLayout layout, std::vector<cplx> values)
    : layout_(std::move(layout)), values_(std::move(values))
{
    if (values_.size() != layout_size(layout_))
        throw Error(ErrorCode::grid_mismatch, "momentum values do not match the layout");
}

MomentumAmplitude MomentumAmplitude::zeros(MomentumLayout layout)
{
    const std::size_t n = layout_size(layout);
    return MomentumAmplitude(std::move(layout), std::vector<cplx>(n));
}

Vec3 MomentumAmplitude::node(std::size_t i) const
{
    if (const auto* c = std::get_if<CartesianDual>(&layout_)) return c->grid.momentum_point(i);
    return spherical().node(i);
}

double MomentumAmplitude::weight(std::size_t i) const
{
    if (const auto* c = std::get_if<CartesianDual>(&layout_)) {
        const double dk = c->grid.momentum_spacing();
        return dk * dk * dk;
    }
    return spherical().weight(i);
}

double MomentumAmplitude::norm_squared() const
{
    double s = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) s += weight(i) * std::norm(values_[i]);
    return s;
}

double MomentumAmplitude::norm() const { return std::sqrt(norm_squared()); }

MomentumSymbol::MomentumSymbol(std::string name, Batch batch, double cutoff)
    : name_(std::move(name)), batch_(std::move(batch)), cutoff_(cutoff)
{
    if (!batch_) throw Error(ErrorCode::invalid_argument, "momentum symbol needs an evaluator");
}

MomentumSymbol MomentumSymbol::pointwise(std::string name, std::function<cplx(const Vec3&)> f, double cutoff)
{
    return MomentumSymbol(
        std::move(name),
        [f = std::move(f)](const std::vector<Vec3>& ks) {
            std::vector<cplx> out(ks.size());
            for (std::size_t i = 0; i < ks.size(); ++i) out[i] = f(ks[i]);
            return out;
        },
        cutoff);
}

MomentumSymbol MomentumSymbol::zero()
{
    return pointwise("zero", [](const Vec3&) { return cplx{}; }, 0.0);
}

MomentumSymbol MomentumSymbol::gaussian(double width, const Vec3& center)
{
    if (!(width > 0.0)) throw Error(ErrorCode::invalid_argument, "Gaussian width must be positive");
    const double inv = 1.0 / (2.0 * width * width);
    // e^{-r²/2w²} < 1e-18 beyond r = 9.1w
    return pointwise(
        "gaussian", [inv, center](const Vec3& k) { return cplx(std::exp(-dot(k - center, k - center) * inv)); },
        norm(center) + 9.1 * width);
}

MomentumSymbol MomentumSymbol::bracket_power(double p)
{
    return pointwise("bracket_power", [p](const Vec3& k) { return cplx(std::pow(bracket(norm(k)), -p)); });
}

MomentumSymbol MomentumSymbol::fourier_of(const ComplexField3D& f)
{
    auto field = std::make_shared<const ComplexField3D>(f);
    return MomentumSymbol("fourier", [field](const std::vector<Vec3>& ks) { return fourier_at(*field, ks); });
}

MomentumSymbol MomentumSymbol::time_shifted(double s) const
{
    return MomentumSymbol(
        name_ + "_shifted",
        [batch = batch_, s](const std::vector<Vec3>& ks) {
            auto v = batch(ks);
            for (std::size_t i = 0; i < ks.size(); ++i) v[i] *= std::polar(1.0, 0.5 * s * dot(ks[i], ks[i]));
            return v;
        },
        cutoff_);
}

}  // namespace fastflux
