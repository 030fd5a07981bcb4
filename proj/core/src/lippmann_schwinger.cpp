#include "fastflux/lippmann_schwinger.hpp"

#include <Eigen/Dense>

#include <random>

#include "fastflux/error.hpp"
#include "fastflux/fft.hpp"

namespace fastflux {

namespace {

// (e^{iaL} − 1)/(ia)
cplx phi(double a, double L)
{
    const double x = a * L;
    if (std::abs(x) < 1e-4) return L * cplx(1.0 - x * x / 6.0, x / 2.0 - x * x * x / 24.0);
    return (std::polar(1.0, x) - 1.0) / (I * a);
}

double vnorm(const std::vector<cplx>& v)
{
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

struct GmresResult {
    std::vector<cplx> x;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    double condition = 1.0;
};

template <class Op>
GmresResult gmres(Op&& A, const std::vector<cplx>& b, double tol, std::size_t restart, std::size_t max_iter)
{
    const std::size_t N = b.size();
    GmresResult out;
    out.x.assign(N, 0.0);
    const double bnorm = vnorm(b);
    if (bnorm == 0.0) return out;
    std::vector<cplx> r = b, w(N);
    bool first_cycle = true;
    while (out.iterations < max_iter) {
        const double beta = vnorm(r);
        out.relative_residual = beta / bnorm;
        if (out.relative_residual < tol) return out;
        const std::size_t m = std::min(restart, max_iter - out.iterations);
        std::vector<std::vector<cplx>> Q(1, r);
        for (auto& q : Q[0]) q /= beta;
        Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m + 1), static_cast<Eigen::Index>(m));
        std::vector<cplx> cs(m), sn(m), g(m + 1, 0.0);
        Eigen::MatrixXcd R = H;
        g[0] = beta;
        std::size_t j = 0;
        for (; j < m; ++j) {
            A(Q[j], w);
            for (std::size_t i = 0; i <= j; ++i) {
                cplx h = 0.0;
                for (std::size_t p = 0; p < N; ++p) h += std::conj(Q[i][p]) * w[p];
                H(i, j) = h;
                for (std::size_t p = 0; p < N; ++p) w[p] -= h * Q[i][p];
            }
            const double hn = vnorm(w);
            H(j + 1, j) = hn;
            ++out.iterations;
            // Apply previous rotations to the new column, then form the next one.
            for (std::size_t i = 0; i <= j + 1; ++i) R(i, j) = H(i, j);
            for (std::size_t i = 0; i < j; ++i) {
                const cplx t = std::conj(cs[i]) * R(i, j) + std::conj(sn[i]) * R(i + 1, j);
                R(i + 1, j) = -sn[i] * R(i, j) + cs[i] * R(i + 1, j);
                R(i, j) = t;
            }
            const double den = std::hypot(std::abs(R(j, j)), std::abs(R(j + 1, j)));
            cs[j] = den > 0.0 ? R(j, j) / den : 1.0;
            sn[j] = den > 0.0 ? R(j + 1, j) / den : 0.0;
            R(j, j) = den;
            R(j + 1, j) = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = std::conj(cs[j]) * g[j];
            out.relative_residual = std::abs(g[j + 1]) / bnorm;
            if (hn > 0.0) {
                Q.emplace_back(w);
                for (auto& q : Q.back()) q /= hn;
            }
            if (out.relative_residual < tol || hn == 0.0) {
                ++j;
                break;
            }
        }
        if (first_cycle && j > 0) {
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H.topLeftCorner(static_cast<Eigen::Index>(j + 1),
                                                                   static_cast<Eigen::Index>(j)));
            const auto& s = svd.singularValues();
            out.condition = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : HUGE_VAL;
            first_cycle = false;
        }
        // Back substitution and update.
        std::vector<cplx> y(j);
        for (std::size_t ii = j; ii-- > 0;) {
            cplx s = g[ii];
            for (std::size_t c = ii + 1; c < j; ++c) s -= R(ii, c) * y[c];
            y[ii] = s / R(ii, ii);
        }
        for (std::size_t i = 0; i < j; ++i)
            for (std::size_t p = 0; p < N; ++p) out.x[p] += y[i] * Q[i][p];
        // True residual for the restart.
        A(out.x, w);
        for (std::size_t p = 0; p < N; ++p) r[p] = b[p] - w[p];
        out.relative_residual = vnorm(r) / bnorm;
        if (out.relative_residual < tol) return out;
    }
    return out;
}

}  // namespace

cplx TruncatedKernel::transform(double q, double kappa, double L)
{
    if (q == 0.0) {
        const double x = kappa * L;
        if (std::abs(x) < 1e-3) return 4.0 * pi * L * L * cplx(0.5 - x * x / 8.0, -x / 3.0);
        return 4.0 * pi * (std::polar(1.0, -x) * cplx(1.0, x) - 1.0) / (kappa * kappa);
    }
    return 4.0 * pi / q * (phi(q - kappa, L) - phi(-q - kappa, L)) / (2.0 * I);
}

TruncatedKernel::TruncatedKernel(const CartesianGrid& grid, double kappa) : n_(grid.points_per_axis()), kappa_(kappa)
{
    const std::size_t n = n_, n4 = 4 * n, n2 = 2 * n;
    const double h = grid.spacing();
    const double L = std::sqrt(3.0) * static_cast<double>(n) * h;
    const double dq = 2.0 * pi / (static_cast<double>(n4) * h);
    auto freq = [&](std::size_t a) {
        return static_cast<double>(a < n4 / 2 ? static_cast<long>(a) : static_cast<long>(a) - static_cast<long>(n4)) * dq;
    };
    std::vector<cplx> big(n4 * n4 * n4);
    for (std::size_t a = 0; a < n4; ++a)
        for (std::size_t b = 0; b < n4; ++b)
            for (std::size_t c = 0; c < n4; ++c) {
                const double q = std::sqrt(freq(a) * freq(a) + freq(b) * freq(b) + freq(c) * freq(c));
                big[(a * n4 + b) * n4 + c] = transform(q, kappa, L);
            }
    detail::fft3d(big, n4, n4, n4, +1);
    const double scale = 1.0 / std::pow(static_cast<double>(n4) * h, 3);
    real_.assign(n2 * n2 * n2, 0.0);
    auto wrap = [](long m, std::size_t period) { return static_cast<std::size_t>((m % static_cast<long>(period) + static_cast<long>(period)) % static_cast<long>(period)); };
    const long ln = static_cast<long>(n);
    for (long i = -ln + 1; i < ln; ++i)
        for (long j = -ln + 1; j < ln; ++j)
            for (long l = -ln + 1; l < ln; ++l)
                real_[(wrap(i, n2) * n2 + wrap(j, n2)) * n2 + wrap(l, n2)] =
                    scale * big[(wrap(i, n4) * n4 + wrap(j, n4)) * n4 + wrap(l, n4)];
    spectrum_ = real_;
    detail::fft3d(spectrum_, n2, n2, n2, -1);
}

cplx TruncatedKernel::at(long di, long dj, long dl) const
{
    const long n2 = static_cast<long>(2 * n_);
    auto w = [n2](long m) { return static_cast<std::size_t>((m + n2) % n2); };
    return real_[(w(di) * static_cast<std::size_t>(n2) + w(dj)) * static_cast<std::size_t>(n2) + w(dl)];
}

void TruncatedKernel::apply(const std::vector<cplx>& src, std::vector<cplx>& out) const
{
    const std::size_t n = n_, n2 = 2 * n;
    std::vector<cplx> pad(n2 * n2 * n2, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t l = 0; l < n; ++l) pad[(i * n2 + j) * n2 + l] = src[(i * n + j) * n + l];
    detail::fft3d(pad, n2, n2, n2, -1);
    for (std::size_t p = 0; p < pad.size(); ++p) pad[p] *= spectrum_[p];
    detail::fft3d(pad, n2, n2, n2, +1);
    const double inv = 1.0 / static_cast<double>(pad.size());
    out.resize(n * n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t l = 0; l < n; ++l) out[(i * n + j) * n + l] = pad[(i * n2 + j) * n2 + l] * inv;
}

LsOperator::LsOperator(const Potential& V, LsOptions options)
    : V_(V), options_(options), grid_(options.box_half_width, options.points_per_axis)
{
    const double vmax = V.max_abs();
    const double h = grid_.spacing();
    for (std::size_t p = 0; p < grid_.size(); ++p) {
        const Vec3 x = grid_.point(p);
        bool excluded = false;
        for (const auto& s : V.singularities())
            if (norm(x - s) < V.exclusion_radius(h)) excluded = true;
        if (excluded) continue;
        const double v = V(x);
        if (vmax > 0.0 && std::abs(v) > options_.support_threshold * vmax) {
            support_.push_back(p);
            v_support_.push_back(v);
        }
    }
}

std::shared_ptr<const TruncatedKernel> LsOperator::kernel(double kappa) const
{
    {
        std::lock_guard lock(mutex_);
        if (auto it = kernels_.find(kappa); it != kernels_.end()) return it->second;
    }
    auto K = std::make_shared<const TruncatedKernel>(grid_, kappa);
    std::lock_guard lock(mutex_);
    return kernels_.emplace(kappa, std::move(K)).first->second;
}

void LsOperator::apply_full(const TruncatedKernel& G, const std::vector<cplx>& s, std::vector<cplx>& out) const
{
    std::vector<cplx> src(grid_.size(), 0.0);
    for (std::size_t i = 0; i < support_.size(); ++i) src[support_[i]] = s[i];
    G.apply(src, out);
    const double c = -grid_.cell_volume() / (2.0 * pi);
    for (auto& x : out) x *= c;
}

std::vector<cplx> LsOperator::plane_wave(const Vec3& k) const
{
    std::vector<cplx> e(support_.size());
    for (std::size_t i = 0; i < support_.size(); ++i) e[i] = std::polar(1.0, dot(k, grid_.point(support_[i])));
    return e;
}

EtaSolution LsOperator::solve(const Vec3& k, int sign) const
{
    if (norm(k) == 0.0) throw Error(ErrorCode::invalid_argument, "Lippmann-Schwinger solve needs k != 0");
    if (sign != 1 && sign != -1) throw Error(ErrorCode::invalid_argument, "sign must be +1 or -1");
    EtaSolution sol{k, sign, ComplexField3D(grid_), 0.0, 0, 1.0};
    if (support_.empty()) return sol;

    const auto G = kernel(sign * norm(k));
    const std::size_t M = support_.size();
    std::vector<cplx> full;
    // b = −K V e^{ik·x} restricted to the support.
    std::vector<cplx> src = plane_wave(k);
    for (std::size_t i = 0; i < M; ++i) src[i] *= v_support_[i];
    apply_full(*G, src, full);
    std::vector<cplx> b(M);
    for (std::size_t i = 0; i < M; ++i) b[i] = full[support_[i]];

    auto A = [&](const std::vector<cplx>& x, std::vector<cplx>& y) {
        std::vector<cplx> s(M), f;
        for (std::size_t i = 0; i < M; ++i) s[i] = v_support_[i] * x[i];
        apply_full(*G, s, f);
        y.resize(M);
        // (I + K V) x with K carrying the −1/2π: f already holds −K V x.
        for (std::size_t i = 0; i < M; ++i) y[i] = x[i] - f[support_[i]];
    };
    const auto res = gmres(A, b, options_.gmres_tolerance, options_.gmres_restart, options_.max_iterations);
    sol.iterations = res.iterations;
    sol.condition = res.condition;
    if (!(res.condition <= options_.condition_limit))
        throw Error(ErrorCode::singular_system, "discretised (I + KV) is numerically singular (condition estimate " +
                                                    std::to_string(res.condition) + ")");
    if (!(res.relative_residual < std::max(options_.gmres_tolerance * 10.0, 1e-10)))
        throw Error(ErrorCode::no_convergence,
                    "GMRES stalled at relative residual " + std::to_string(res.relative_residual));

    const auto e = plane_wave(k);
    for (std::size_t i = 0; i < M; ++i) src[i] = v_support_[i] * (e[i] + res.x[i]);
    apply_full(*G, src, full);
    sol.eta.values() = std::move(full);
    sol.residual = residual(k, sign, sol.eta);
    if (sol.residual > options_.tolerance)
        throw Error(ErrorCode::no_convergence, "Lippmann-Schwinger residual " + std::to_string(sol.residual) +
                                                   " exceeds tolerance");
    return sol;
}

BornSolution LsOperator::born(const Vec3& k, int sign, std::size_t max_terms) const
{
    if (norm(k) == 0.0) throw Error(ErrorCode::invalid_argument, "Born series needs k != 0");
    BornSolution out{ComplexField3D(grid_), 0.0, 0};
    if (support_.empty()) {
        out.terms = 1;
        return out;
    }
    const auto G = kernel(sign * norm(k));
    const std::size_t M = support_.size();
    std::vector<cplx> term = plane_wave(k), sum(M, 0.0), src(M), full;
    double prev = 0.0;
    std::size_t growth = 0;
    for (std::size_t t = 0; t < max_terms; ++t) {
        for (std::size_t i = 0; i < M; ++i) src[i] = v_support_[i] * term[i];
        apply_full(*G, src, full);
        for (std::size_t i = 0; i < M; ++i) term[i] = full[support_[i]];
        const double tn = vnorm(term);
        for (std::size_t i = 0; i < M; ++i) sum[i] += term[i];
        out.terms = t + 1;
        if (t > 0) {
            out.ratio = prev > 0.0 ? tn / prev : 0.0;
            growth = out.ratio > 1.0 ? growth + 1 : 0;
            if (growth >= 3 || !std::isfinite(tn))
                throw Error(ErrorCode::divergence, "Born series terms grow (ratio " + std::to_string(out.ratio) + ")");
        }
        prev = tn;
        if (tn <= 1e-16 * vnorm(sum)) break;
    }
    const auto e = plane_wave(k);
    for (std::size_t i = 0; i < M; ++i) src[i] = v_support_[i] * (e[i] + sum[i]);
    apply_full(*G, src, full);
    out.eta.values() = std::move(full);
    return out;
}

double LsOperator::residual(const Vec3& k, int sign, const ComplexField3D& eta) const
{
    require_same_grid(eta.grid(), grid_, "Lippmann-Schwinger residual");
    if (support_.empty()) return eta.max_abs() > 0.0 ? HUGE_VAL : 0.0;
    const auto G = kernel(sign * norm(k));
    const std::size_t n = grid_.points_per_axis();
    std::mt19937_64 rng(options_.seed);
    std::uniform_int_distribution<std::size_t> pick(0, grid_.size() - 1);
    std::vector<std::size_t> targets;
    // Half the targets on the support, half anywhere on the grid.
    for (std::size_t t = 0; t < options_.residual_targets; ++t)
        targets.push_back(t % 2 == 0 ? support_[pick(rng) % support_.size()] : pick(rng));

    std::vector<cplx> src(support_.size());
    for (std::size_t i = 0; i < support_.size(); ++i) {
        const std::size_t p = support_[i];
        src[i] = v_support_[i] * (std::polar(1.0, dot(k, grid_.point(p))) + eta[p]);
    }
    const double c = -grid_.cell_volume() / (2.0 * pi);
    double worst = 0.0;
    for (std::size_t t : targets) {
        const long ti = static_cast<long>(t / (n * n)), tj = static_cast<long>((t / n) % n),
                   tl = static_cast<long>(t % n);
        cplx s = 0.0;
        for (std::size_t i = 0; i < support_.size(); ++i) {
            const std::size_t p = support_[i];
            const long pi_ = static_cast<long>(p / (n * n)), pj = static_cast<long>((p / n) % n),
                       pl = static_cast<long>(p % n);
            s += G->at(ti - pi_, tj - pj, tl - pl) * src[i];
        }
        worst = std::max(worst, std::abs(eta[t] - c * s));
    }
    const double scale = eta.max_abs();
    return scale > 0.0 ? worst / scale : worst;
}

EtaSolution ls_solve_direct(const Potential& V, const Vec3& k, int sign, const LsOptions& options)
{
    return LsOperator(V, options).solve(k, sign);
}

BornSolution ls_solve_born(const Potential& V, const Vec3& k, int sign, std::size_t max_terms,
                           const LsOptions& options)
{
    return LsOperator(V, options).born(k, sign, max_terms);
}

}  // namespace fastflux
