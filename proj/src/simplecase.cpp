#include "optomech/simplecase.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"

namespace optomech {

using cplx = std::complex<double>;

namespace {

constexpr double kCoverSigmas = 8.0;
constexpr double kWignerSigmas = 6.0;
constexpr double kZeroLikelihood = 1e-30;

// Keys cubic convolution kernel, a = -1/2.
double keys(double t) {
    t = std::abs(t);
    if (t < 1.0) return (1.5 * t - 2.5) * t * t + 1.0;
    if (t < 2.0) return ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0;
    return 0.0;
}

template <class T>
T interpolate(const Axis& ax, const std::vector<T>& v, double x) {
    if (!(x >= ax.start && x <= ax.back())) return T(0.0);
    const double t = (x - ax.start) / ax.step;
    const auto i0 = static_cast<long>(std::floor(t));
    T acc(0.0);
    for (long i = i0 - 1; i <= i0 + 2; ++i) {
        if (i < 0 || i >= static_cast<long>(ax.n)) continue;
        acc += v[static_cast<std::size_t>(i)] * keys(t - static_cast<double>(i));
    }
    return acc;
}

Wavefunction1D sample(const Axis& ax, auto&& f) {
    Wavefunction1D w;
    w.grid = ax;
    w.values.resize(ax.n);
    for (std::size_t i = 0; i < ax.n; ++i) w.values[i] = f(ax[i]);
    return w;
}

void require_points(std::size_t n) {
    if (n < 16) throw ConfigError("wavefunction grids need at least 16 points");
}

}  // namespace

double Wavefunction1D::norm_sq() const {
    double s = 0.0;
    for (const cplx& v : values) s += std::norm(v);
    return s * grid.step;
}

double Wavefunction1D::mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += grid[i] * std::norm(values[i]);
    return s * grid.step / norm_sq();
}

double Wavefunction1D::variance() const {
    const double m = mean();
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = grid[i] - m;
        s += d * d * std::norm(values[i]);
    }
    return s * grid.step / norm_sq();
}

namespace {

std::vector<cplx> derivative(const Wavefunction1D& w) {
    const std::size_t n = w.values.size();
    std::vector<cplx> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx lo = i > 0 ? w.values[i - 1] : cplx(0.0);
        const cplx hi = i + 1 < n ? w.values[i + 1] : cplx(0.0);
        d[i] = (hi - lo) / (2.0 * w.grid.step);
    }
    return d;
}

}  // namespace

double Wavefunction1D::momentum_mean() const {
    const auto d = derivative(*this);
    cplx s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += std::conj(values[i]) * d[i];
    return (cplx(0.0, -2.0) * s).real() * grid.step / norm_sq();
}

double Wavefunction1D::momentum_variance() const {
    const auto d = derivative(*this);
    double s = 0.0;
    for (const cplx& v : d) s += std::norm(v);
    const double m = momentum_mean();
    return 4.0 * s * grid.step / norm_sq() - m * m;
}

cplx Wavefunction1D::operator()(double x) const { return interpolate(grid, values, x); }

void Wavefunction1D::normalize() {
    const double n = std::sqrt(norm_sq());
    if (!(n > 0.0)) throw ZeroLikelihood("Wavefunction1D: cannot normalize a null state");
    for (cplx& v : values) v /= n;
}

double Density1D::mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += grid[i] * values[i];
    return s * grid.step;
}

double Density1D::variance() const {
    const double m = mean();
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += (grid[i] - m) * (grid[i] - m) * values[i];
    return s * grid.step;
}

double Density1D::quantile(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        const double cell = 0.5 * (values[i] + values[i + 1]) * grid.step;
        if (acc + cell >= u && cell > 0.0) return grid[i] + grid.step * (u - acc) / cell;
        acc += cell;
    }
    return grid.back();
}

Wavefunction1D fock_quadrature_wavefunction(int n, std::size_t points) {
    require_points(points);
    if (n != 0 && n != 1)
        throw ConfigError("fock_quadrature_wavefunction: only n = 0 and n = 1 are supported");
    const double norm0 = std::pow(two_pi, -0.25);
    const double half = kCoverSigmas * std::sqrt(2.0 * n + 1.0);
    auto w = sample(Axis::centered(0.0, half, points), [&](double a) {
        const double g = norm0 * std::exp(-a * a / 4.0);
        return cplx(n == 0 ? g : a * g);
    });
    w.normalize();
    return w;
}

Wavefunction1D gaussian_wavefunction(const GaussianPacket& g, std::size_t points) {
    require_points(points);
    if (!(g.var_x > 0.0) || !std::isfinite(g.var_x))
        throw ConfigError("gaussian_wavefunction: var_x must be positive");
    const double chirp = g.cov_xp / (4.0 * g.var_x);
    auto w = sample(Axis::centered(g.mean_x, kCoverSigmas * std::sqrt(g.var_x), points), [&](double x) {
        const double d = x - g.mean_x;
        return std::exp(cplx(-d * d / (4.0 * g.var_x), chirp * d * d + 0.5 * g.mean_p * x));
    });
    w.normalize();
    return w;
}

Wavefunction1D conditional_wavefunction(const Wavefunction1D& psi_o, const Wavefunction1D& psi_m,
                                        double kappa, double y, std::size_t points) {
    require_points(points);
    if (!(kappa >= 0.0) || !std::isfinite(kappa))
        throw ConfigError("conditional_wavefunction: kappa must be finite and >= 0");
    if (!std::isfinite(y)) throw ConfigError("conditional_wavefunction: y must be finite");

    if (kappa == 0.0) {
        const double lik = std::norm(psi_o(y)) * psi_m.norm_sq();
        if (lik < kZeroLikelihood)
            throw ZeroLikelihood("conditional_wavefunction: psi_o(y) vanishes (zero-likelihood outcome)");
        Wavefunction1D out = psi_m;
        out.normalize();
        return out;
    }

    double lo = std::max(psi_m.grid.start, (y - psi_o.grid.back()) / kappa);
    double hi = std::min(psi_m.grid.back(), (y - psi_o.grid.start) / kappa);
    if (!(hi > lo))
        throw ZeroLikelihood("conditional_wavefunction: supports do not overlap (zero-likelihood outcome)");
    const double support_lo = lo, support_hi = hi;

    Wavefunction1D out;
    for (int pass = 0; pass < 4; ++pass) {
        out = sample(Axis::centered(0.5 * (lo + hi), 0.5 * (hi - lo), points),
                     [&](double x) { return psi_o(y - kappa * x) * psi_m(x); });
        const double n2 = out.norm_sq();
        if (!(n2 >= kZeroLikelihood))
            throw ZeroLikelihood("conditional_wavefunction: product norm " + std::to_string(n2) +
                                 " below 1e-30 (zero-likelihood outcome)");
        const double m = out.mean(), s = std::sqrt(out.variance());
        const double nlo = std::max(support_lo, m - kCoverSigmas * s);
        const double nhi = std::min(support_hi, m + kCoverSigmas * s);
        const bool stable = std::abs(nlo - lo) < 0.05 * (hi - lo) && std::abs(nhi - hi) < 0.05 * (hi - lo);
        if (stable && pass > 0) break;
        lo = nlo;
        hi = nhi;
    }
    out.normalize();
    return out;
}

Density1D outcome_density_y(const Wavefunction1D& psi_o, const Wavefunction1D& psi_m, double kappa,
                            std::size_t points) {
    require_points(points);
    if (!(kappa >= 0.0) || !std::isfinite(kappa))
        throw ConfigError("outcome_density_y: kappa must be finite and >= 0");
    const double var_o = psi_o.variance(), var_m = psi_m.variance();
    const double mean_y = psi_o.mean() + kappa * psi_m.mean();
    const double sigma_y = std::sqrt(var_o + kappa * kappa * var_m);

    Density1D d;
    d.grid = Axis::centered(mean_y, kCoverSigmas * sigma_y, points);
    d.values.resize(points);
    const bool over_optical = kappa > 0.0 && kappa * std::sqrt(var_m) >= std::sqrt(var_o);
    for (std::size_t k = 0; k < points; ++k) {
        const double y = d.grid[k];
        double acc = 0.0;
        if (kappa == 0.0) {
            acc = std::norm(psi_o(y));
        } else if (over_optical) {
            for (std::size_t i = 0; i < psi_o.grid.n; ++i) {
                const double a = psi_o.grid[i];
                acc += std::norm(psi_o.values[i]) * std::norm(psi_m((y - a) / kappa));
            }
            acc *= psi_o.grid.step / kappa;
        } else {
            for (std::size_t i = 0; i < psi_m.grid.n; ++i) {
                const double x = psi_m.grid[i];
                acc += std::norm(psi_m.values[i]) * std::norm(psi_o(y - kappa * x));
            }
            acc *= psi_m.grid.step;
        }
        d.values[k] = acc;
    }
    double total = 0.0;
    for (double v : d.values) total += v;
    total *= d.grid.step;
    d.raw_normalization = total;
    if (!(std::abs(total - 1.0) < 1e-3))
        throw NumericalError("outcome_density_y: quadrature normalization " + std::to_string(total) +
                             "; refine the input grids");
    for (double& v : d.values) v /= total;
    return d;
}

double fidelity(const Wavefunction1D& a, const Wavefunction1D& b) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.grid.n; ++i) s += std::conj(a.values[i]) * b(a.grid[i]);
    s *= a.grid.step;
    return std::norm(s) / (a.norm_sq() * b.norm_sq());
}

WignerGrid wigner_from_wavefunction(const Wavefunction1D& psi, std::size_t x_points,
                                    std::size_t p_points) {
    if (x_points < 2 || p_points < 2) throw ConfigError("wigner_from_wavefunction: grid too small");
    const double n2 = psi.norm_sq();
    if (std::abs(n2 - 1.0) > 1e-6)
        throw ConfigError("wigner_from_wavefunction: input must be normalized (norm^2 = " +
                          std::to_string(n2) + ")");
    const Axis& g = psi.grid;
    const double mx = psi.mean(), sx = std::sqrt(psi.variance());
    const double mp = psi.momentum_mean(), sp = std::sqrt(psi.momentum_variance());

    // X samples: every stride-th point of the wavefunction grid inside mean +- 6 sigma, widened
    // to wherever |psi|^2 is still above 1e-14 of its peak (multi-lobed states have long tails).
    const double t_lo = std::max(0.0, std::ceil((mx - kWignerSigmas * sx - g.start) / g.step));
    const double t_hi = std::min(static_cast<double>(g.n - 1), std::floor((mx + kWignerSigmas * sx - g.start) / g.step));
    auto i_lo = static_cast<std::size_t>(t_lo), i_hi = static_cast<std::size_t>(t_hi);
    double peak = 0.0;
    for (const cplx& v : psi.values) peak = std::max(peak, std::norm(v));
    for (std::size_t i = 0; i < g.n; ++i)
        if (std::norm(psi.values[i]) > 1e-14 * peak) {
            i_lo = std::min(i_lo, i);
            i_hi = std::max(i_hi, i);
        }
    const std::size_t span = i_hi - i_lo;
    const std::size_t stride = std::max<std::size_t>(1, span / (x_points - 1));
    const std::size_t nx = std::min(x_points, span / stride + 1);
    const std::size_t first = i_lo + (span - (nx - 1) * stride) / 2;

    const double alias_half_period = pi / g.step;
    const double p_half = kWignerSigmas * sp;
    if (std::abs(mp) + p_half >= alias_half_period)
        throw NumericalError("wigner_from_wavefunction: momentum spread exceeds the grid's alias band; use a grid step below " +
                             std::to_string(pi / (std::abs(mp) + p_half)));

    WignerGrid w;
    w.x_axis = Axis{g[first], g.step * static_cast<double>(stride), nx};
    w.p_axis = Axis::centered(mp, p_half, p_points);
    w.values.assign(nx * p_points, 0.0);

    std::vector<cplx> corr;
    std::vector<cplx> rot(p_points), ph(p_points);
    for (std::size_t j = 0; j < p_points; ++j) rot[j] = std::polar(1.0, w.p_axis[j] * g.step);

    for (std::size_t a = 0; a < nx; ++a) {
        const std::size_t i = first + a * stride;
        const std::size_t kmax = std::min(i, g.n - 1 - i);
        corr.resize(kmax + 1);
        for (std::size_t k = 0; k <= kmax; ++k) corr[k] = std::conj(psi.values[i + k]) * psi.values[i - k];
        std::fill(ph.begin(), ph.end(), cplx(1.0));
        std::vector<double> acc(p_points, 0.0);
        for (std::size_t k = 1; k <= kmax; ++k) {
            for (std::size_t j = 0; j < p_points; ++j) {
                ph[j] *= rot[j];
                acc[j] += (corr[k] * ph[j]).real();
            }
        }
        for (std::size_t j = 0; j < p_points; ++j)
            w.at(a, j) = g.step / two_pi * (corr[0].real() + 2.0 * acc[j]);
    }

    const double drift = std::abs(w.integral() - 1.0);
    if (drift > 1e-4)
        throw NumericalError("wigner_from_wavefunction: normalization drift " + std::to_string(drift) +
                             "; use at least " + std::to_string(2 * g.n) + " wavefunction points");
    return w;
}

}  // namespace optomech
