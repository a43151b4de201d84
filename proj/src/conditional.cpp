#include "optomech/conditional.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"

namespace optomech {

namespace {

constexpr double kDenominatorFloor = 1e-12;

struct GridLayout {
    Axis x, p;
    bool automatic = true;
};

// The window spans `sigmas` of the effective covariance and, since polynomial prefactors
// fatten the tails, two extra widths of the underlying Gaussian around its own center.
GridLayout layout(const PhaseSpaceWindow& win, const Eigen::Vector2d& center, const Eigen::Matrix2d& cov,
                  const Eigen::Vector2d& base_center, const Eigen::Matrix2d& base) {
    GridLayout g;
    if (win.x_axis && win.p_axis) {
        g.x = *win.x_axis;
        g.p = *win.p_axis;
        g.automatic = false;
        return g;
    }
    if (!(win.sigmas > 0.0)) throw ConfigError("PhaseSpaceWindow.sigmas must be > 0");
    auto half = [&](int i) {
        return std::max(win.sigmas * std::sqrt(cov(i, i)),
                        (win.sigmas + 2.0) * std::sqrt(base(i, i)) + std::abs(base_center(i) - center(i)));
    };
    g.x = Axis::centered(center(0), half(0), win.nx);
    g.p = Axis::centered(center(1), half(1), win.np);
    return g;
}

WignerGrid empty_grid(const GridLayout& g) {
    WignerGrid w;
    w.x_axis = g.x;
    w.p_axis = g.p;
    w.values.assign(g.x.n * g.p.n, 0.0);
    return w;
}

void require_finite(const MeasurementOutcome& out) {
    if (!std::isfinite(out.Z.real()) || !std::isfinite(out.Z.imag()) || !out.x_c.allFinite())
        throw ConfigError("MeasurementOutcome: entries must be finite");
}

}  // namespace

// ---------------------------------------------------------------- inputs

OpticalInput OpticalInput::vacuum() { return {Kind::vacuum, {{1.0, cplx(0.0)}}}; }
OpticalInput OpticalInput::coherent(cplx zeta) { return {Kind::coherent, {{1.0, zeta}}}; }
OpticalInput OpticalInput::single_photon() { return {Kind::single_photon, {}}; }
OpticalInput OpticalInput::mixture(std::vector<std::pair<double, cplx>> parts) {
    return {Kind::coherent_mixture, std::move(parts)};
}

void OpticalInput::validate() const {
    if (kind == Kind::single_photon) return;
    if (components.empty()) throw ConfigError("OpticalInput: mixture has no components");
    double total = 0.0;
    for (const auto& [w, z] : components) {
        if (!std::isfinite(w) || w < 0.0) throw ConfigError("OpticalInput: weights must be finite and >= 0");
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw ConfigError("OpticalInput: coherent amplitudes must be finite");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("OpticalInput: weights must sum to 1");
}

// ---------------------------------------------------------------- Wigner functions

WignerGrid wigner_single_photon(const PhotonKernels& k, const FilterSet& f, const MeasurementOutcome& out,
                                const PhaseSpaceWindow& window) {
    require_finite(out);
    const Eigen::Matrix2d& V = f.V_c;
    const Eigen::Matrix2d Vinv = V.inverse();
    const double det = V.determinant();
    const Eigen::Vector2cd& g = k.gamma_vec;
    const Eigen::RowVector2cd c = g.transpose() * Vinv.cast<cplx>();
    const double gvg = (c * g.conjugate())(0).real();
    const double den = 1.0 - k.L_norm_sq + std::norm(out.Z);
    if (!(den > kDenominatorFloor))
        throw InvariantViolation("wigner_single_photon: 1 - ||L||^2 + |Z|^2 = " + std::to_string(den) +
                                 " is not positive");
    const double a = 1.0 - gvg - k.L_norm_sq;

    const Eigen::Vector2d shift = 2.0 * (std::conj(out.Z) * g).real() / den;
    const Eigen::Matrix2d second = V + 2.0 * (g * g.adjoint()).real() / den;
    const GridLayout lay = layout(window, out.x_c + shift, second - shift * shift.transpose(), out.x_c, V);
    WignerGrid w = empty_grid(lay);

    const double gauss_norm = 1.0 / (two_pi * std::sqrt(det));
    for (std::size_t i = 0; i < lay.x.n; ++i) {
        const double dx = lay.x[i] - out.x_c(0);
        for (std::size_t j = 0; j < lay.p.n; ++j) {
            const double dp = lay.p[j] - out.x_c(1);
            const double q = Vinv(0, 0) * dx * dx + 2.0 * Vinv(0, 1) * dx * dp + Vinv(1, 1) * dp * dp;
            const cplx lin = c(0) * dx + c(1) * dp + out.Z;
            w.at(i, j) = (a + std::norm(lin)) / den * gauss_norm * std::exp(-0.5 * q);
        }
    }
    if (lay.automatic) check_wigner_invariants(w);
    return w;
}

std::vector<double> mixture_posterior(const OpticalInput& input, const PhotonKernels& k, cplx Z) {
    input.validate();
    if (input.kind == OpticalInput::Kind::single_photon)
        throw ConfigError("mixture_posterior: single-photon input has no proper P-representation");
    std::vector<double> lw;
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& [w, zeta] : input.components) {
        const Eigen::Vector2d zv(zeta.real(), zeta.imag());
        const double v = w > 0.0 ? std::log(w) + 2.0 * (std::conj(zeta) * Z).real() - 2.0 * zv.dot(k.V_L * zv)
                                 : -std::numeric_limits<double>::infinity();
        lw.push_back(v);
        top = std::max(top, v);
    }
    if (!std::isfinite(top)) throw ZeroLikelihood("mixture_posterior: every component weight underflows");
    double total = 0.0;
    for (double& v : lw) {
        v = std::exp(v - top);
        total += v;
    }
    for (double& v : lw) v /= total;
    return lw;
}

WignerGrid wigner_coherent_mixture(const OpticalInput& input, const PhotonKernels& k, const FilterSet& f,
                                   const MeasurementOutcome& out, const PhaseSpaceWindow& window) {
    require_finite(out);
    const std::vector<double> post = mixture_posterior(input, k, out.Z);
    std::vector<Eigen::Vector2d> shifts;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < post.size(); ++i) {
        const cplx zeta = input.components[i].second;
        shifts.push_back(2.0 * (std::conj(zeta) * k.gamma_vec).real());
        mean += post[i] * shifts.back();
    }
    Eigen::Matrix2d cov = f.V_c;
    for (std::size_t i = 0; i < post.size(); ++i) cov += post[i] * (shifts[i] - mean) * (shifts[i] - mean).transpose();
    const GridLayout lay = layout(window, out.x_c + mean, cov, out.x_c + mean, cov);
    WignerGrid w = empty_grid(lay);

    const Eigen::Matrix2d Vinv = f.V_c.inverse();
    const double gauss_norm = 1.0 / (two_pi * std::sqrt(f.V_c.determinant()));
    for (std::size_t c = 0; c < post.size(); ++c) {
        if (post[c] == 0.0) continue;
        const Eigen::Vector2d center = out.x_c + shifts[c];
        for (std::size_t i = 0; i < lay.x.n; ++i) {
            const double dx = lay.x[i] - center(0);
            for (std::size_t j = 0; j < lay.p.n; ++j) {
                const double dp = lay.p[j] - center(1);
                const double q = Vinv(0, 0) * dx * dx + 2.0 * Vinv(0, 1) * dx * dp + Vinv(1, 1) * dp * dp;
                w.at(i, j) += post[c] * gauss_norm * std::exp(-0.5 * q);
            }
        }
    }
    if (lay.automatic) check_wigner_invariants(w);
    return w;
}

// ---------------------------------------------------------------- outcome density

OutcomeDensity::OutcomeDensity(const PhotonKernels& k) : V_(k.V_L), l_(k.L_norm_sq) {
    if (l_ > 1.0 + 1e-6) throw InvariantViolation("OutcomeDensity: ||L||^2 exceeds 1");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(V_);
    lam_ = es.eigenvalues().cwiseMax(0.0);
    U_ = es.eigenvectors();
    if (lam_(1) <= 1e-14)
        rank_ = 0;
    else if (lam_(0) <= 1e-12 * lam_(1))
        rank_ = 1;
    else
        rank_ = 2;
}

double OutcomeDensity::operator()(cplx Z) const {
    if (rank_ < 2) return 0.0;
    const Eigen::Vector2d t = U_.transpose() * Eigen::Vector2d(Z.real(), Z.imag());
    const double q = t(0) * t(0) / lam_(0) + t(1) * t(1) / lam_(1);
    return (1.0 - l_ + std::norm(Z)) * std::exp(-0.5 * q) / (two_pi * std::sqrt(lam_(0) * lam_(1)));
}

double OutcomeDensity::on_line(double t) const {
    if (rank_ != 1) return 0.0;
    return (1.0 - l_ + t * t) * std::exp(-0.5 * t * t / lam_(1)) / std::sqrt(two_pi * lam_(1));
}

cplx OutcomeDensity::axis() const { return {U_(0, 1), U_(1, 1)}; }

Eigen::Matrix2d OutcomeDensity::second_moment() const { return V_ + 2.0 * V_ * V_; }

double OutcomeDensity::integrate() const {
    if (rank_ == 0) return 1.0;
    const double a = 1.0 - l_;
    const double half = 12.0;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int n = 65; n <= 4097; n = 2 * n - 1) {
        const double h = 2.0 * half / (n - 1);
        std::vector<double> phi(n), t(n);
        for (int i = 0; i < n; ++i) {
            t[i] = -half + h * i;
            phi[i] = std::exp(-0.5 * t[i] * t[i]) / std::sqrt(two_pi);
        }
        double s = 0.0;
        if (rank_ == 1) {
            for (int i = 0; i < n; ++i) s += (a + lam_(1) * t[i] * t[i]) * phi[i];
            s *= h;
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    s += (a + lam_(0) * t[i] * t[i] + lam_(1) * t[j] * t[j]) * phi[i] * phi[j];
            s *= h * h;
        }
        if (std::abs(s - prev) < 1e-13) return s;
        prev = s;
    }
    return prev;
}

OutcomeDensity outcome_density(const PhotonKernels& k) { return OutcomeDensity(k); }

namespace {

struct SearchData {
    double a;
    double lam[2];
    int dim;
};

double neg_log_density(const gsl_vector* v, void* params) {
    const auto* d = static_cast<const SearchData*>(params);
    double poly = d->a, quad = 0.0;
    for (int i = 0; i < d->dim; ++i) {
        const double t = gsl_vector_get(v, i);
        poly += d->lam[i] * t * t;
        quad += t * t;
    }
    return -std::log(std::max(poly, 1e-300)) + 0.5 * quad;
}

std::pair<std::vector<double>, double> nelder_mead(const SearchData& data, std::vector<double> start) {
    gsl_set_error_handler_off();
    const std::size_t n = start.size();
    gsl_multimin_function fn{&neg_log_density, n, const_cast<SearchData*>(&data)};
    gsl_vector* x = gsl_vector_alloc(n);
    gsl_vector* step = gsl_vector_alloc(n);
    for (std::size_t i = 0; i < n; ++i) {
        gsl_vector_set(x, i, start[i]);
        gsl_vector_set(step, i, 0.5);
    }
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
    gsl_multimin_fminimizer_set(s, &fn, x, step);
    int status = GSL_CONTINUE;
    for (int iter = 0; iter < 5000 && status == GSL_CONTINUE; ++iter) {
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
        status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-12);
    }
    std::vector<double> best(n);
    for (std::size_t i = 0; i < n; ++i) best[i] = gsl_vector_get(s->x, i);
    const double val = s->fval;
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(step);
    gsl_vector_free(x);
    return {best, val};
}

}  // namespace

MeasurementOutcome most_probable_outcome(const PhotonKernels& k) {
    const OutcomeDensity d(k);
    MeasurementOutcome out;
    out.source = OutcomeSource::most_probable;
    if (d.rank_ == 0) return out;

    SearchData data{1.0 - d.l_, {0.0, 0.0}, d.rank_};
    std::vector<double> seed0, seed1;
    if (d.rank_ == 1) {
        data.lam[0] = d.lam_(1);
        seed0 = {0.0};
        seed1 = {1.0};
    } else {
        data.lam[0] = d.lam_(0);
        data.lam[1] = d.lam_(1);
        seed0 = {0.0, 0.0};
        seed1 = {0.0, 1.0};  // |Z| = sqrt(lambda_max) along the major axis
    }
    auto r0 = nelder_mead(data, seed0);
    auto r1 = nelder_mead(data, seed1);
    const auto& best = r1.second < r0.second ? r1.first : r0.first;

    Eigen::Vector2d zv = Eigen::Vector2d::Zero();
    if (d.rank_ == 1) {
        zv = best[0] * std::sqrt(d.lam_(1)) * d.U_.col(1);
    } else {
        zv = best[0] * std::sqrt(d.lam_(0)) * d.U_.col(0) + best[1] * std::sqrt(d.lam_(1)) * d.U_.col(1);
    }
    if (zv(0) < 0.0 || (zv(0) == 0.0 && zv(1) < 0.0)) zv = -zv;
    out.Z = cplx(zv(0), zv(1));
    return out;
}

std::vector<cplx> sample_outcomes(const PhotonKernels& k, std::uint64_t seed, std::size_t count,
                                  double* acceptance) {
    const OutcomeDensity d(k);
    std::vector<cplx> out;
    out.reserve(count);
    if (d.rank_ == 0) {
        out.assign(count, cplx(0.0));
        if (acceptance) *acceptance = 1.0;
        return out;
    }
    // Proposal t ~ N(0, 2 I) in whitened coordinates; target/proposal is proportional to
    // (a + sum lam_i t_i^2) exp(-|t|^2/4) <= (a + lam_max r) exp(-r/4), r = |t|^2.
    const double a = 1.0 - d.l_;
    const double lmax = d.lam_(1);
    const double r_star = 4.0 - a / lmax;
    const double bound = r_star > 0.0 ? (a + lmax * r_star) * std::exp(-r_star / 4.0) : a;

    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, std::numbers::sqrt2);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::size_t tries = 0;
    while (out.size() < count) {
        ++tries;
        const double t1 = normal(gen);
        const double t0 = d.rank_ == 2 ? normal(gen) : 0.0;
        const double poly = a + d.lam_(0) * t0 * t0 * (d.rank_ == 2 ? 1.0 : 0.0) + lmax * t1 * t1;
        const double ratio = poly * std::exp(-(t0 * t0 + t1 * t1) / 4.0);
        if (uniform(gen) * bound <= ratio) {
            Eigen::Vector2d zv = t1 * std::sqrt(lmax) * d.U_.col(1);
            if (d.rank_ == 2) zv += t0 * std::sqrt(d.lam_(0)) * d.U_.col(0);
            out.emplace_back(zv(0), zv(1));
        }
        if (tries >= 10000 && static_cast<double>(out.size()) < 1e-3 * static_cast<double>(tries))
            throw NumericalError("sample_outcomes: rejection acceptance below 1e-3");
    }
    if (acceptance) *acceptance = static_cast<double>(count) / static_cast<double>(std::max<std::size_t>(tries, 1));
    return out;
}

MeasurementOutcome sample_outcome(const PhotonKernels& k, std::uint64_t seed) {
    MeasurementOutcome out;
    out.Z = sample_outcomes(k, seed, 1).front();
    out.source = OutcomeSource::sampled;
    out.seed = seed;
    return out;
}

}  // namespace optomech
