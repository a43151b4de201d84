#include "oracles.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <random>

namespace oracle {

using namespace optomech;

namespace {

struct Model {
    Eigen::Matrix2d A;
    Eigen::Matrix<double, 2, 4> B;
    Eigen::RowVector2d H;
    Eigen::RowVector4d delta;
    Eigen::Vector4d w;
};

Model build(const PlantModel& p) {
    const double lt = std::sqrt(2.0) * p.Lambda;
    const double m = 2.0 * p.n_th + 1.0;
    const double eps = 1.0 / (m + std::sqrt(m * m - 1.0));
    Model M;
    M.A << 0.0, p.omega_m, -p.omega_m, -p.gamma_m;
    M.B << 0, 0, 1, 0, lt, 0, 0, 1;
    M.H << std::sin(p.theta) * lt, 0.0;
    M.delta << std::cos(p.theta), std::sin(p.theta), 0, 0;
    M.w << 1.0, 1.0, eps * p.gamma_m, p.gamma_m * (2.0 * m - eps);
    return M;
}

}  // namespace

double vacuum_wigner(double x, double p) {
    return std::exp(-0.5 * (x * x + p * p)) / (2.0 * std::numbers::pi);
}

double fock1_wigner(double x, double p) {
    const double r2 = x * x + p * p;
    return (r2 - 1.0) * std::exp(-0.5 * r2) / (2.0 * std::numbers::pi);
}

double fock1_negative_volume() { return 2.0 * std::exp(-0.5) - 1.0; }

double output_spectrum(const PlantModel& p, double Om) {
    const Model M = build(p);
    const double lt = std::sqrt(2.0) * p.Lambda;
    const cplx Dn(p.omega_m * p.omega_m - Om * Om, -p.gamma_m * Om);
    const cplx chi = p.omega_m / Dn;                  // X response to a P kick
    const cplx chi_x = cplx(p.gamma_m, -Om) / Dn;     // X response to X diffusion
    const double c = std::cos(p.theta), s = std::sin(p.theta);
    return std::norm(c + s * lt * lt * chi) + s * s + s * s * lt * lt * (std::norm(chi) * M.w(3) + std::norm(chi_x) * M.w(2));
}

Eigen::Matrix2d kalman_covariance(const PlantModel& p) {
    const Model M = build(p);
    const Eigen::Matrix4d W = M.w.asDiagonal();
    const double R = (M.delta * W * M.delta.transpose())(0);
    const Eigen::Vector2d S = M.B * W * M.delta.transpose();
    const Eigen::Matrix2d Ab = M.A - S * M.H / R;
    const Eigen::Matrix2d Qb = M.B * W * M.B.transpose() - S * S.transpose() / R;
    const Eigen::Matrix2d G = M.H.transpose() * M.H / R;
    Eigen::Matrix4d Ham;
    Ham << Ab.transpose(), -G, -Qb, -Ab;
    Eigen::EigenSolver<Eigen::Matrix4d> es(Ham);
    Eigen::Matrix<cplx, 4, 2> U;
    int k = 0;
    for (int i = 0; i < 4 && k < 2; ++i)
        if (es.eigenvalues()(i).real() < 0.0) U.col(k++) = es.eigenvectors().col(i);
    const Eigen::Matrix2cd X = U.bottomRows<2>() * U.topRows<2>().inverse();
    Eigen::Matrix2d V = X.real();
    return 0.5 * (V + V.transpose());
}

Eigen::Vector2d kalman_kernel(const PlantModel& p, double tau) {
    const Model M = build(p);
    const Eigen::Matrix4d W = M.w.asDiagonal();
    const Eigen::Matrix2d V = kalman_covariance(p);
    const Eigen::Vector2d G = V * M.H.transpose() + M.B * W * M.delta.transpose();
    Eigen::EigenSolver<Eigen::Matrix2d> es(M.A);
    const Eigen::Matrix2cd P = es.eigenvectors();
    Eigen::Matrix2cd E = Eigen::Matrix2cd::Zero();
    for (int i = 0; i < 2; ++i) E(i, i) = std::exp(es.eigenvalues()(i) * tau);
    return (P * E * P.inverse() * G.cast<cplx>()).real();
}

CepstralFactor cepstral_factor(const std::function<double(double)>& S, double omega_max, std::size_t n) {
    CepstralFactor out;
    out.dOmega = 2.0 * omega_max / static_cast<double>(n);
    fftw_complex* buf = fftw_alloc_complex(n);
    fftw_plan fwd = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_plan bwd = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    for (std::size_t k = 0; k < n; ++k) {
        const double kk = k < n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
        buf[k][0] = 0.5 * std::log(S(kk * out.dOmega));  // log abs phi
        buf[k][1] = 0.0;
    }
    fftw_execute(fwd);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = (i == 0 || i == n / 2) ? 1.0 : (i < n / 2 ? 2.0 : 0.0);
        buf[i][0] *= u / static_cast<double>(n);
        buf[i][1] *= u / static_cast<double>(n);
    }
    fftw_execute(bwd);
    out.phi.resize(n);
    for (std::size_t k = 0; k < n; ++k) out.phi[k] = std::exp(cplx(buf[k][0], buf[k][1]));
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(buf);
    return out;
}

cplx photon_cl(const PlantModel& p, const CausalFactor& phi, const PhotonMode& m) {
    const Model M = build(p);
    const cplx q = m.rate();
    const Eigen::Matrix2cd res = (q * Eigen::Matrix2cd::Identity() - M.A.cast<cplx>()).inverse();
    const Eigen::Vector4cd e(1.0, cplx(0.0, 1.0), 0.0, 0.0);
    cplx acc = 0.0;
    for (int j = 0; j < 4; ++j) {
        const cplx y = M.delta(j) + (M.H.cast<cplx>() * res * M.B.col(j).cast<cplx>())(0);
        acc += e(j) * y;
    }
    return acc / phi.at_s(q);
}

ShortPulse short_pulse_setup(double kappa, double ratio) {
    ShortPulse sp;
    sp.kappa = kappa;
    sp.plant.omega_m = 1.0;
    sp.plant.gamma_m = 1e-3;
    sp.plant.n_th = 0.0;
    sp.mode = PhotonMode{ratio, 0.0};
    // int f dt = sqrt(2/gamma_f); the kick kappa equals the ledger gain times that area.
    sp.plant.Lambda = kappa * std::sqrt(ratio / 2.0) / std::sqrt(2.0);
    const Eigen::Matrix2d Vc = kalman_covariance(sp.plant);
    sp.var_x = Vc(0, 0) / (1.0 - kappa * kappa * Vc(0, 0));
    sp.cov_xp = Vc(0, 1) * (1.0 + kappa * kappa * sp.var_x);
    return sp;
}

MeasurementOutcome short_pulse_outcome(const ShortPulse& sp, double y) {
    const double den = 1.0 + sp.kappa * sp.kappa * sp.var_x;
    MeasurementOutcome out;
    out.Z = cplx(0.0, y / den);
    out.x_c << sp.var_x * sp.kappa * y / den, sp.cov_xp * sp.kappa * y / den;
    return out;
}

double minimal_pump_bisection(PhysicalParams p) {
    auto ok = [&](double I) {
        p.pump_power = I;
        const DerivedScales s = derive_scales(p);
        return check_vacuum_condition(s).pass && check_thermal_condition(s).pass;
    };
    double lo = 1e-40, hi = 1e12;
    for (int i = 0; i < 400; ++i) {
        const double mid = std::sqrt(lo * hi);
        (ok(mid) ? hi : lo) = mid;
        if (hi / lo - 1.0 < 1e-15) break;
    }
    return hi;
}

PhysicalParams reference_large() {
    PhysicalParams p;
    p.lambda_opt = 1e-6;
    p.finesse = 6000;
    p.mass = 4.0;
    p.omega_m = 2.0 * std::numbers::pi;
    p.Q_m = 1e8;
    p.temperature = 300.0;
    p.tau = 1e-3;
    return p;
}

PhysicalParams reference_small() {
    PhysicalParams p;
    p.lambda_opt = 1e-6;
    p.finesse = 1e4;
    p.mass = 1e-12;
    p.omega_m = 2.0 * std::numbers::pi * 1e5;
    p.Q_m = 1e7;
    p.temperature = 4.0;
    p.tau = 1e-5;
    return p;
}

PlantModel random_plant(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PlantModel p;
    p.omega_m = 0.5 + 1.5 * u(gen);
    p.gamma_m = p.omega_m * (0.01 + 0.5 * u(gen));
    p.Lambda = 0.05 + 2.0 * u(gen);
    p.theta = 0.3 + (std::numbers::pi - 0.6) * u(gen);
    p.n_th = 5.0 * u(gen);
    return p;
}

double brute_force_log_weight(const std::vector<double>& z, const std::vector<double>& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) s += (z[i] - m[i]) * (z[i] - m[i]);
    return -0.5 * s;
}

}  // namespace oracle
