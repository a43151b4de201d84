#include <cmath>
#include <random>

#include "approx.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "optomech/constants.hpp"
#include "optomech/errors.hpp"
#include "optomech/plant.hpp"

using namespace optomech;

namespace {

FilterSet filters_for(const PlantModel& p) { return whitened_cross_kernels(p, spectral_factorize(output_spectrum(p))); }

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

bool same_set(std::vector<cplx> a, std::vector<cplx> b, double tol) {
    if (a.size() != b.size()) return false;
    for (const cplx& z : a) {
        double best = 1e300;
        for (const cplx& w : b) best = std::min(best, std::abs(z - w));
        if (best > tol * (1.0 + std::abs(z))) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("plant validation") {
    PlantModel p;
    p.gamma_m = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.gamma_m = 2.0 * p.omega_m;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.gamma_m = 1e-3;
    p.Lambda = -1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("equilibrium covariance without readout") {
    // Thermal occupation 2n+1 up to O(gamma/omega) corrections from the minimal position diffusion.
    for (double n : {0.0, 0.5, 7.0}) {
        PlantModel p;
        p.n_th = n;
        p.gamma_m = 1e-4;
        const StateSpace ss = state_space(p);
        const Eigen::Matrix2d S = solve_lyapunov(ss.A, ss.B * ss.weights.asDiagonal() * ss.B.transpose());
        CHECK(S(0, 0) == rel(2 * n + 1).epsilon(1e-4));
        CHECK(S(1, 1) == rel(2 * n + 1).epsilon(1e-4));
        CHECK(std::abs(S(0, 1)) < 1e-4);
        CHECK(S.determinant() >= 1.0);
    }
    PlantModel p;
    p.gamma_m = 0.05;
    const StateSpace ss = state_space(p);
    const Eigen::Matrix2d S = solve_lyapunov(ss.A, ss.B * ss.weights.asDiagonal() * ss.B.transpose());
    CHECK(S(1, 1) == rel(1.0).epsilon(1e-12));
    CHECK(S(0, 1) == rel(-0.025).epsilon(1e-12));
    CHECK(S(0, 0) == rel(1.0 + 0.05 * 0.05 / 2).epsilon(1e-12));
}

TEST_CASE("output spectrum against the susceptibility form") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const PlantModel p = oracle::random_plant(seed);
        const RationalSpectrum S = output_spectrum(p);
        for (int k = 0; k < 20; ++k) {
            const double w = u(gen);
            CHECK(S(w) == rel(oracle::output_spectrum(p, w)).epsilon(1e-10));
            CHECK(S(w) == rel(S(-w)).epsilon(1e-14));
            CHECK(S(w) > 0.0);
        }
        CHECK(S(1e6) == rel(1.0).epsilon(1e-6));
    }
    PlantModel p;
    p.theta = 0.8;
    for (double w : {0.0, 0.9, 1.0, 3.0}) CHECK(output_spectrum(p)(w) == rel(1.0).epsilon(1e-14));
}

TEST_CASE("phase readout peaks at the mechanical frequency") {
    PlantModel p;
    p.gamma_m = 0.01;
    p.Lambda = 0.3;
    const RationalSpectrum S = output_spectrum(p);
    // Back-action-driven peak: 1 + 4 Lambda^4 |chi|^2 (2n+1) / (gamma stuff) evaluated by the oracle.
    CHECK(S(1.0) == rel(oracle::output_spectrum(p, 1.0)).epsilon(1e-10));
    CHECK(S(1.0) > S(0.9));
    CHECK(S(1.0) > S(1.1));
}

TEST_CASE("factorization of simple spectra") {
    const CausalFactor one = spectral_factorize(RationalSpectrum::from_even(Polynomial({1.0}), Polynomial({1.0})));
    CHECK(std::abs(one(0.7)) == rel(1.0));
    CHECK(one.zeros.empty());

    const double a = 0.5, b = 2.0;
    const CausalFactor f =
        spectral_factorize(RationalSpectrum::from_even(Polynomial({b * b, 1.0}), Polynomial({a * a, 1.0})));
    for (double w : {-3.0, 0.0, 0.4, 5.0}) {
        const cplx ref = (b - cplx(0.0, w)) / (a - cplx(0.0, w));
        // equal up to a unimodular constant, here fixed to +1 by the positive lead
        CHECK(std::abs(f(w) - ref) < 1e-12);
    }
}

TEST_CASE("random fourth-order spectra") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const cplx z(-u(gen), u(gen)), q(-u(gen), u(gen));
        const Polynomial num = Polynomial::from_roots({z, std::conj(z), -u(gen), -u(gen)}, u(gen));
        const Polynomial den = Polynomial::from_roots({q, std::conj(q), -u(gen), -u(gen)});
        const RationalSpectrum S = RationalSpectrum::from_terms({{1.0, num}}, den);
        const CausalFactor phi = spectral_factorize(S);
        for (const cplx& r : phi.zeros) CHECK(r.real() < 0.0);
        for (const cplx& r : phi.poles) CHECK(r.real() < 0.0);
        for (double w = -20.0; w <= 20.0; w += 0.37) CHECK(std::norm(phi(w)) == rel(S(w)).epsilon(1e-8));

        const CausalFactor again = spectral_factorize(phi.spectrum());
        CHECK(same_set(again.zeros, phi.zeros, 1e-8));
        CHECK(same_set(again.poles, phi.poles, 1e-8));
    }
}

TEST_CASE("real-axis zeros are rejected") {
    const RationalSpectrum S = RationalSpectrum::from_even(Polynomial({1.0, -2.0, 1.0}), Polynomial({1.0, 0.0, 1.0}));
    CHECK_THROWS(spectral_factorize(S));
}

TEST_CASE("root factor agrees with the cepstral factor") {
    for (std::uint64_t seed : {2u, 5u, 9u}) {
        const PlantModel p = oracle::random_plant(seed);
        const RationalSpectrum S = output_spectrum(p);
        const CausalFactor phi = spectral_factorize(S);
        const oracle::CepstralFactor cf = oracle::cepstral_factor([&](double w) { return S(w); }, 400.0, 1 << 18);
        for (std::size_t k = 1; k < 200; k += 13) {
            const double w = cf.dOmega * static_cast<double>(k);
            CHECK(std::abs(phi(w) - cf.phi[k]) < 1e-4 * std::abs(phi(w)));
        }
    }
}

TEST_CASE("whitened record is white") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const RationalSpectrum S = output_spectrum(oracle::random_plant(seed));
        const CausalFactor phi = spectral_factorize(S);
        for (double w = -10.0; w <= 10.0; w += 0.05) CHECK(std::abs(S(w) / std::norm(phi(w)) - 1.0) < 1e-6);
    }
}

TEST_CASE("conditional covariance against the Kalman oracle") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const PlantModel p = oracle::random_plant(seed);
        const FilterSet f = filters_for(p);
        const Eigen::Matrix2d K = oracle::kalman_covariance(p);
        CHECK(max_abs(f.V_c - K) < 1e-8 * max_abs(K));
        CHECK(f.V_c.determinant() >= 1.0 - 1e-9);
        CHECK(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(f.Sigma_prior - f.V_c).eigenvalues()(0) >= -1e-9);
        CHECK(f.decorrelation_residual < 1e-6);
        for (double tau : {0.0, 0.3, 1.7, 6.0}) {
            const Eigen::Vector2d ref = oracle::kalman_kernel(p, tau);
            CHECK((f.kernel(tau) - ref).norm() < 1e-7 * (1.0 + oracle::kalman_kernel(p, 0.0).norm()));
        }
        CHECK(f.kernel(-0.5).norm() == 0.0);
    }
}

TEST_CASE("weak readout leaves the prior untouched") {
    PlantModel p;
    p.gamma_m = 1e-3;
    p.n_th = 2.0;
    p.Lambda = 1e-7;
    const FilterSet f = filters_for(p);
    CHECK(max_abs(f.V_c - f.Sigma_prior) < 1e-9);
    CHECK(f.V_c(0, 0) == rel(5.0).epsilon(1e-3));
    CHECK(f.V_c(1, 1) == rel(5.0).epsilon(1e-3));
    CHECK(f.gain.norm() < 1e-5);
}

TEST_CASE("strong readout approaches a pure state") {
    PlantModel p;
    p.gamma_m = 1e-3;
    p.n_th = 5.0;
    double last = 1e300;
    for (double L : {0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0}) {
        p.Lambda = L;
        const double det = filters_for(p).V_c.determinant();
        CHECK(det >= 1.0 - 1e-9);
        CHECK(det < last);
        last = det;
    }
    CHECK(last < 1.001);

    // Zero-temperature bath: already pure to O(gamma^2); damping of the squeezed state keeps det near 1.
    p.n_th = 0.0;
    for (double L : {0.1, 1.0, 10.0}) {
        p.Lambda = L;
        const double det = filters_for(p).V_c.determinant();
        CHECK(det >= 1.0 - 1e-9);
        CHECK(det < 1.001);
    }
}

TEST_CASE("closed-form projection agrees for well-conditioned plants") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const FilterSet f = filters_for(oracle::random_plant(seed));
        CHECK(max_abs(f.projection_covariance() - f.V_c) < 1e-8 * max_abs(f.Sigma_prior));
    }
}

TEST_CASE("whitening kernel realizes 1/phi") {
    const PlantModel p = oracle::random_plant(4);
    const FilterSet f = filters_for(p);
    const double dt = 1e-3;
    for (double s : {0.5, 2.0}) {
        double acc = f.whitening_direct();
        for (double t = 0.5 * dt; t < 60.0; t += dt) acc += f.whitening_smooth(t) * std::exp(-s * t) * dt;
        CHECK(acc == rel((1.0 / f.whitening.at_s(s)).real()).epsilon(1e-5));
    }
}

TEST_CASE("Wiener kernel is a minimum of the reconstructed residual") {
    // Residual variance of x - sum K_k z_k dt on a discrete grid with white unit-intensity z:
    // Sigma_xx - 2 sum K_k C_k dt + sum K_k^2 dt, C_k the true cross-covariance.
    const PlantModel p = oracle::random_plant(6);
    const FilterSet f = filters_for(p);
    const double dt = 2e-3;
    const std::size_t n = 20000;
    std::vector<double> K(n), C(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double tau = (static_cast<double>(k) + 0.5) * dt;
        K[k] = f.kernel(tau)(0);
        C[k] = oracle::kalman_kernel(p, tau)(0);
    }
    auto residual = [&](const std::vector<double>& k) {
        double r = f.Sigma_prior(0, 0);
        for (std::size_t i = 0; i < n; ++i) r += (k[i] * k[i] - 2.0 * k[i] * C[i]) * dt;
        return r;
    };
    const double base = residual(K);
    std::mt19937_64 gen(17);
    std::uniform_int_distribution<std::size_t> cell(0, 3000);
    for (int t = 0; t < 10; ++t) {
        const std::size_t c = cell(gen);
        for (double eps : {0.01, -0.01}) {
            std::vector<double> q = K;
            q[c] *= 1.0 + eps;
            CHECK(residual(q) >= base);
        }
    }
}

TEST_CASE("photon mode shape") {
    const PhotonMode m{0.7, 1.3};
    double acc = 0.0;
    const double dt = 1e-4;
    for (double t = -0.5 * dt; t > -40.0; t -= dt) acc += std::norm(m.f(t)) * dt;
    CHECK(acc == rel(1.0).epsilon(1e-6));
    CHECK(m.f(0.1) == cplx(0.0));
    CHECK_THROWS_AS((PhotonMode{0.0, 1.0}.validate()), ConfigError);
}

TEST_CASE("photon seen only through the direct quadrature without readout") {
    PlantModel p;
    p.gamma_m = 0.1;
    p.Lambda = 0.0;
    const FilterSet f = filters_for(p);
    const PhotonKernels k = photon_kernels(p, f, PhotonMode{1.0, 0.5});
    CHECK(std::abs(k.c_L - cplx(0.0, 1.0)) < 1e-12);
    CHECK(k.L_norm_sq == rel(1.0));
    CHECK(k.gamma_vec.norm() < 1e-12 + k.x0_commutator.norm());
}

TEST_CASE("photon kernels on random plants and modes") {
    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const PlantModel p = oracle::random_plant(seed);
        const FilterSet f = filters_for(p);
        const PhotonMode m{u(gen), u(gen) - 1.5};
        const PhotonKernels k = photon_kernels(p, f, m);
        CHECK(std::abs(k.c_L - oracle::photon_cl(p, f.whitening, m)) < 1e-9);
        CHECK(k.L_norm_sq >= 0.0);
        CHECK(k.L_norm_sq <= 1.0 + 1e-6);
        CHECK(k.V_L.trace() == rel(k.L_norm_sq).epsilon(1e-12));
        CHECK(k.V_L(0, 1) == k.V_L(1, 0));
        CHECK(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(k.V_L).eigenvalues()(0) >= -1e-12);
        CHECK(std::abs(k.L(0.3)) == 0.0);
    }
}

TEST_CASE("kernel table") {
    PlantModel p;
    p.gamma_m = 0.2;
    p.Lambda = 0.5;
    p.n_th = 1.0;
    const FilterSet f = filters_for(p);
    const PhotonKernels k = photon_kernels(p, f, PhotonMode{1.0, 0.0});
    const KernelTable t = sample_kernels_auto(p, f, k, 1 << 14);
    REQUIRE(t.t.size() >= 2);
    CHECK(t.t.back() == 0.0);
    CHECK(t.t[1] - t.t[0] <= 1.0 / 20.0 + 1e-15);
    CHECK(t.tail_ratio < 1e-3);
    CHECK(t.K_x.back() == rel(f.gain(0)));
    CHECK(std::abs(t.L.back() - k.c_L * std::sqrt(2.0)) < 1e-12);

    const KernelTable capped = sample_kernels_auto(p, f, k, 64);
    CHECK(capped.t.size() == 64);
    CHECK(capped.tail_ratio > t.tail_ratio);
    CHECK_THROWS_AS(sample_kernels(f, k, 0.0, 10), ConfigError);
}

TEST_CASE("filters are tied to their plant") {
    const PlantModel p = oracle::random_plant(1);
    const FilterSet f = filters_for(p);
    PlantModel q = p;
    q.omega_m *= 1.1;
    CHECK_THROWS_AS(photon_kernels(q, f, PhotonMode{}), ConfigError);
}

TEST_CASE("presets condition to a state near the uncertainty bound") {
    for (const auto& [row, pump] : {std::pair{oracle::reference_large(), 100.0}, std::pair{oracle::reference_small(), 1e-7}}) {
        PhysicalParams pp = row;
        pp.pump_power = pump;
        const PlantModel p = plant_from_scales(derive_scales(pp));
        const FilterSet f = filters_for(p);
        const Eigen::Matrix2d K = oracle::kalman_covariance(p);
        CHECK(max_abs(f.V_c - K) < 1e-6 * max_abs(K));
        CHECK(f.V_c.determinant() >= 1.0 - 1e-9);
        CHECK(f.V_c.determinant() < 1.5);
    }
}
