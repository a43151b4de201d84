#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "optomech/params.hpp"
#include "optomech/polynomial.hpp"

namespace optomech {

// Laplace convention throughout: s = -i Omega, a transfer function H(s) belongs to the
// causal kernel h(t), t >= 0, with H = int h(t) e^{-s t} dt. Causal and stable means
// every pole has Re s < 0.

/// Stationary linear model of the damped oscillator under broadband homodyne readout.
///
/// State x = (X, P) in ledger units; white inputs u = (a1, a2, xi_x, xi_p) with intensities
/// w = (1, 1, D_xx, D_pp). The bath diffusion is viscous momentum noise plus the smallest
/// position diffusion that keeps the Gaussian dynamics consistent with [X,P] = 2i; at
/// Lambda = 0 the stationary state is the thermal state of occupation n_th.
struct PlantModel {
    double omega_m = 1.0;
    double gamma_m = 1e-3;
    double Lambda = 0.0;   // measurement rate alpha x_q / hbar
    double theta = std::numbers::pi / 2.0;
    double n_th = 0.0;

    void validate() const;
    /// Readout gain in ledger units, sqrt(2) Lambda.
    double coupling() const;
    double bath_diffusion_x() const;
    double bath_diffusion_p() const;
    /// Normalized force-noise density seen by P (zero point included).
    double force_noise_density() const { return bath_diffusion_p(); }
};

PlantModel plant_from_scales(const DerivedScales& s, double theta = std::numbers::pi / 2.0);

/// dx = A x dt + B u, y = H x + delta u.
struct StateSpace {
    Eigen::Matrix2d A;
    Eigen::Matrix<double, 2, 4> B;
    Eigen::RowVector2d H;
    Eigen::RowVector4d delta;
    Eigen::Vector4d weights;
};

StateSpace state_space(const PlantModel& plant);

/// Solves A V + V A^T + Q = 0 for symmetric V.
Eigen::Matrix2d solve_lyapunov(const Eigen::Matrix2d& A, const Eigen::Matrix2d& Q);

/// weight * |p(-i Omega)|^2
struct SpectralTerm {
    double weight = 1.0;
    Polynomial p;
};

/// S(Omega) = gain * num(Omega^2) / den(Omega^2), real and even.
///
/// Optional structured forms take precedence for evaluation and factorization: a
/// sum-of-squares numerator and a known Hurwitz polynomial b(s) with den = |b(-i Omega)|^2.
/// They avoid the cancellation that expanded coefficients suffer near sharp resonances.
struct RationalSpectrum {
    Polynomial numerator;
    Polynomial denominator;
    double gain = 1.0;
    std::vector<SpectralTerm> numerator_terms;
    std::optional<Polynomial> denominator_root;

    static RationalSpectrum from_even(Polynomial num_in_w, Polynomial den_in_w, double gain = 1.0);
    static RationalSpectrum from_terms(std::vector<SpectralTerm> num, Polynomial hurwitz_den);
    double operator()(double Omega) const;
};

/// phi(s) = num(s) / den(s), both Hurwitz with real coefficients.
struct CausalFactor {
    double num_lead = 1.0;
    double den_lead = 1.0;
    std::vector<cplx> zeros;
    std::vector<cplx> poles;

    Polynomial numerator() const;
    Polynomial denominator() const;
    cplx at_s(cplx s) const;
    cplx operator()(double Omega) const { return at_s(cplx(0.0, -Omega)); }
    /// |phi|^2 as a spectrum (structured form).
    RationalSpectrum spectrum() const;
};

RationalSpectrum output_spectrum(const PlantModel& plant);
CausalFactor spectral_factorize(const RationalSpectrum& S);

/// Causal Wiener machinery of the vacuum-input record.
///
/// K(tau) (tau = -t >= 0) is kept exactly as a sum of exponentials over the mechanical poles;
/// V_c follows from the closed-loop Lyapunov equation of the innovations representation,
/// A_c = A - G H, B_c = B - G delta with G = K(0+).
struct FilterSet {
    CausalFactor whitening;  // phi; the whitening filter is 1/phi
    StateSpace model;
    std::vector<cplx> kernel_poles;
    std::vector<Eigen::Vector2cd> kernel_residues;
    Eigen::Vector2d gain;
    Eigen::Matrix2d A_closed;
    Eigen::Matrix<double, 2, 4> B_closed;
    Eigen::Matrix2d V_c;
    Eigen::Matrix2d Sigma_prior;
    double decorrelation_residual = 0.0;  // |V_c H^T + B W delta^T - G| / |G|-scale

    /// (K_x, K_p) at lag tau >= 0, i.e. K(-t) at t = -tau; zero for tau < 0.
    Eigen::Vector2d kernel(double tau) const;
    /// Laplace transform of K at s (Re s > max Re pole).
    Eigen::Vector2cd kernel_transform(cplx s) const;
    /// Smooth part of the whitening kernel, w(t) = direct delta(t) + smooth(t), t >= 0.
    double whitening_direct() const;
    double whitening_smooth(double t) const;
    /// Sigma_prior - int K K^T d tau evaluated in closed form (cancellation-prone for high Q).
    Eigen::Matrix2d projection_covariance() const;
};

FilterSet whitened_cross_kernels(const PlantModel& plant, const CausalFactor& factor);

/// f(t) = sqrt(2 gamma_f) exp((gamma_f + i omega_f) t) for t <= 0.
struct PhotonMode {
    double gamma_f = 1.0;
    double omega_f = 0.0;

    void validate() const;
    cplx rate() const { return {gamma_f, omega_f}; }
    cplx f(double t) const;
};

struct PhotonKernels {
    PhotonMode mode;
    cplx c_L;                    // L(t) = c_L f(t) for t <= 0
    Eigen::Vector2cd gamma_vec;  // [Gamma, R]
    Eigen::Vector2cd x0_commutator;  // [Gamma, x(0)]
    Eigen::Matrix2d V_L;
    double L_norm_sq = 0.0;

    cplx L(double t) const { return t <= 0.0 ? c_L * mode.f(t) : cplx(0.0); }
};

PhotonKernels photon_kernels(const PlantModel& plant, const FilterSet& filters, const PhotonMode& mode);

/// Debug table of the kernels on t <= 0: rows (t, K_x, K_p, Re L, Im L).
struct KernelTable {
    std::vector<double> t;
    std::vector<double> K_x, K_p;
    std::vector<cplx> L;
    double tail_ratio = 0.0;  // |K| at the horizon relative to its peak
};

KernelTable sample_kernels(const FilterSet& filters, const PhotonKernels& photon, double dt, std::size_t n);

/// Step and length following dt <= 1/(20 max(omega_m, gamma_f, |omega_f|)), horizon ~10 decay times
/// of the photon mode and the whitening filter, capped at max_points.
KernelTable sample_kernels_auto(const PlantModel& plant, const FilterSet& filters,
                                const PhotonKernels& photon, std::size_t max_points = 4096);

}  // namespace optomech
