#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "optomech/wigner_grid.hpp"

namespace optomech {

/// Sampled wavefunction of a dimensionless quadrature; sum |psi|^2 dX = 1.
struct Wavefunction1D {
    Axis grid;
    std::vector<std::complex<double>> values;

    double norm_sq() const;
    double mean() const;
    double variance() const;
    /// Moments of P = -2i d/dX (ledger convention).
    double momentum_mean() const;
    double momentum_variance() const;
    /// Cubic convolution interpolation; zero outside the grid.
    std::complex<double> operator()(double x) const;
    void normalize();
};

/// Pure Gaussian exp(-(X-m)^2/(4 Vxx) + i c (X-m)^2 + i p X / 2) with c = Vxp/(4 Vxx).
struct GaussianPacket {
    double mean_x = 0.0;
    double mean_p = 0.0;
    double var_x = 1.0;
    double cov_xp = 0.0;
};

struct Density1D {
    Axis grid;
    std::vector<double> values;
    double raw_normalization = 1.0;  // integral before the final rescaling

    double mean() const;
    double variance() const;
    /// Inverse CDF with linear interpolation between samples, u in [0, 1].
    double quantile(double u) const;
};

inline constexpr std::size_t kDefaultWavefunctionPoints = 1024;

Wavefunction1D fock_quadrature_wavefunction(int n, std::size_t points = kDefaultWavefunctionPoints);
Wavefunction1D gaussian_wavefunction(const GaussianPacket& g,
                                     std::size_t points = kDefaultWavefunctionPoints);

/// Normalized psi_o(y - kappa X) psi_m(X); re-grids onto the support of the product.
/// Throws ZeroLikelihood when the unnormalized norm falls below 1e-30.
Wavefunction1D conditional_wavefunction(const Wavefunction1D& psi_o, const Wavefunction1D& psi_m,
                                        double kappa, double y,
                                        std::size_t points = kDefaultWavefunctionPoints);

/// p(y) = int |psi_m(X)|^2 |psi_o(y - kappa X)|^2 dX.
Density1D outcome_density_y(const Wavefunction1D& psi_o, const Wavefunction1D& psi_m, double kappa,
                            std::size_t points = kDefaultWavefunctionPoints);

/// |<a|b>|^2, with b interpolated onto the grid of a.
double fidelity(const Wavefunction1D& a, const Wavefunction1D& b);

/// W(X,P) = (1/2pi) int psi*(X+xi) psi(X-xi) e^{i P xi} d xi by direct summation.
/// X samples are a decimation of the wavefunction grid; both axes span +-6 standard deviations.
WignerGrid wigner_from_wavefunction(const Wavefunction1D& psi, std::size_t x_points = 256,
                                    std::size_t p_points = 256);

}  // namespace optomech
