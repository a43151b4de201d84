#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "optomech/plant.hpp"
#include "optomech/wigner_grid.hpp"

namespace optomech {

/// Injected optical state in the P-representation (proper mixtures) or the single photon.
struct OpticalInput {
    enum class Kind { vacuum, coherent, single_photon, coherent_mixture };
    Kind kind = Kind::vacuum;
    std::vector<std::pair<double, cplx>> components;  // (weight, zeta)

    static OpticalInput vacuum();
    static OpticalInput coherent(cplx zeta);
    static OpticalInput single_photon();
    static OpticalInput mixture(std::vector<std::pair<double, cplx>> parts);
    void validate() const;
};

enum class OutcomeSource { most_probable, sampled, explicit_value };

struct MeasurementOutcome {
    cplx Z = 0.0;
    Eigen::Vector2d x_c = Eigen::Vector2d::Zero();
    OutcomeSource source = OutcomeSource::explicit_value;
    std::uint64_t seed = 0;
};

/// Grid layout for conditional Wigner functions. Without explicit axes the grid is centered
/// on the state's mean and spans +-sigmas standard deviations of the state itself.
struct PhaseSpaceWindow {
    std::size_t nx = 256;
    std::size_t np = 256;
    double sigmas = 6.0;
    std::optional<Axis> x_axis;
    std::optional<Axis> p_axis;
};

/// Single-photon conditional Wigner function at outcome (Z, x_c).
WignerGrid wigner_single_photon(const PhotonKernels& k, const FilterSet& f, const MeasurementOutcome& out,
                                const PhaseSpaceWindow& window = {});

/// Conditional Wigner function for vacuum, coherent and proper coherent-mixture inputs.
WignerGrid wigner_coherent_mixture(const OpticalInput& input, const PhotonKernels& k, const FilterSet& f,
                                   const MeasurementOutcome& out, const PhaseSpaceWindow& window = {});

/// Posterior weights of the mixture components given Z (normalized).
std::vector<double> mixture_posterior(const OpticalInput& input, const PhotonKernels& k, cplx Z);

/// Density of the sufficient statistic Z under single-photon input:
/// w[Z] = (1 - ||L||^2 + |Z|^2) N(Z; 0, V_L).
class OutcomeDensity {
public:
    explicit OutcomeDensity(const PhotonKernels& k);

    /// 2 = full rank, 1 = supported on a line, 0 = point mass at Z = 0.
    int rank() const { return rank_; }
    double operator()(cplx Z) const;
    /// Density along the support line Z = t * axis() when rank() == 1.
    double on_line(double t) const;
    cplx axis() const;
    double L_norm_sq() const { return l_; }
    const Eigen::Vector2d& eigenvalues() const { return lam_; }
    const Eigen::Matrix2d& eigenvectors() const { return U_; }
    /// Analytic E[(Re Z, Im Z)^T (Re Z, Im Z)] = V_L + 2 V_L^2.
    Eigen::Matrix2d second_moment() const;
    /// Quadrature of w over the plane in whitened coordinates, refined until stable.
    double integrate() const;

private:
    Eigen::Matrix2d V_;
    Eigen::Matrix2d U_;
    Eigen::Vector2d lam_;
    double l_ = 0.0;
    int rank_ = 0;
    friend MeasurementOutcome most_probable_outcome(const PhotonKernels&);
    friend std::vector<cplx> sample_outcomes(const PhotonKernels&, std::uint64_t, std::size_t, double*);
};

OutcomeDensity outcome_density(const PhotonKernels& k);

/// argmax w[Z], x_c = 0. Of the two symmetric maxima the one with Re Z >= 0 is returned.
MeasurementOutcome most_probable_outcome(const PhotonKernels& k);

/// One rejection sample of w[Z] with x_c = 0.
MeasurementOutcome sample_outcome(const PhotonKernels& k, std::uint64_t seed);

/// count independent samples from one seeded stream; optionally reports the acceptance rate.
std::vector<cplx> sample_outcomes(const PhotonKernels& k, std::uint64_t seed, std::size_t count,
                                  double* acceptance = nullptr);

}  // namespace optomech
