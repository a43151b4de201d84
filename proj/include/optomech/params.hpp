#pragma once

#include <optional>

namespace optomech {

/// Raw experimental parameters in SI units.
struct PhysicalParams {
    double lambda_opt = 0.0;      // optical wavelength [m]
    double finesse = 0.0;         // cavity finesse
    double mass = 0.0;            // oscillator mass [kg]
    double omega_m = 0.0;         // mechanical angular frequency [rad/s]
    double Q_m = 0.0;             // mechanical quality factor
    double temperature = 0.0;     // bath temperature [K]
    double tau = 0.0;             // pulse duration [s]
    double pump_power = 0.0;      // I_0 [W]
    std::optional<double> omega_0;  // carrier angular frequency [rad/s]; 2 pi c / lambda if empty

    double carrier_frequency() const;
};

/// Quantities derived from PhysicalParams.
struct DerivedScales {
    double x_q = 0.0;        // [m]
    double p_q = 0.0;        // [kg m/s]
    double N_gamma = 0.0;    // pump photons per pulse
    double alpha = 0.0;      // [N s^1/2]
    double kappa = 0.0;      // kick strength
    double n_th = 0.0;       // k_B T / (hbar omega_m)
    double gamma_m = 0.0;    // [rad/s]
    double Lambda = 0.0;     // alpha x_q / hbar [s^-1/2]
    double Omega_q = 0.0;    // alpha / sqrt(hbar m) [rad/s]

    double omega_m = 0.0;    // copied through for downstream plant construction
    double Q_m = 0.0;
    double tau = 0.0;
    // lambda / (finesse x_q): left side of the vacuum condition.
    double readout_ratio = 0.0;
    // sqrt(n_th / Q_m) * sqrt(omega_m tau): extra factor of the thermal condition.
    double thermal_factor = 0.0;
};

struct ConditionReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // rhs / lhs (+inf when lhs == 0 and rhs > 0)
    bool pass = false;
};

/// Throws ConfigError naming the first offending field.
void validate(const PhysicalParams& p, bool require_pump = true);

DerivedScales derive_scales(const PhysicalParams& p);

/// kappa through the coupling constant: alpha sqrt(tau) x_q / hbar.
double kappa_from_coupling(const PhysicalParams& p);
/// kappa through the photon number: 8 sqrt(2) sqrt(N_gamma) finesse x_q / lambda.
double kappa_from_photon_number(const PhysicalParams& p);

/// lambda/(F x_q) < 8 sqrt(2) sqrt(N_gamma). Passes iff kappa > 1.
ConditionReport check_vacuum_condition(const DerivedScales& s);

/// lambda/(F x_q) sqrt(n_th/Q_m) sqrt(omega_m tau) < 8 sqrt(2) sqrt(N_gamma).
ConditionReport check_thermal_condition(const DerivedScales& s);

/// Pump power at which the binding condition holds with equality; both
/// conditions pass for any larger power.
double minimal_pump_power(const PhysicalParams& p);

}  // namespace optomech
