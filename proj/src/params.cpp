#include "optomech/params.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"

namespace optomech {

namespace {

constexpr double kReadoutPrefactor = 8.0 * std::numbers::sqrt2;

void require_positive(double v, const char* name) {
    if (!std::isfinite(v) || !(v > 0.0))
        throw ConfigError(std::string("PhysicalParams.") + name + " must be finite and > 0 (got " +
                          std::to_string(v) + ")");
}

void require_non_negative(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0)
        throw ConfigError(std::string("PhysicalParams.") + name + " must be finite and >= 0 (got " +
                          std::to_string(v) + ")");
}

void require_finite(double v, const char* name) {
    if (!std::isfinite(v))
        throw NumericalError(std::string("DerivedScales.") + name + " is not finite");
}

double zero_point_position(const PhysicalParams& p) {
    return std::sqrt(codata::hbar / (2.0 * p.mass * p.omega_m));
}

double photon_number(const PhysicalParams& p) {
    return p.pump_power * p.tau / (codata::hbar * p.carrier_frequency());
}

double coupling(const PhysicalParams& p) {
    return kReadoutPrefactor * (p.finesse / p.lambda_opt) *
           std::sqrt(codata::hbar * p.pump_power / p.carrier_frequency());
}

}  // namespace

double PhysicalParams::carrier_frequency() const {
    return omega_0 ? *omega_0 : two_pi * codata::c_light / lambda_opt;
}

void validate(const PhysicalParams& p, bool require_pump) {
    require_positive(p.lambda_opt, "lambda_opt");
    require_positive(p.finesse, "finesse");
    if (p.finesse < 1.0) throw ConfigError("PhysicalParams.finesse must be >= 1");
    require_positive(p.mass, "mass");
    require_positive(p.omega_m, "omega_m");
    require_positive(p.Q_m, "Q_m");
    if (p.Q_m < 1.0) throw ConfigError("PhysicalParams.Q_m must be >= 1");
    // T = 0 and I_0 = 0 are admitted as the zero-temperature / zero-coupling limits.
    require_non_negative(p.temperature, "temperature");
    require_positive(p.tau, "tau");
    if (require_pump) require_non_negative(p.pump_power, "pump_power");
    if (p.omega_0) require_positive(*p.omega_0, "omega_0");
}

double kappa_from_coupling(const PhysicalParams& p) {
    return coupling(p) * std::sqrt(p.tau) * zero_point_position(p) / codata::hbar;
}

double kappa_from_photon_number(const PhysicalParams& p) {
    return kReadoutPrefactor * std::sqrt(photon_number(p)) * p.finesse * zero_point_position(p) /
           p.lambda_opt;
}

DerivedScales derive_scales(const PhysicalParams& p) {
    validate(p);
    DerivedScales s;
    s.x_q = zero_point_position(p);
    s.p_q = std::sqrt(codata::hbar * p.mass * p.omega_m / 2.0);
    s.N_gamma = photon_number(p);
    s.alpha = coupling(p);
    s.kappa = kappa_from_coupling(p);
    s.n_th = codata::k_boltzmann * p.temperature / (codata::hbar * p.omega_m);
    s.gamma_m = p.omega_m / p.Q_m;
    s.Lambda = s.alpha * s.x_q / codata::hbar;
    s.Omega_q = s.alpha / std::sqrt(codata::hbar * p.mass);
    s.omega_m = p.omega_m;
    s.Q_m = p.Q_m;
    s.tau = p.tau;
    s.readout_ratio = p.lambda_opt / (p.finesse * s.x_q);
    s.thermal_factor = std::sqrt(s.n_th / p.Q_m) * std::sqrt(p.omega_m * p.tau);

    require_finite(s.x_q, "x_q");
    require_finite(s.p_q, "p_q");
    require_finite(s.N_gamma, "N_gamma");
    require_finite(s.alpha, "alpha");
    require_finite(s.kappa, "kappa");
    require_finite(s.n_th, "n_th");
    require_finite(s.gamma_m, "gamma_m");
    require_finite(s.Lambda, "Lambda");
    require_finite(s.Omega_q, "Omega_q");
    require_finite(s.readout_ratio, "readout_ratio");
    require_finite(s.thermal_factor, "thermal_factor");
    if (s.x_q == 0.0 || s.p_q == 0.0)
        throw NumericalError("DerivedScales.x_q/p_q underflowed to zero");

    const double k2 = kappa_from_photon_number(p);
    const double scale = std::max(std::abs(s.kappa), std::abs(k2));
    if (scale > 0.0 && std::abs(s.kappa - k2) > 1e-12 * scale)
        throw InvariantViolation("DerivedScales.kappa: coupling and photon-number paths disagree");
    return s;
}

namespace {

ConditionReport make_report(double lhs, double rhs) {
    ConditionReport r;
    r.lhs = lhs;
    r.rhs = rhs;
    if (lhs > 0.0)
        r.margin = rhs / lhs;
    else
        r.margin = rhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    r.pass = lhs < rhs;
    return r;
}

}  // namespace

ConditionReport check_vacuum_condition(const DerivedScales& s) {
    ConditionReport r = make_report(s.readout_ratio, kReadoutPrefactor * std::sqrt(s.N_gamma));
    // The two sides are kappa's own ingredients; tie the verdict to kappa itself
    // so that the report and the kick strength can never disagree at the boundary.
    r.pass = s.kappa > 1.0;
    return r;
}

ConditionReport check_thermal_condition(const DerivedScales& s) {
    return make_report(s.readout_ratio * s.thermal_factor, kReadoutPrefactor * std::sqrt(s.N_gamma));
}

double minimal_pump_power(const PhysicalParams& p) {
    validate(p, false);
    PhysicalParams q = p;
    q.pump_power = 0.0;
    const DerivedScales s = derive_scales(q);
    const double binding = std::max(s.readout_ratio, s.readout_ratio * s.thermal_factor);
    const double n_min = binding * binding / (kReadoutPrefactor * kReadoutPrefactor);
    return n_min * codata::hbar * p.carrier_frequency() / p.tau;
}

}  // namespace optomech
