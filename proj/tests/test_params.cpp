#include <cmath>
#include <random>

#include "approx.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "optomech/constants.hpp"
#include "optomech/errors.hpp"
#include "optomech/params.hpp"

using namespace optomech;

namespace {

PhysicalParams with_pump(PhysicalParams p, double I) {
    p.pump_power = I;
    return p;
}

}  // namespace

TEST_CASE("derived scales of the large-scale row") {
    const DerivedScales s = derive_scales(with_pump(oracle::reference_large(), 1.0));
    CHECK(s.x_q == rel(1.45e-18).epsilon(0.01));
    CHECK(s.n_th == rel(6.2e12).epsilon(0.01));
    CHECK(s.x_q * s.p_q == rel(codata::hbar / 2).epsilon(1e-12));
    CHECK(s.gamma_m == rel(two_pi * 1e-8));
}

TEST_CASE("derived scales of the small-scale row") {
    const DerivedScales s = derive_scales(with_pump(oracle::reference_small(), 1e-7));
    CHECK(s.x_q == rel(9.2e-15).epsilon(0.01));
    CHECK(s.n_th == rel(8.3e5).epsilon(0.01));
    CHECK(s.x_q * s.p_q == rel(codata::hbar / 2).epsilon(1e-12));
}

TEST_CASE("zero pump gives zero coupling") {
    const DerivedScales s = derive_scales(with_pump(oracle::reference_small(), 0.0));
    CHECK(s.N_gamma == 0.0);
    CHECK(s.alpha == 0.0);
    CHECK(s.kappa == 0.0);
    const ConditionReport r = check_vacuum_condition(s);
    CHECK_FALSE(r.pass);
    CHECK(r.margin == 0.0);
}

TEST_CASE("carrier frequency defaults to 2 pi c / lambda") {
    PhysicalParams p = with_pump(oracle::reference_small(), 1e-6);
    CHECK(p.carrier_frequency() == rel(two_pi * codata::c_light / 1e-6));
    p.omega_0 = 1e15;
    CHECK(p.carrier_frequency() == 1e15);
}

TEST_CASE("invalid parameters name the field") {
    PhysicalParams p = with_pump(oracle::reference_small(), 1e-6);
    p.mass = -1.0;
    CHECK_THROWS_WITH_AS(derive_scales(p), doctest::Contains("mass"), ConfigError);
    p = with_pump(oracle::reference_small(), 1e-6);
    p.Q_m = 0.5;
    CHECK_THROWS_AS(derive_scales(p), ConfigError);
    p = with_pump(oracle::reference_small(), 1e-6);
    p.finesse = std::nan("");
    CHECK_THROWS_WITH_AS(derive_scales(p), doctest::Contains("finesse"), ConfigError);
}

TEST_CASE("overflowing inputs are rejected with the offending field") {
    PhysicalParams p = with_pump(oracle::reference_small(), 1e300);
    p.tau = 1e300;
    CHECK_THROWS_AS(derive_scales(p), NumericalError);
}

TEST_CASE("vacuum condition verdict follows kappa exactly") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> lg(-14.0, 0.0);
    for (int i = 0; i < 500; ++i) {
        const DerivedScales s = derive_scales(with_pump(oracle::reference_small(), std::pow(10.0, lg(gen))));
        CHECK(check_vacuum_condition(s).pass == (s.kappa > 1.0));
    }
    DerivedScales edge = derive_scales(with_pump(oracle::reference_small(), 1e-9));
    edge.kappa = 1.0;
    CHECK_FALSE(check_vacuum_condition(edge).pass);
}

TEST_CASE("vacuum condition at N_gamma = 1e10 on the small-scale row") {
    PhysicalParams p = oracle::reference_small();
    p.pump_power = 1e10 * codata::hbar * p.carrier_frequency() / p.tau;
    const DerivedScales s = derive_scales(p);
    CHECK(s.N_gamma == rel(1e10));
    const ConditionReport r = check_vacuum_condition(s);
    CHECK(r.rhs == rel(8.0 * std::sqrt(2.0) * 1e5));
    CHECK(r.lhs == rel(1e-6 / (1e4 * s.x_q)));
    CHECK(r.margin == rel(s.kappa));
    CHECK(r.pass == (r.lhs < r.rhs));
}

TEST_CASE("thermal condition limits") {
    PhysicalParams p = with_pump(oracle::reference_large(), 1e-20);
    p.temperature = 0.0;
    ConditionReport r = check_thermal_condition(derive_scales(p));
    CHECK(r.lhs == 0.0);
    CHECK(r.pass);
    p.temperature = 300.0;
    p.Q_m = 1e300;
    r = check_thermal_condition(derive_scales(p));
    CHECK(r.pass);
}

TEST_CASE("minimal pump power matches bisection and the boundary") {
    for (const PhysicalParams& base : {oracle::reference_large(), oracle::reference_small()}) {
        const double I = minimal_pump_power(base);
        CHECK(I == rel(oracle::minimal_pump_bisection(base)).epsilon(1e-9));
        const DerivedScales above = derive_scales(with_pump(base, I * (1 + 1e-6)));
        CHECK(check_vacuum_condition(above).pass);
        CHECK(check_thermal_condition(above).pass);
        const DerivedScales below = derive_scales(with_pump(base, I * (1 - 1e-6)));
        CHECK_FALSE((check_vacuum_condition(below).pass && check_thermal_condition(below).pass));
    }
}

TEST_CASE("large-scale row is bound by the thermal condition, small-scale by readout") {
    const DerivedScales L = derive_scales(with_pump(oracle::reference_large(), 1.0));
    const DerivedScales S = derive_scales(with_pump(oracle::reference_small(), 1.0));
    CHECK(check_thermal_condition(L).lhs > check_vacuum_condition(L).lhs);
    CHECK(check_thermal_condition(S).lhs < check_vacuum_condition(S).lhs);
    CHECK(minimal_pump_power(oracle::reference_large()) == rel(8.0).epsilon(0.1));
    // kappa = 2.325 at 1e-7 W and kappa scales as sqrt(I): readout needs 1e-7 / 2.325^2 W.
    CHECK(minimal_pump_power(oracle::reference_small()) == rel(1e-7 / (2.3254 * 2.3254)).epsilon(1e-3));
}

TEST_CASE("doubling lambda at fixed carrier quadruples the readout-bound power") {
    PhysicalParams p = oracle::reference_small();
    p.omega_0 = 1.8e15;
    const double I1 = minimal_pump_power(p);
    p.lambda_opt *= 2.0;
    CHECK(minimal_pump_power(p) == rel(4.0 * I1).epsilon(1e-12));
}

TEST_CASE("kappa is monotone in pump power, tau, finesse and wavelength") {
    const PhysicalParams base = with_pump(oracle::reference_small(), 1e-8);
    double prev = 0.0;
    for (double I = 1e-12; I < 1e-2; I *= 3.0) {
        const double k = derive_scales(with_pump(base, I)).kappa;
        CHECK(k > prev);
        prev = k;
    }
    prev = 0.0;
    for (double tau = 1e-7; tau < 1e-2; tau *= 3.0) {
        PhysicalParams p = base;
        p.tau = tau;
        const double k = derive_scales(p).kappa;
        CHECK(k > prev);
        prev = k;
    }
    prev = 0.0;
    for (double F = 1.0; F < 1e6; F *= 3.0) {
        PhysicalParams p = base;
        p.finesse = F;
        const double k = derive_scales(p).kappa;
        CHECK(k > prev);
        prev = k;
    }
    prev = INFINITY;
    for (double lam = 1e-7; lam < 1e-4; lam *= 1.7) {
        PhysicalParams p = base;
        p.lambda_opt = lam;
        const double k = derive_scales(p).kappa;
        CHECK(k < prev);
        prev = k;
    }
}
