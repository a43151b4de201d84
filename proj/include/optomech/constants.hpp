#pragma once

#include <numbers>

namespace optomech {

// CODATA 2018 exact / recommended values (SI).
namespace codata {
inline constexpr double hbar = 1.054571817e-34;      // J s
inline constexpr double k_boltzmann = 1.380649e-23;  // J/K
inline constexpr double c_light = 299792458.0;       // m/s
}  // namespace codata

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Normalization ledger.
//   X = x/x_q, P = p/p_q, [X, P] = 2i, ground state Var X = Var P = 1.
//   Optical quadratures a_j carry double-sided vacuum spectral density 1,
//   [a_1(t), a_2(t')] = 2i delta(t - t').
//   Vacuum Wigner function W(0,0) = 1/(2 pi); pure-state purity
//   4 pi * int W^2 dX dP = 1; lowest attainable W value -1/(2 pi).
namespace ledger {
inline constexpr const char* version = "optomech-ledger-1 X=x/x_q P=p/p_q [X,P]=2i";
inline constexpr double vacuum_peak = 1.0 / two_pi;
inline constexpr double wigner_floor = -1.0 / two_pi;
inline constexpr double purity_factor = 2.0 * two_pi;
}  // namespace ledger

}  // namespace optomech
