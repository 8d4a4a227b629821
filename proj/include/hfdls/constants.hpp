#pragma once

#include <numbers>

// CODATA 2018 values. Every energy in this library is carried as E/h in Hz.
namespace hfdls::constants {

inline constexpr double planck = 6.62607015e-34;           // J s
inline constexpr double hbar = planck / (2.0 * std::numbers::pi);
inline constexpr double speed_of_light = 299792458.0;      // m/s
inline constexpr double bohr_magneton = 9.2740100783e-24;  // J/T
inline constexpr double nuclear_magneton = 5.0507837461e-27;  // J/T

inline constexpr double bohr_magneton_hz = bohr_magneton / planck;        // Hz/T
inline constexpr double nuclear_magneton_hz = nuclear_magneton / planck;  // Hz/T

inline constexpr double pi = std::numbers::pi;

}  // namespace hfdls::constants
