#pragma once

namespace feshpulse {

// CODATA 2018
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double bohr_magneton = 9.2740100783e-24; // J/T
inline constexpr double bohr_radius = 5.29177210903e-11;  // m

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr double sqrt_pi = 1.77245385090551602730;
inline constexpr double two_over_sqrt_pi = 1.12837916709551257390;

// 6Li atomic mass, used for default memory-time estimates
inline constexpr double mass_li6 = 9.988e-27; // kg

} // namespace feshpulse
