#pragma once

#include <numbers>

// Frequencies are stored as linear MHz, times in µs. Angular rates (rad/µs)
// appear only inside formula evaluation.
namespace photonshape::units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double angular(double mhz) { return two_pi * mhz; }
constexpr double linear(double rad_per_us) { return rad_per_us / two_pi; }

}  // namespace photonshape::units
