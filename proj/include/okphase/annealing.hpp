#pragma once

/// @file annealing.hpp
/// @brief Dominant-wavenumber detection, spectral reweighting toward the
/// dominant wavenumber and its harmonics, and mass-preserving noise.

#include <cstdint>
#include <optional>
#include <random>

#include "okphase/spectral.hpp"

namespace okphase {

/// Physical |k| of the largest-magnitude nonzero mode. Ties go to the smaller
/// |k|. Returns nullopt when every nonzero mode vanishes (disorder).
std::optional<double> dominant_mode(const SpectralField& v);

/// w(k) = (1 - rho) + rho * sum_{n=1..3} exp(-5 (n - k / k_star)^2).
double weight(double kmag, double k_star, double rho);

/// Multiplies every nonzero mode by weight(|k|, k_star, rho); the zero mode
/// (the mean) is left alone.
SpectralField apply_weighting(const SpectralField& v, double k_star, double rho);
void apply_weighting_in_place(SpectralField& v, double k_star, double rho);

/// Adds i.i.d. uniform noise on [-amplitude, amplitude] and removes its
/// empirical mean. The stream depends only on `seed`.
RealField inject_noise(const RealField& u_bar, double amplitude, std::uint64_t seed);

/// Uniform doubles in [0, 1) from a 64-bit Mersenne twister, mapped with the
/// top 53 bits so the sequence is identical on every standard library.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double next(double lo, double hi) { return lo + (hi - lo) * next(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace okphase
