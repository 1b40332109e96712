#include "okphase/annealing.hpp"

#include <cmath>
#include <stdexcept>

namespace okphase {

std::optional<double> dominant_mode(const SpectralField& v) {
  const int n = v.n();
  const int h = v.grid().half();
  double best_mag = 0.0;
  double best_k2 = 0.0;
  for (int ix = 0; ix < n; ++ix) {
    for (int jy = 0; jy < h; ++jy) {
      if (ix == 0 && jy == 0) continue;
      const double mag = std::abs(v.at(ix, jy));
      const double k2 = v.k_squared(ix, jy);
      // Magnitudes equal to rounding are treated as ties.
      const double tie = 1e-12 * best_mag;
      if (mag > best_mag + tie || (mag >= best_mag - tie && mag > 0.0 && k2 < best_k2)) {
        best_mag = mag;
        best_k2 = k2;
      }
    }
  }
  if (best_mag == 0.0) return std::nullopt;
  return std::sqrt(best_k2);
}

double weight(double kmag, double k_star, double rho) {
  if (!(k_star > 0.0)) throw std::invalid_argument("weight: k_star must be positive");
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("weight: rho must lie in [0, 1)");
  const double r = kmag / k_star;
  double bumps = 0.0;
  for (int harmonic = 1; harmonic <= 3; ++harmonic) {
    const double d = harmonic - r;
    bumps += std::exp(-5.0 * d * d);
  }
  return (1.0 - rho) + rho * bumps;
}

void apply_weighting_in_place(SpectralField& v, double k_star, double rho) {
  if (rho == 0.0) return;
  const int n = v.n();
  const int h = v.grid().half();
  for (int ix = 0; ix < n; ++ix) {
    for (int jy = 0; jy < h; ++jy) {
      if (ix == 0 && jy == 0) continue;
      v.at(ix, jy) *= weight(std::sqrt(v.k_squared(ix, jy)), k_star, rho);
    }
  }
}

SpectralField apply_weighting(const SpectralField& v, double k_star, double rho) {
  SpectralField out = v;
  apply_weighting_in_place(out, k_star, rho);
  return out;
}

RealField inject_noise(const RealField& u_bar, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0.0)) throw std::invalid_argument("inject_noise: amplitude must be non-negative");
  if (amplitude == 0.0) return u_bar;
  RealField noise(u_bar.grid());
  UniformStream stream(seed);
  for (double& x : noise.values()) x = stream.next(-amplitude, amplitude);
  noise += -noise.mean();
  RealField out = u_bar;
  out += noise;
  return out;
}

}  // namespace okphase
