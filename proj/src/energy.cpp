#include "okphase/energy.hpp"

#include <cmath>
#include <stdexcept>

namespace okphase {

namespace {

void require_mean_zero(double mean, const char* what) {
  if (!(std::abs(mean) < 1e-10)) {
    throw std::invalid_argument(std::string(what) + ": field must have zero mean (mass constraint violated)");
  }
}

/// sum_k |k|^2 |v_k|^2 and sum_{k != 0} |v_k|^2 / |k|^2 over the full spectrum.
struct SpectralSums {
  double gradient = 0.0;
  double inverse_laplacian = 0.0;
};

SpectralSums spectral_sums(const SpectralField& v) {
  SpectralSums s;
  const int n = v.n();
  const int h = v.grid().half();
  for (int ix = 0; ix < n; ++ix) {
    for (int jy = 0; jy < h; ++jy) {
      if (ix == 0 && jy == 0) continue;
      const double k2 = v.k_squared(ix, jy);
      const double p = v.multiplicity(jy) * std::norm(v.at(ix, jy));
      s.gradient += k2 * p;
      s.inverse_laplacian += p / k2;
    }
  }
  return s;
}

double double_well(const RealField& u_bar, double m) {
  double sum = 0.0;
  for (double v : u_bar.values()) {
    const double u = v + m;
    const double w = 1.0 - u * u;
    sum += w * w;
  }
  return 0.25 * sum * u_bar.grid().cell_area();
}

}  // namespace

double nonlocal_energy(const SpectralField& v_hat) {
  if (std::abs(v_hat.zero_mode()) > 1e-10) {
    throw std::invalid_argument("nonlocal_energy: nonzero mean (mass constraint violated)");
  }
  return v_hat.grid().area() * spectral_sums(v_hat).inverse_laplacian;
}

double nonlocal_energy(const RealField& v) {
  require_mean_zero(v.mean(), "nonlocal_energy");
  return nonlocal_energy(forward(v));
}

EnergyBreakdown deviation_energy(const RealField& u_bar, const SpectralField& u_bar_hat, double gamma, double m) {
  const double area = u_bar.grid().area();
  const SpectralSums s = spectral_sums(u_bar_hat);
  EnergyBreakdown e;
  e.i1 = area * s.gradient;
  e.i2 = double_well(u_bar, m);
  e.i3 = area * s.inverse_laplacian;
  const double g2 = gamma * gamma;
  e.paper = e.i1 / g2 + e.i2 + e.i3;
  e.dissipated = 0.5 * e.i1 / g2 + e.i2 + 0.5 * e.i3;
  return e;
}

EnergyBreakdown deviation_energy(const RealField& u_bar, double gamma, double m) {
  require_mean_zero(u_bar.mean(), "deviation_energy");
  return deviation_energy(u_bar, forward(u_bar), gamma, m);
}

EnergyBreakdown total_energy(const RealField& u, double gamma, double m) {
  const double mean = u.mean();
  if (!(std::abs(mean - m) < 1e-8)) {
    throw std::invalid_argument("total_energy: mean of u differs from m (mass constraint violated)");
  }
  RealField u_bar = u;
  u_bar += -m;
  SpectralField hat = forward(u_bar);
  // The residual mean (< 1e-8) carries no gradient or nonlocal energy.
  hat.set_zero_mode(0.0);
  return deviation_energy(u_bar, hat, gamma, m);
}

double dissipated_energy(const RealField& u_bar, double gamma, double m) {
  return deviation_energy(u_bar, gamma, m).dissipated;
}

RealField chemical_potential(const RealField& u_bar, double gamma, double m) {
  require_mean_zero(u_bar.mean(), "chemical_potential");
  const double g2 = gamma * gamma;
  SpectralField hat = forward(u_bar);
  hat.set_zero_mode(0.0);
  // Linear part: (|k|^2 / gamma^2 + 1/|k|^2) u_hat.
  SpectralField linear =
      apply_multiplier(hat, [g2](double k2) { return k2 / g2 + 1.0 / k2; }, ZeroMode::Pin);
  RealField mu = inverse(linear);
  auto out = mu.values();
  auto in = u_bar.values();
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double u = in[k] + m;
    out[k] += u * u * u - u;
  }
  return mu;
}

UnitDomainIntegrals to_unit_domain(const EnergyBreakdown& e, double length) {
  const double l2 = length * length;
  return {e.i1, e.i2 / l2, e.i3 / (l2 * l2)};
}

double rescaled_energy(double length, double i1, double i2, double i3, double gamma) {
  if (!(length > 0.0)) throw std::invalid_argument("rescaled_energy: box length must be positive");
  const double l2 = length * length;
  return i1 / (l2 * gamma * gamma) + i2 + l2 * i3;
}

std::optional<OptimalLength> optimal_length(double i1, double i3, double gamma) {
  if (!(i1 > 0.0)) throw std::invalid_argument("optimal_length: I1 must be positive");
  if (i3 < 0.0) throw std::invalid_argument("optimal_length: I3 must be non-negative");
  if (i3 == 0.0) return std::nullopt;
  const double length = std::pow(i1 / (gamma * gamma * i3), 0.25);
  return OptimalLength{length, rescaled_energy(length, i1, 0.0, i3, gamma)};
}

}  // namespace okphase
