#pragma once

/// @file energy.hpp
/// @brief Energy of the mass-constrained functional with long-range
/// interaction, its dissipated counterpart, and the per-unit-area form used to
/// pick the box size.
///
/// For u on [0, L)^2 with mean m and u_bar = u - m:
///   I1 = int |grad u|^2,  I2 = int (1 - u^2)^2 / 4,
///   I3 = int u_bar phi  with  -Lap phi = u_bar, phi mean zero.
/// The reported energy is E = I1 / gamma^2 + I2 + I3. The evolution equation
/// is the H^-1 gradient flow of
///   E_diss = I1 / (2 gamma^2) + I2 + I3 / 2,
/// which is therefore the quantity that decreases step to step.
///
/// I1 and I3 use Parseval sums (exact for band-limited fields), I2 the
/// rectangle rule.

#include <optional>

#include "okphase/spectral.hpp"

namespace okphase {

struct EnergyBreakdown {
  double i1 = 0.0;      ///< gradient integral (without the 1/gamma^2 weight)
  double i2 = 0.0;      ///< double-well integral
  double i3 = 0.0;      ///< nonlocal integral
  double paper = 0.0;   ///< I1/gamma^2 + I2 + I3
  double dissipated = 0.0;  ///< I1/(2 gamma^2) + I2 + I3/2
};

/// int v phi dx with -Lap phi = v. Requires |mean(v)| < 1e-10.
double nonlocal_energy(const RealField& v);
/// Spectral form; the zero mode of `v_hat` must vanish.
double nonlocal_energy(const SpectralField& v_hat);

/// Full breakdown for the total field u (mean must equal m within 1e-8).
EnergyBreakdown total_energy(const RealField& u, double gamma, double m);

/// Breakdown for the deviation u_bar = u - m when both its samples and its
/// spectrum are already at hand.
EnergyBreakdown deviation_energy(const RealField& u_bar, const SpectralField& u_bar_hat, double gamma, double m);
EnergyBreakdown deviation_energy(const RealField& u_bar, double gamma, double m);

/// E_diss of a mean-zero deviation u_bar.
double dissipated_energy(const RealField& u_bar, double gamma, double m);

/// L2 variation of E_diss:
///   mu = -(1/gamma^2) Lap u_bar + (u_bar + m)^3 - (u_bar + m) + (-Lap)^-1 u_bar.
RealField chemical_potential(const RealField& u_bar, double gamma, double m);

/// Integrals of the field rescaled to the unit square (I1 is scale free in
/// 2D, I2 scales with 1/L^2, I3 with 1/L^4).
struct UnitDomainIntegrals {
  double i1 = 0.0;
  double i2 = 0.0;
  double i3 = 0.0;
};
UnitDomainIntegrals to_unit_domain(const EnergyBreakdown& e, double length);

/// Energy per unit area for box length L of a unit-domain field:
///   E~ = I1 / (L^2 gamma^2) + I2 + L^2 I3.
double rescaled_energy(double length, double i1, double i2, double i3, double gamma);

struct OptimalLength {
  double length = 0.0;
  /// E~(L*) with I2 = 0; add the unit-domain I2 for the full value.
  double energy = 0.0;
};

/// L* = (I1 / (gamma^2 I3))^(1/4), the minimizer of I1/(L^2 gamma^2) + L^2 I3.
/// Returns nullopt when I3 vanishes (no finite optimum, e.g. a disordered
/// state). Throws for I1 <= 0 or negative I3.
std::optional<OptimalLength> optimal_length(double i1, double i3, double gamma);

}  // namespace okphase
