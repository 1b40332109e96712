#pragma once

/// @file classify.hpp
/// @brief Pattern labels from the angular distribution of spectral weight
/// on the ring |k| = k* of the dominant wavenumber:
///   g(theta) = sum_k exp(-|k - k* (sin theta, cos theta)|^2 / eps) |v_k|.
/// Two peaks mean stripes, four a square lattice of spots, six a hexagonal
/// one.

#include <string>
#include <vector>

#include "okphase/spectral.hpp"

namespace okphase {

enum class PhaseLabel { Disorder, Lamellae, HexSpots, SquareSpots, Mixed };

std::string to_string(PhaseLabel label);
PhaseLabel phase_label_from_string(const std::string& name);

inline constexpr int kAngularSamples = 720;
inline constexpr double kPeakFraction = 0.5;
/// Below this mean square of the deviation the field counts as uniform.
inline constexpr double kDisorderPower = 1e-8;

/// g at theta_i = 2 pi i / samples.
std::vector<double> angular_spectrum(const SpectralField& v, double k_star, double eps,
                                     int samples = kAngularSamples);

/// Local maxima of the periodic sequence above fraction * max(g); a run of
/// equal values counts once. A constant sequence has no peaks.
int count_peaks(const std::vector<double>& g, double fraction = kPeakFraction);

struct Classification {
  PhaseLabel label = PhaseLabel::Disorder;
  int peaks = 0;
  double k_star = 0.0;
};

/// eps = (0.2 k*)^2.
Classification classify(const SpectralField& u_bar_hat);
Classification classify(const RealField& u_bar);

}  // namespace okphase
