#pragma once

/// @file asymptotics.hpp
/// @brief Leading-order amplitude equations near the order-disorder point
/// (m, gamma) = (0, 2).
///
/// With m = beta m*(gamma) the deviation is approximated by
///   u_bar ~ m* (a phi1 + b phi2 + c phi3),
///   phi1 = sqrt2 cos(sqrt2 x),
///   phi2 = sqrt2 cos(-x/sqrt2 + sqrt(3/2) y),
///   phi3 = sqrt2 cos(-x/sqrt2 - sqrt(3/2) y),
/// and (a, b, c) follow the gradient flow of
///   V = -3(1-beta^2)(a^2+b^2+c^2) + 6 sqrt2 beta abc
///       + 3(a^2 b^2 + b^2 c^2 + a^2 c^2) + (3/4)(a^4 + b^4 + c^4)
/// in time rescaled by (m*)^2.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "okphase/spectral.hpp"

namespace okphase {

/// m*(gamma) = sqrt((gamma - 2) / (3 gamma)); requires gamma > 2.
double odt(double gamma);
/// gamma*(m) = 2 / (1 - 3 m^2); requires 3 m^2 < 1.
double odt_inverse(double m);

struct AmplitudeState {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double beta = 0.0;
};

using Vec3 = std::array<double, 3>;

/// Right-hand side (a', b', c') of the amplitude system.
Vec3 amplitude_rhs(const AmplitudeState& s);
double lyapunov(const AmplitudeState& s);
/// (V_a, V_b, V_c).
Vec3 lyapunov_gradient(const AmplitudeState& s);
/// max |amplitude_rhs + grad V|; the amplitude system is exactly -grad V.
double gradient_consistency(const AmplitudeState& s);
/// Symmetric Hessian of V, row-major.
std::array<double, 9> lyapunov_hessian(const AmplitudeState& s);
/// Hessian eigenvalues in ascending order.
Vec3 hessian_eigs(const AmplitudeState& s);

enum class AmplitudeFamily { Disorder, Lamellae, TriangularSpots, HexSpots, ABnotC };
std::string to_string(AmplitudeFamily family);

struct FixedPoint {
  AmplitudeFamily family;
  AmplitudeState state;
  std::string note;  ///< which sign or root this representative is
};

struct FixedPointSet {
  double beta = 0.0;
  std::vector<FixedPoint> points;
  std::vector<std::string> omitted;  ///< families with no real representative at this beta
};

/// Representatives of the five stationary families at `beta` (>= 0).
/// The triangular-spots family (a = b, c = 0) is stationary only at beta = 0
/// and is omitted otherwise.
FixedPointSet fixed_points(double beta);

/// The two roots a_bar = -(sqrt2/5)(beta -/+ sqrt(5 - 4 beta^2)) of the hex
/// family; nullopt for beta > sqrt5/2.
std::optional<std::array<double, 2>> hex_amplitudes(double beta);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;  ///< +infinity for unbounded
};

struct StabilityRegions {
  Interval lamellae_linear, hex_linear, disorder_linear;
  Interval lamellae_global, hex_global, disorder_global;
};

/// Closed-form boundaries.
StabilityRegions stability_regions();

/// The six distinct thresholds in the order 1/sqrt5, 1/sqrt17, sqrt5/2, 1,
/// (1/29) sqrt(551 - 174 sqrt6), 3 sqrt(5/37).
std::array<double, 6> stability_thresholds();

/// Thresholds recovered by scanning beta over [lo, hi] with the given step,
/// from Hessian signs and Lyapunov values at the fixed points alone. Same
/// order as stability_thresholds(). Each is the midpoint of the bracketing
/// scan interval.
std::array<double, 6> scan_thresholds(double lo = 0.0, double hi = 1.3, double step = 1e-4);

/// Label of the globally stable family at beta according to the scan rule
/// (lowest V among linearly stable fixed points).
AmplitudeFamily global_minimizer(double beta);
/// Families whose representative is linearly stable at beta.
std::vector<AmplitudeFamily> linearly_stable(double beta);

struct AmplitudeTrajectory {
  std::vector<double> t;
  std::vector<AmplitudeState> states;
  std::vector<double> v;
};

/// Adaptive Dormand-Prince integration of the amplitude system on [0, T],
/// sampled at every accepted step.
AmplitudeTrajectory amplitude_flow(const AmplitudeState& s0, double t_end, double tolerance = 1e-12);

struct AnsatzLattice {
  std::array<std::array<int, 2>, 3> index;  ///< integer wavevectors of phi1..phi3
  std::array<double, 3> relative_error;     ///< |k_snapped - k_exact| / sqrt2
};

/// Wavevectors of phi1..phi3 rounded to the integer lattice of `grid`.
AnsatzLattice ansatz_lattice(const GridSpec& grid);

inline constexpr double kAnsatzTolerance = 0.02;

/// Smallest box length >= min_length carrying a lamellar period along x and
/// a hex lattice within `tolerance`.
double hex_box_length(double min_length, double tolerance = 0.005);

/// m*(gamma) (a phi1 + b phi2 + c phi3) on the grid with the snapped basis.
/// Throws std::invalid_argument if a mode with nonzero amplitude is off the
/// lattice by more than kAnsatzTolerance, or if gamma <= 2.
RealField ansatz_field(const AmplitudeState& s, double gamma, const GridSpec& grid);

/// V at each family across a beta range, with linear stability flags, as CSV:
/// beta,V_disorder,V_lamellae,V_hex_plus,V_hex_minus,V_abnotc,linear_stable,global
std::string lyapunov_landscape_csv(double lo, double hi, double step);

}  // namespace okphase
