#pragma once

/// @file dynamics.hpp
/// @brief The H^-1 gradient flow for the deviation u_bar = u - m,
///
///   u_bar_t = -(1/gamma^2) Lap^2 u_bar + Lap(u_bar^3 + 3 m u_bar^2 - (1 - 3 m^2) u_bar) - u_bar,
///
/// its linearization, two time steppers (ETDRK4 and an iterated implicit
/// gradient-stable step), step-size control, and natural continuation of
/// stationary states in m.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "okphase/energy.hpp"
#include "okphase/spectral.hpp"

namespace okphase {

enum class Stepper { Etdrk4, GradientStable };

std::string to_string(Stepper stepper);
Stepper stepper_from_string(const std::string& name);

struct SolverState {
  RealField u_bar;  ///< deviation from the mean, kept mean-zero
  double t = 0.0;
  double dt = 0.0;
  double gamma = 0.0;
  double m = 0.0;
  Stepper stepper = Stepper::Etdrk4;
};

/// Growth rates of the linearization about u_bar = 0:
///   lambda(k^2) = -k^4/gamma^2 + (1 - 3m^2) k^2 - 1.
struct Dispersion {
  double gamma = 0.0;
  double m = 0.0;
  double k2_opt = 0.0;      ///< gamma^2 (1 - 3m^2) / 2
  double lambda_max = 0.0;  ///< gamma^2 (1 - 3m^2)^2 / 4 - 1

  double growth_rate(double k2) const;
};

Dispersion dispersion(double gamma, double m);

/// Pseudo-spectral right-hand side (nonlinear products on the grid,
/// derivatives in Fourier space). The result has zero mean.
RealField rhs(const RealField& u_bar, double gamma, double m);
SpectralField rhs_spectral(const SpectralField& u_bar_hat, double gamma, double m);

/// Stationarity residual ||u_t||_2 (continuous L2 norm over the box).
double residual_norm(const RealField& u_bar, double gamma, double m);
double residual_norm(const SpectralField& u_bar_hat, double gamma, double m);

/// Action of the linearized right-hand side at u_bar on v:
///   -(1/gamma^2) Lap^2 v + Lap((3 u_bar^2 + 6 m u_bar - (1 - 3m^2)) v) - v.
RealField jacobian_apply(const RealField& u_bar, const RealField& v, double gamma, double m);

/// 0.1 / (1 + gamma^(3/2)).
double default_dt(double gamma);

inline constexpr double kMaxDt = 10.0;

/// Iteration-count step control for the gradient-stable scheme: more than 20
/// iterations halves dt, fewer than 5 grows it by 1.5 (capped at kMaxDt).
double adapt_dt(int iterations, double dt);

/// Fourth-order exponential time differencing (Cox-Matthews) with the full
/// linear symbol treated exactly and N(u) = Lap(u^3 + 3 m u^2) explicitly.
/// The phi-functions come from 32-point contour integrals around each
/// dt * lambda(k^2). Not thread-safe: each worker owns its integrator.
class Etdrk4 {
 public:
  struct Options {
    bool nonlinear = true;  ///< false integrates only the linear part
    bool dealias = false;   ///< 2/3-rule mask on the nonlinear term
    int contour_points = 32;
  };

  Etdrk4(GridSpec grid, double gamma, double m, double dt, Options options);
  Etdrk4(GridSpec grid, double gamma, double m, double dt) : Etdrk4(grid, gamma, m, dt, Options{}) {}

  double dt() const { return dt_; }
  const GridSpec& grid() const { return grid_; }

  /// Advances u_hat by one step. If `start` is given it receives the real
  /// field at the beginning of the step (computed anyway by the first stage).
  /// Throws NumericalError without touching u_hat when the update is not
  /// finite or blows up.
  void step(SpectralField& u_hat, RealField* start = nullptr);

 private:
  void nonlinear(const SpectralField& v, SpectralField& out, RealField* real_out);

  GridSpec grid_;
  double gamma_, m_, dt_;
  Options options_;
  std::vector<double> e_, e2_, q_, f1_, f2_, f3_, nl_mult_;
  Fft fft_;
  RealField real_scratch_;
  SpectralField nv_, na_, nb_, nc_, a_, b_, c_, next_;
};

/// One ETDRK4 step of `state` (builds a fresh integrator; use Etdrk4 directly
/// in loops).
SolverState etdrk4_step(const SolverState& state);

/// Algebraic solver for the implicit equation of a gradient-stable step.
enum class ImplicitSolver {
  FixedPoint,  ///< the stabilized fixed-point iteration below
  Newton,      ///< Newton-Krylov on w - u^n - dt rhs(w) = 0
};

struct GradientStableOptions {
  ImplicitSolver solver = ImplicitSolver::FixedPoint;
  double tolerance = 1e-10;  ///< max-norm change between fixed-point iterates
  int max_iterations = 50;   ///< fixed-point iterations
  int max_halvings = 5;
  double descent_slack = 1e-12;  ///< relative slack in the energy-descent test
  int max_newton = 12;
  int krylov_restart = 30;
  int max_krylov = 300;
  double forcing = 1e-3;  ///< relative tolerance of each linear solve
};

struct GradientStableResult {
  SolverState state;     ///< advanced state; state.dt is the step actually taken
  int iterations = 0;    ///< solver iterations of the accepted attempt
  int halvings = 0;
  bool converged = false;  ///< fixed point reached within tolerance
  double energy_before = 0.0;
  double energy_after = 0.0;
};

/// Implicit step (1 + dt k^4/gamma^2 + dt) u_hat^{n+1} = u_hat^n - dt k^2 F[N(u^{n+1})],
/// N(w) = w^3 + 3 m w^2 - (1 - 3m^2) w, solved by the stabilized fixed-point
/// iteration
///   (1 + dt k^4/gamma^2 + dt + dt A k^2) w_{j+1} = u^n - dt k^2 F[N(w_j)] + dt A k^2 w_j,
///   A = max(2, 3 max|w_j|^2 + 6 |m| max|w_j| + 1 - 3m^2).
/// A step is accepted only if E_diss does not increase; otherwise dt is
/// halved and the step retried. Throws NumericalError after max_halvings.
///
/// The fixed-point iteration contracts only while dt stays below roughly
/// 1 / lambda_max, so long relaxations use ImplicitSolver::Newton, which
/// solves the same equation (same step, same acceptance test) for any dt.
/// With Newton, `iterations` counts Newton iterations; it converges when
/// ||w - u^n - dt rhs(w)||_2 <= dt * max(1e-3 ||rhs(u^n)||_2, 1e-10).
GradientStableResult gradient_stable_step(const SolverState& state, const GradientStableOptions& options = {});

/// Checkpoint = field dump of u = u_bar + m at `path` plus key=value metadata
/// (gamma, m, t, dt, stepper, seed) at `path` + ".meta".
void write_checkpoint(const std::filesystem::path& path, const SolverState& state, unsigned long long seed);
struct Checkpoint {
  SolverState state;
  unsigned long long seed = 0;
};
Checkpoint read_checkpoint(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Continuation

struct NewtonOptions {
  double tolerance = 1e-8;       ///< on ||rhs||_2
  int max_newton = 25;
  int krylov_restart = 40;
  int max_krylov = 600;          ///< total inner iterations per linear solve
  double forcing = 1e-3;         ///< relative tolerance of each linear solve
};

struct NewtonResult {
  RealField u_bar;
  double residual = 0.0;
  int newton_iterations = 0;
  int krylov_iterations = 0;
  bool converged = false;
};

/// Matrix-free Newton-Krylov solve of rhs(u_bar) = 0 at fixed (gamma, m),
/// right-preconditioned restarted GMRES on jacobian_apply.
NewtonResult newton_solve(const RealField& u_bar, double gamma, double m, const NewtonOptions& options = {});

struct BranchPoint {
  double m = 0.0;
  RealField u_bar;
  EnergyBreakdown energy;
  double residual = 0.0;
  int newton_iterations = 0;
};

struct Branch {
  double gamma = 0.0;
  std::vector<BranchPoint> points;
  bool truncated = false;  ///< Newton failed before n_steps points were found
  std::string failure;
};

/// Natural continuation: polishes u_bar0 at m0, then steps m by dm up to
/// n_steps times, each time starting Newton from the previous solution.
/// Requires residual_norm(u_bar0) < 1e-4.
Branch continue_in_m(const RealField& u_bar0, double gamma, double m0, double dm, int n_steps,
                     const NewtonOptions& options = {});

}  // namespace okphase
