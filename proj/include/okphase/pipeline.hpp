#pragma once

/// @file pipeline.hpp
/// @brief The annealed minimization protocol for one (gamma, m), the box-size
/// refit, and phase-diagram sweeps.
///
/// Protocol for one run:
///  1. L = 12 pi (2 / gamma)^(1/3).
///  2. u_bar uniform random in [-1 - m, 1 - m], shifted to zero mean.
///  3. ETDRK4 to t1.
///  4. ETDRK4 with spectral weighting after every step to t2.
///  5. Noise injected once at t2, ETDRK4 to t3.
///  6. Gradient-stable steps with adaptive dt to t4.
///  7. Box refit to the optimal length.
///  8. Gradient-stable steps to t5 or until ||u_t||_2 < residual_tol, with
///     periodic Newton-Krylov attempts to finish the final approach.
///  9. Classification.
/// The run returns the state of lowest energy density seen, not necessarily
/// the last one. States are ranked by E_diss / L^2, the energy the flow
/// decreases; records report E_paper of the chosen state.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "okphase/classify.hpp"
#include "okphase/dynamics.hpp"
#include "okphase/energy.hpp"
#include "okphase/field_io.hpp"

namespace okphase {

struct Schedule {
  double t1 = 40.0;
  double t2 = 80.0;
  double t3 = 90.0;
  double t4 = 100.0;
  double t5 = 2500.0;
  double residual_tol = 1e-8;
  double rho = 0.1;
  double noise_amplitude_factor = 0.05;

  /// Throws std::invalid_argument unless 0 < t1 < t2 < t3 < t4 <= t5,
  /// residual_tol > 0, 0 <= rho < 1 and the noise factor is non-negative.
  void validate() const;
};

struct RunOptions {
  int n = 128;
  Schedule schedule;
  /// Box length; defaults to protocol_length(gamma).
  std::optional<double> length;
  /// Initial deviation; defaults to the seeded uniform field of step 2.
  std::optional<RealField> initial;
  /// Stepper for phases 6 to 8 (and the refit settling window).
  Stepper relaxation = Stepper::GradientStable;
  bool refit = true;
  /// Repeat the refit while it keeps lowering the energy density (at most 5 times).
  bool repeat_refit = false;
  double settle_time = 5.0;
  /// Phase 8 pauses every polish_interval time units; if the residual is
  /// below polish_threshold a Newton-Krylov solve finishes the run when it
  /// converges without raising the energy density. 0 disables the polish.
  double polish_interval = 250.0;
  double polish_threshold = 1e-5;
  bool dealias = false;
  /// Time between rows of the energy trace; 0 records every step.
  double trace_interval = 1.0;
  /// Stop (flagged, not aborted) once this much wall time has been spent.
  double max_wall_s = std::numeric_limits<double>::infinity();
  /// Per-run output directory; empty writes nothing.
  std::filesystem::path out_dir;
};

struct TracePoint {
  double t = 0.0;
  double length = 0.0;
  EnergyBreakdown energy;
};

struct RunRecord {
  double gamma = 0.0;
  double m = 0.0;
  std::uint64_t seed = 0;
  Schedule schedule;
  int n = 0;

  Classification classification;
  EnergyBreakdown energy;     ///< of the best state, in its own box
  double energy_density = 0.0;  ///< E_diss / L^2 of the best state
  double length = 0.0;        ///< box length of the best state
  std::optional<double> optimal_length;  ///< L* of the best state; empty for disorder
  double residual = 0.0;      ///< ||u_t||_2 of the best state
  double best_time = 0.0;
  double half_range = 0.0;    ///< (max u - min u) / 2 of the best state

  double final_time = 0.0;
  double final_energy_density = 0.0;
  double final_residual = 0.0;
  bool converged = false;     ///< residual_tol reached
  bool skipped_annealing = false;
  bool refit_applied = false;
  bool refit_skipped = false;
  bool polished = false;      ///< phase 8 ended with a Newton solve
  bool wall_limited = false;
  bool aborted = false;
  std::string failure;

  double etdrk4_wall_s = 0.0;
  double relax_wall_s = 0.0;
  double wall_s = 0.0;

  std::optional<RealField> best;  ///< u_bar of the best state
  std::optional<RealField> last;  ///< u_bar of the final state
  double last_length = 0.0;
  std::vector<TracePoint> trace;
};

/// 12 pi (2 / gamma)^(1/3).
double protocol_length(double gamma);

/// Step 2: uniform samples in [-1 - m, 1 - m] shifted to zero mean.
RealField random_initial(const GridSpec& grid, double m, std::uint64_t seed);

/// Independent sub-seed number `stream` of a master seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Runs the protocol. Numerical aborts are caught and reported through
/// `aborted` and `failure`; the record still carries the best state so far.
RunRecord run_protocol(double gamma, double m, std::uint64_t seed, const RunOptions& options = {});

struct RefitOptions {
  double settle_time = 5.0;
  Stepper stepper = Stepper::GradientStable;
};

struct RefitResult {
  SolverState state;  ///< refit state if applied, the input otherwise
  bool applied = false;
  bool skipped = false;  ///< no finite optimum (disorder)
  double length_before = 0.0;
  double length_after = 0.0;  ///< the candidate L*
  double density_before = 0.0;
  double density_after = 0.0;  ///< after settling in the candidate box
};

/// Rescales the box to L* = (I1 / (gamma^2 I3))^(1/4) from the unit-domain
/// integrals, relaxes for settle_time and keeps the result only if
/// E_diss / L^2 dropped below the input's. The same L* minimizes E_paper / L^2.
RefitResult domain_refit(const SolverState& state, const RefitOptions& options = {});

/// Relaxes `state` for `duration` time units with the given stepper.
SolverState relax(const SolverState& state, double duration, Stepper stepper);

/// (max u - min u) / 2.
double half_range(const RealField& u);

/// Mean over branch points of (max u - min u) / 2. Throws on an empty branch.
double fluctuation_stat(const std::vector<double>& half_ranges);
double fluctuation_stat(const std::vector<RunRecord>& records);
double fluctuation_stat(const Branch& branch);

/// m / m*(gamma), NaN for gamma <= 2.
double beta_of(double gamma, double m);

/// gamma,m,beta,label,E_paper,E_diss,L_opt,k_star,residual,seed,wall_s
std::string record_csv_header();
/// Label is "Aborted" for aborted runs.
std::string record_csv_row(const RunRecord& record);
/// t,E_paper,E_diss,I1,I2,I3
std::string trace_csv(const std::vector<TracePoint>& trace);

/// Writes record.csv, trace.csv, best and final checkpoints and a PGM
/// preview of the best state into `dir`.
void write_run_outputs(const std::filesystem::path& dir, const RunRecord& record);

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRegion {
  double gamma_min = 2.0;
  double gamma_max = 25.0;
  double m_min = 0.0;
  double m_max = 1.0;

  double diameter() const;
  bool contains(double gamma, double m) const;
};

struct SweepOptions {
  SweepRegion region;
  int count = 60;
  int rounds = 2;
  /// Refinement radius as a fraction of the region diameter.
  double radius_fraction = 0.05;
  std::uint64_t master_seed = 1;
  int jobs = 1;
  RunOptions run;
  /// CSV written incrementally in record order; empty writes nothing.
  std::filesystem::path csv;
  /// Per-run directories run_<index> under this path; empty writes nothing.
  std::filesystem::path run_dirs;
};

struct SweepPoint {
  double gamma = 0.0;
  double m = 0.0;
  std::uint64_t seed = 0;
  int generation = 0;
};

struct PhaseDiagram {
  SweepRegion region;
  std::vector<SweepPoint> points;
  std::vector<RunRecord> records;  ///< records[i] belongs to points[i]
  int generations = 0;
};

/// The n uniform random points of generation 0.
std::vector<SweepPoint> initial_points(const SweepRegion& region, int count, std::uint64_t master_seed);

/// Midpoints between every pair of differently labelled records closer than
/// `radius` in the (m, gamma) plane, skipping duplicates of existing points.
std::vector<SweepPoint> refinement_points(const std::vector<SweepPoint>& points,
                                          const std::vector<RunRecord>& records, double radius, int generation,
                                          std::uint64_t master_seed);

/// Runs every point on up to `jobs` threads; `on_record` is invoked from a
/// single thread in index order as records become available.
std::vector<RunRecord> run_points(const std::vector<SweepPoint>& points, const RunOptions& options, int jobs,
                                  const std::function<void(std::size_t, const RunRecord&)>& on_record = {});

PhaseDiagram sweep(const SweepOptions& options);

/// Reads a key=value master config into sweep options. Recognized keys:
/// gamma_min gamma_max m_min m_max count rounds radius_fraction seed jobs n
/// rho t1 t2 t3 t4 t5 residual_tol noise out run_dirs.
SweepOptions sweep_options_from(const KeyValues& config, SweepOptions base = {});

}  // namespace okphase
