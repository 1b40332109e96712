#include "okphase/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "okphase/annealing.hpp"
#include "okphase/asymptotics.hpp"

namespace okphase {

void Schedule::validate() const {
  if (!(0.0 < t1 && t1 < t2 && t2 < t3 && t3 < t4 && t4 <= t5)) {
    throw std::invalid_argument("schedule: need 0 < t1 < t2 < t3 < t4 <= t5");
  }
  if (!(residual_tol > 0.0)) throw std::invalid_argument("schedule: residual_tol must be positive");
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("schedule: rho must lie in [0, 1)");
  if (!(noise_amplitude_factor >= 0.0)) throw std::invalid_argument("schedule: noise factor must be non-negative");
}

double protocol_length(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("protocol_length: gamma must be positive");
  return 12.0 * std::numbers::pi * std::cbrt(2.0 / gamma);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RealField random_initial(const GridSpec& grid, double m, std::uint64_t seed) {
  RealField u(grid);
  UniformStream stream(seed);
  for (double& v : u.values()) v = stream.next(-1.0 - m, 1.0 - m);
  u += -u.mean();
  return u;
}

double half_range(const RealField& u) { return 0.5 * (u.max() - u.min()); }

double fluctuation_stat(const std::vector<double>& half_ranges) {
  if (half_ranges.empty()) throw std::invalid_argument("fluctuation_stat: empty branch");
  double sum = 0.0;
  for (double h : half_ranges) sum += h;
  return sum / static_cast<double>(half_ranges.size());
}

double fluctuation_stat(const std::vector<RunRecord>& records) {
  std::vector<double> h;
  h.reserve(records.size());
  for (const RunRecord& r : records) h.push_back(r.half_range);
  return fluctuation_stat(h);
}

double fluctuation_stat(const Branch& branch) {
  std::vector<double> h;
  h.reserve(branch.points.size());
  for (const BranchPoint& p : branch.points) h.push_back(half_range(p.u_bar));
  return fluctuation_stat(h);
}

double beta_of(double gamma, double m) {
  if (!(gamma > 2.0)) return std::numeric_limits<double>::quiet_NaN();
  return m / odt(gamma);
}

// ---------------------------------------------------------------------------
// Time advancement shared by the protocol and the refit.

namespace {

constexpr double kTimeSlack = 1e-9;

/// Called with states along the trajectory; returning true stops the advance
/// at that state.
using Observer = std::function<bool(double t, const RealField& u_bar, const SpectralField& u_bar_hat)>;

struct Weighting {
  double k_star = 0.0;
  double rho = 0.0;
};

void advance_etdrk4(SolverState& s, double t_end, std::optional<Weighting> weighting, bool dealias,
                    const Observer& observe) {
  if (s.t >= t_end - kTimeSlack) return;
  const double dt = default_dt(s.gamma);
  Etdrk4::Options opts;
  opts.dealias = dealias;
  Etdrk4 integrator(s.u_bar.grid(), s.gamma, s.m, dt, opts);
  SpectralField u_hat = forward(s.u_bar);
  u_hat.set_zero_mode(0.0);
  SpectralField before(s.u_bar.grid());
  RealField start(s.u_bar.grid());
  bool stopped = false;
  while (s.t < t_end - kTimeSlack) {
    before = u_hat;
    integrator.step(u_hat, &start);
    // `start` and `before` describe the state at s.t, before this step.
    if (observe && observe(s.t, start, before)) {
      u_hat = before;
      stopped = true;
      break;
    }
    s.t += dt;
    if (weighting) apply_weighting_in_place(u_hat, weighting->k_star, weighting->rho);
  }
  s.u_bar = inverse(u_hat);
  s.u_bar += -s.u_bar.mean();
  s.dt = dt;
  s.stepper = Stepper::Etdrk4;
  if (!stopped && observe) observe(s.t, s.u_bar, u_hat);
}

void advance_gradient_stable(SolverState& s, double t_end, const Observer& observe) {
  double dt = s.dt > 0.0 ? s.dt : default_dt(s.gamma);
  while (s.t < t_end - kTimeSlack) {
    SolverState trial = s;
    trial.dt = std::min(dt, t_end - s.t);
    GradientStableOptions gs;
    gs.solver = ImplicitSolver::Newton;
    GradientStableResult res = gradient_stable_step(trial, gs);
    const double base = res.halvings > 0 ? res.state.dt : dt;
    s = std::move(res.state);
    dt = adapt_dt(res.iterations, base);
    s.dt = dt;
    if (observe) {
      SpectralField hat = forward(s.u_bar);
      hat.set_zero_mode(0.0);
      if (observe(s.t, s.u_bar, hat)) break;
    }
  }
  s.dt = dt;
  s.stepper = Stepper::GradientStable;
}

void advance(SolverState& s, double t_end, Stepper stepper, bool dealias, const Observer& observe) {
  if (stepper == Stepper::Etdrk4) {
    advance_etdrk4(s, t_end, std::nullopt, dealias, observe);
  } else {
    advance_gradient_stable(s, t_end, observe);
  }
}

double density_of(const RealField& u_bar, double gamma, double m) {
  const double l = u_bar.grid().length();
  return deviation_energy(u_bar, gamma, m).dissipated / (l * l);
}

}  // namespace

SolverState relax(const SolverState& state, double duration, Stepper stepper) {
  SolverState s = state;
  advance(s, s.t + duration, stepper, false, {});
  return s;
}

RefitResult domain_refit(const SolverState& state, const RefitOptions& options) {
  RefitResult out{state};
  const double length = state.u_bar.grid().length();
  out.length_before = length;
  SpectralField hat = forward(state.u_bar);
  hat.set_zero_mode(0.0);
  const EnergyBreakdown e = deviation_energy(state.u_bar, hat, state.gamma, state.m);
  out.density_before = e.dissipated / (length * length);
  const UnitDomainIntegrals unit = to_unit_domain(e, length);
  if (classify(hat).label == PhaseLabel::Disorder || !(unit.i1 > 0.0) || !(unit.i3 > 0.0)) {
    out.skipped = true;
    return out;
  }
  const auto opt = optimal_length(unit.i1, unit.i3, state.gamma);
  if (!opt) {
    out.skipped = true;
    return out;
  }
  out.length_after = opt->length;
  SolverState candidate = state;
  candidate.u_bar.rescale_box(opt->length);
  // The rescaled field is no longer near equilibrium, so the step size
  // adapted to the old box is not a safe start.
  candidate.dt = default_dt(state.gamma);
  candidate = relax(candidate, options.settle_time, options.stepper);
  out.density_after = density_of(candidate.u_bar, state.gamma, state.m);
  if (out.density_after < out.density_before) {
    out.applied = true;
    out.state = std::move(candidate);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Protocol

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Best-state and trace bookkeeping for one run.
class Tracker {
 public:
  Tracker(RunRecord& record, const RunOptions& options, Clock::time_point start)
      : rec_(record), options_(options), start_(start) {}

  /// Returns true when the wall-time budget is exhausted.
  bool observe(double t, const RealField& u_bar, const SpectralField& u_hat) {
    const double length = u_bar.grid().length();
    const EnergyBreakdown e = deviation_energy(u_bar, u_hat, rec_.gamma, rec_.m);
    const double density = e.dissipated / (length * length);
    if (density < best_density_) {
      best_density_ = density;
      rec_.best = u_bar;
      rec_.best_time = t;
      rec_.energy = e;
      rec_.energy_density = density;
      rec_.length = length;
    }
    if (t >= next_trace_ - kTimeSlack) {
      rec_.trace.push_back({t, length, e});
      next_trace_ = t + options_.trace_interval;
    }
    if (++calls_ % 32 == 0 && seconds_since(start_) > options_.max_wall_s) {
      rec_.wall_limited = true;
    }
    return rec_.wall_limited;
  }

 private:
  RunRecord& rec_;
  const RunOptions& options_;
  Clock::time_point start_;
  double best_density_ = std::numeric_limits<double>::infinity();
  double next_trace_ = 0.0;
  long calls_ = 0;
};

}  // namespace

RunRecord run_protocol(double gamma, double m, std::uint64_t seed, const RunOptions& options) {
  if (!(gamma > 0.0)) throw std::invalid_argument("run_protocol: gamma must be positive");
  if (!(std::abs(m) < 1.0)) throw std::invalid_argument("run_protocol: |m| must be below 1");
  const Schedule& sch = options.schedule;
  sch.validate();

  const auto start = Clock::now();
  RunRecord rec;
  rec.gamma = gamma;
  rec.m = m;
  rec.seed = seed;
  rec.schedule = sch;

  RealField init = options.initial ? *options.initial
                                   : random_initial(GridSpec(options.n, options.length.value_or(protocol_length(gamma))),
                                                    m, derive_seed(seed, 0));
  init += -init.mean();
  rec.n = init.n();
  SolverState st{std::move(init), 0.0, default_dt(gamma), gamma, m, Stepper::Etdrk4};

  Tracker tracker(rec, options, start);
  const Observer plain = [&](double t, const RealField& u, const SpectralField& h) { return tracker.observe(t, u, h); };
  // Observer that also stops once the stationarity residual is reached.
  // The residual costs two transforms, so the ETDRK4 relaxation tests it every
  // tenth step.
  long residual_calls = 0;
  const int residual_every = options.relaxation == Stepper::Etdrk4 ? 10 : 1;
  const Observer until_stationary = [&](double t, const RealField& u, const SpectralField& h) {
    if (tracker.observe(t, u, h)) return true;
    if (++residual_calls % residual_every != 0) return false;
    return residual_norm(h, gamma, m) < sch.residual_tol;
  };

  try {
    advance_etdrk4(st, sch.t1, std::nullopt, options.dealias, plain);
    rec.skipped_annealing = residual_norm(st.u_bar, gamma, m) < sch.residual_tol;
    if (!rec.skipped_annealing && !rec.wall_limited) {
      std::optional<Weighting> w;
      SpectralField hat = forward(st.u_bar);
      hat.set_zero_mode(0.0);
      if (const auto k = dominant_mode(hat); k && sch.rho > 0.0) w = Weighting{*k, sch.rho};
      advance_etdrk4(st, sch.t2, w, options.dealias, plain);

      const double amplitude = sch.noise_amplitude_factor * (st.u_bar.max() - st.u_bar.min());
      st.u_bar = inject_noise(st.u_bar, amplitude, derive_seed(seed, 1));
      if (!rec.wall_limited) advance_etdrk4(st, sch.t3, std::nullopt, options.dealias, plain);
    }
    rec.etdrk4_wall_s = seconds_since(start);

    if (!rec.wall_limited) advance(st, sch.t4, options.relaxation, options.dealias, until_stationary);

    if (options.refit && !rec.wall_limited) {
      const RefitOptions ro{options.settle_time, options.relaxation};
      for (int round = 0; round < (options.repeat_refit ? 5 : 1); ++round) {
        RefitResult r = domain_refit(st, ro);
        rec.refit_skipped = r.skipped;
        if (!r.applied) break;
        rec.refit_applied = true;
        st = std::move(r.state);
        SpectralField hat = forward(st.u_bar);
        hat.set_zero_mode(0.0);
        tracker.observe(st.t, st.u_bar, hat);
      }
    }

    // Phase 8 runs in segments; between segments a Newton solve tries to
    // finish the slow final approach to the stationary state.
    double last_attempt = std::numeric_limits<double>::infinity();
    while (!rec.wall_limited && st.t < sch.t5 - kTimeSlack) {
      const double segment_end = options.polish_interval > 0.0 ? std::min(sch.t5, st.t + options.polish_interval) : sch.t5;
      advance(st, segment_end, options.relaxation, options.dealias, until_stationary);
      const double res = residual_norm(st.u_bar, gamma, m);
      if (res < sch.residual_tol) break;
      // A failed attempt is retried only after the residual dropped tenfold.
      if (options.polish_interval > 0.0 && res < options.polish_threshold && res < 0.1 * last_attempt) {
        last_attempt = res;
        NewtonOptions no;
        no.tolerance = sch.residual_tol;
        no.max_newton = 8;
        no.krylov_restart = 400;
        no.max_krylov = 1200;
        NewtonResult polished = newton_solve(st.u_bar, gamma, m, no);
        if (polished.converged && density_of(polished.u_bar, gamma, m) <= density_of(st.u_bar, gamma, m) + 1e-12) {
          st.u_bar = std::move(polished.u_bar);
          rec.polished = true;
          SpectralField hat = forward(st.u_bar);
          hat.set_zero_mode(0.0);
          tracker.observe(st.t, st.u_bar, hat);
          break;
        }
      }
    }
  } catch (const NumericalError& e) {
    rec.aborted = true;
    rec.failure = e.what();
  }
  rec.relax_wall_s = seconds_since(start) - rec.etdrk4_wall_s;

  rec.final_time = st.t;
  rec.last_length = st.u_bar.grid().length();
  if (st.u_bar.all_finite()) {
    rec.final_energy_density = density_of(st.u_bar, gamma, m);
    rec.final_residual = residual_norm(st.u_bar, gamma, m);
    rec.converged = rec.final_residual < sch.residual_tol;
  }
  rec.last = std::move(st.u_bar);

  if (rec.best) {
    SpectralField hat = forward(*rec.best);
    hat.set_zero_mode(0.0);
    rec.classification = classify(hat);
    rec.residual = residual_norm(hat, gamma, m);
    rec.half_range = half_range(*rec.best);
    const UnitDomainIntegrals unit = to_unit_domain(rec.energy, rec.length);
    if (rec.classification.label != PhaseLabel::Disorder && unit.i1 > 0.0 && unit.i3 > 0.0) {
      if (const auto opt = optimal_length(unit.i1, unit.i3, gamma)) rec.optimal_length = opt->length;
    }
  }
  rec.wall_s = seconds_since(start);
  if (!options.out_dir.empty()) write_run_outputs(options.out_dir, rec);
  return rec;
}

// ---------------------------------------------------------------------------
// Output

std::string record_csv_header() { return "gamma,m,beta,label,E_paper,E_diss,L_opt,k_star,residual,seed,wall_s"; }

std::string record_csv_row(const RunRecord& r) {
  const double beta = beta_of(r.gamma, r.m);
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.3f", r.wall_s);
  std::ostringstream os;
  os << format_double(r.gamma) << ',' << format_double(r.m) << ',' << (std::isnan(beta) ? "" : format_double(beta))
     << ',' << (r.aborted ? std::string("Aborted") : to_string(r.classification.label)) << ','
     << format_double(r.energy.paper) << ',' << format_double(r.energy.dissipated) << ','
     << (r.optimal_length ? format_double(*r.optimal_length) : "") << ',' << format_double(r.classification.k_star)
     << ',' << format_double(r.residual) << ',' << r.seed << ',' << wall;
  return os.str();
}

std::string trace_csv(const std::vector<TracePoint>& trace) {
  std::ostringstream os;
  os << "t,E_paper,E_diss,I1,I2,I3\n";
  for (const TracePoint& p : trace) {
    os << format_double(p.t) << ',' << format_double(p.energy.paper) << ',' << format_double(p.energy.dissipated)
       << ',' << format_double(p.energy.i1) << ',' << format_double(p.energy.i2) << ','
       << format_double(p.energy.i3) << '\n';
  }
  return os.str();
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

void write_run_outputs(const std::filesystem::path& dir, const RunRecord& record) {
  std::filesystem::create_directories(dir);
  write_text(dir / "record.csv", record_csv_header() + "\n" + record_csv_row(record) + "\n");
  write_text(dir / "trace.csv", trace_csv(record.trace));
  if (record.best) {
    write_checkpoint(dir / "best.okf",
                     SolverState{*record.best, record.best_time, 0.0, record.gamma, record.m, Stepper::GradientStable},
                     record.seed);
    RealField u = *record.best;
    u += record.m;
    write_pgm(dir / "best.pgm", u);
  }
  if (record.last) {
    write_checkpoint(dir / "final.okf",
                     SolverState{*record.last, record.final_time, 0.0, record.gamma, record.m, Stepper::GradientStable},
                     record.seed);
  }
}

}  // namespace okphase
