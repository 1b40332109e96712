#include "okphase/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "okphase/field_io.hpp"
#include "krylov.hpp"

namespace okphase {

std::string to_string(Stepper stepper) {
  return stepper == Stepper::Etdrk4 ? "etdrk4" : "gradient_stable";
}

Stepper stepper_from_string(const std::string& name) {
  if (name == "etdrk4") return Stepper::Etdrk4;
  if (name == "gradient_stable") return Stepper::GradientStable;
  throw std::invalid_argument("unknown stepper '" + name + "'");
}

double Dispersion::growth_rate(double k2) const {
  return -k2 * k2 / (gamma * gamma) + (1.0 - 3.0 * m * m) * k2 - 1.0;
}

Dispersion dispersion(double gamma, double m) {
  if (!(gamma > 0.0)) throw std::invalid_argument("dispersion: gamma must be positive");
  const double s = 1.0 - 3.0 * m * m;
  Dispersion d;
  d.gamma = gamma;
  d.m = m;
  d.k2_opt = gamma * gamma * s / 2.0;
  d.lambda_max = gamma * gamma * s * s / 4.0 - 1.0;
  return d;
}

double default_dt(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("default_dt: gamma must be positive");
  return 0.1 / (1.0 + std::pow(gamma, 1.5));
}

double adapt_dt(int iterations, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("adapt_dt: dt must be positive");
  if (iterations > 20) return dt / 2.0;
  if (iterations < 5) return std::min(1.5 * dt, kMaxDt);
  return dt;
}

namespace {

void require_mean_zero(const RealField& f, const char* what) {
  if (!(std::abs(f.mean()) < 1e-10)) {
    throw std::invalid_argument(std::string(what) + ": u_bar must have zero mean");
  }
}

/// Fills `out` with (-k^2) F[g(u)] for a pointwise g, given the samples of u.
template <class Pointwise>
void laplacian_of_pointwise(const Fft& fft, const RealField& u, RealField& scratch, SpectralField& out,
                            Pointwise g) {
  auto in = u.values();
  auto s = scratch.values();
  for (std::size_t k = 0; k < in.size(); ++k) s[k] = g(in[k], k);
  fft.forward(s, out.coeffs());
  const int n = out.n();
  const int h = out.grid().half();
  for (int ix = 0; ix < n; ++ix) {
    for (int jy = 0; jy < h; ++jy) out.at(ix, jy) *= -out.k_squared(ix, jy);
  }
}

}  // namespace

SpectralField rhs_spectral(const SpectralField& u_bar_hat, double gamma, double m) {
  const Fft fft(u_bar_hat.n());
  RealField u(u_bar_hat.grid());
  fft.inverse(u_bar_hat.coeffs(), u.values());
  RealField scratch(u_bar_hat.grid());
  SpectralField out(u_bar_hat.grid());
  laplacian_of_pointwise(fft, u, scratch, out, [m](double v, std::size_t) { return v * v * (v + 3.0 * m); });
  const Dispersion d = dispersion(gamma, m);
  const int n = out.n();
  const int h = out.grid().half();
  for (int ix = 0; ix < n; ++ix) {
    for (int jy = 0; jy < h; ++jy) {
      out.at(ix, jy) += d.growth_rate(u_bar_hat.k_squared(ix, jy)) * u_bar_hat.at(ix, jy);
    }
  }
  out.set_zero_mode(0.0);
  return out;
}

RealField rhs(const RealField& u_bar, double gamma, double m) {
  require_mean_zero(u_bar, "rhs");
  return inverse(rhs_spectral(forward(u_bar), gamma, m));
}

double residual_norm(const SpectralField& u_bar_hat, double gamma, double m) {
  const SpectralField r = rhs_spectral(u_bar_hat, gamma, m);
  return u_bar_hat.grid().length() * std::sqrt(r.power());
}

double residual_norm(const RealField& u_bar, double gamma, double m) {
  require_mean_zero(u_bar, "residual_norm");
  return residual_norm(forward(u_bar), gamma, m);
}

RealField jacobian_apply(const RealField& u_bar, const RealField& v, double gamma, double m) {
  require_mean_zero(v, "jacobian_apply");
  const Fft fft(v.n());
  const double lin = 1.0 - 3.0 * m * m;
  auto ub = u_bar.values();
  RealField scratch(v.grid());
  SpectralField out(v.grid());
  laplacian_of_pointwise(fft, v, scratch, out, [&](double vk, std::size_t k) {
    const double w = ub[k];
    return (3.0 * w * w + 6.0 * m * w - lin) * vk;
  });
  const SpectralField v_hat = forward(v);
  const double g2 = gamma * gamma;
  const int n = out.n();
  const int h = out.grid().half();
  for (int ix = 0; ix < n; ++ix) {
    for (int jy = 0; jy < h; ++jy) {
      const double k2 = v_hat.k_squared(ix, jy);
      out.at(ix, jy) -= (k2 * k2 / g2 + 1.0) * v_hat.at(ix, jy);
    }
  }
  out.set_zero_mode(0.0);
  return inverse(out);
}

// ---------------------------------------------------------------------------
// ETDRK4

Etdrk4::Etdrk4(GridSpec grid, double gamma, double m, double dt, Options options)
    : grid_(grid),
      gamma_(gamma),
      m_(m),
      dt_(dt),
      options_(options),
      fft_(grid.n()),
      real_scratch_(grid),
      nv_(grid),
      na_(grid),
      nb_(grid),
      nc_(grid),
      a_(grid),
      b_(grid),
      c_(grid),
      next_(grid) {
  if (!(dt > 0.0)) throw std::invalid_argument("Etdrk4: dt must be positive");
  if (options.contour_points < 4) throw std::invalid_argument("Etdrk4: too few contour points");
  const Dispersion disp = dispersion(gamma, m);
  const std::size_t count = grid.spectral_points();
  for (auto* v : {&e_, &e2_, &q_, &f1_, &f2_, &f3_, &nl_mult_}) v->resize(count);

  const int n = grid.n();
  const int h = grid.half();
  const int points = options.contour_points;
  std::vector<Complex> roots(static_cast<std::size_t>(points));
  for (int j = 0; j < points; ++j) {
    roots[static_cast<std::size_t>(j)] = std::polar(1.0, 2.0 * std::numbers::pi * (j + 0.5) / points);
  }
  const SpectralField shape(grid);
  for (int ix = 0; ix < n; ++ix) {
    for (int jy = 0; jy < h; ++jy) {
      const std::size_t idx = static_cast<std::size_t>(ix) * h + jy;
      const double k2 = shape.k_squared(ix, jy);
      const double c = dt * disp.growth_rate(k2);
      e_[idx] = std::exp(c);
      e2_[idx] = std::exp(c / 2.0);
      Complex q = 0.0, f1 = 0.0, f2 = 0.0, f3 = 0.0;
      for (const Complex& root : roots) {
        const Complex r = c + root;
        const Complex er = std::exp(r);
        const Complex r3 = r * r * r;
        q += (std::exp(r / 2.0) - 1.0) / r;
        f1 += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
        f2 += (2.0 + r + er * (r - 2.0)) / r3;
        f3 += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
      }
      q_[idx] = dt * q.real() / points;
      f1_[idx] = dt * f1.real() / points;
      f2_[idx] = dt * f2.real() / points;
      f3_[idx] = dt * f3.real() / points;
      double mult = options.nonlinear ? -k2 : 0.0;
      if (options.dealias) {
        const int cutoff = n / 3;
        if (std::abs(signed_wavenumber(ix, n)) > cutoff || jy > cutoff) mult = 0.0;
      }
      nl_mult_[idx] = mult;
    }
  }
}

void Etdrk4::nonlinear(const SpectralField& v, SpectralField& out, RealField* real_out) {
  RealField& u = real_out != nullptr ? *real_out : real_scratch_;
  fft_.inverse(v.coeffs(), u.values());
  if (!options_.nonlinear) {
    std::fill(out.storage().begin(), out.storage().end(), Complex(0.0));
    return;
  }
  auto in = u.values();
  // When real_out is null, `in` and `s` alias the same scratch buffer.
  auto s = real_scratch_.values();
  const double m3 = 3.0 * m_;
  for (std::size_t k = 0; k < in.size(); ++k) {
    const double w = in[k];
    s[k] = w * w * (w + m3);
  }
  fft_.forward(s, out.coeffs());
  auto o = out.coeffs();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] *= nl_mult_[k];
}

void Etdrk4::step(SpectralField& u_hat, RealField* start) {
  if (!(u_hat.grid() == grid_)) throw std::invalid_argument("Etdrk4::step: grid mismatch");
  nonlinear(u_hat, nv_, start);
  const auto u = u_hat.coeffs();
  const auto nv = nv_.coeffs();
  auto a = a_.coeffs();
  const std::size_t count = u.size();
  for (std::size_t k = 0; k < count; ++k) a[k] = e2_[k] * u[k] + q_[k] * nv[k];
  nonlinear(a_, na_, nullptr);
  const auto na = na_.coeffs();
  auto b = b_.coeffs();
  for (std::size_t k = 0; k < count; ++k) b[k] = e2_[k] * u[k] + q_[k] * na[k];
  nonlinear(b_, nb_, nullptr);
  const auto nb = nb_.coeffs();
  auto c = c_.coeffs();
  for (std::size_t k = 0; k < count; ++k) c[k] = e2_[k] * a[k] + q_[k] * (2.0 * nb[k] - nv[k]);
  nonlinear(c_, nc_, nullptr);
  const auto nc = nc_.coeffs();
  auto next = next_.coeffs();
  double largest = 0.0;
  bool finite = true;
  for (std::size_t k = 0; k < count; ++k) {
    next[k] = e_[k] * u[k] + f1_[k] * nv[k] + 2.0 * f2_[k] * (na[k] + nb[k]) + f3_[k] * nc[k];
    const double mag = std::abs(next[k]);
    finite = finite && std::isfinite(mag);
    largest = std::max(largest, mag);
  }
  next[0] = 0.0;
  if (!finite || largest > 1e6) {
    throw NumericalError("ETDRK4 step diverged (time step beyond the stability limit)");
  }
  std::swap(u_hat.storage(), next_.storage());
}

SolverState etdrk4_step(const SolverState& state) {
  require_mean_zero(state.u_bar, "etdrk4_step");
  Etdrk4 integrator(state.u_bar.grid(), state.gamma, state.m, state.dt);
  SpectralField hat = forward(state.u_bar);
  hat.set_zero_mode(0.0);
  integrator.step(hat);
  SolverState next = state;
  next.u_bar = inverse(hat);
  next.t += state.dt;
  next.stepper = Stepper::Etdrk4;
  return next;
}

// ---------------------------------------------------------------------------
// Gradient-stable step

namespace {

struct ImplicitAttempt {
  RealField u;
  SpectralField u_hat;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
};

ImplicitAttempt solve_implicit(const RealField& u0, const SpectralField& u0_hat, double gamma, double m, double dt,
                               const GradientStableOptions& options) {
  const GridSpec grid = u0.grid();
  const Fft fft(grid.n());
  const double g2 = gamma * gamma;
  const double lin = 1.0 - 3.0 * m * m;
  const int n = grid.n();
  const int h = grid.half();

  ImplicitAttempt out{u0, u0_hat};
  RealField next(grid);
  RealField nonlinear_samples(grid);
  SpectralField nonlinear_hat(grid);

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    auto w = out.u.values();
    double wmax = 0.0;
    for (double v : w) wmax = std::max(wmax, std::abs(v));
    const double a = std::max(2.0, 3.0 * wmax * wmax + 6.0 * std::abs(m) * wmax + lin);

    auto s = nonlinear_samples.values();
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double v = w[k];
      s[k] = v * (v * v + 3.0 * m * v - lin);
    }
    fft.forward(s, nonlinear_hat.coeffs());
    for (int ix = 0; ix < n; ++ix) {
      for (int jy = 0; jy < h; ++jy) {
        const double k2 = grid.wavenumber_unit() * grid.wavenumber_unit() *
                          (static_cast<double>(signed_wavenumber(ix, n)) * signed_wavenumber(ix, n) +
                           static_cast<double>(jy) * jy);
        const double denom = 1.0 + dt * k2 * k2 / g2 + dt + dt * a * k2;
        const Complex num = u0_hat.at(ix, jy) - dt * k2 * nonlinear_hat.at(ix, jy) + dt * a * k2 * out.u_hat.at(ix, jy);
        out.u_hat.at(ix, jy) = num / denom;
      }
    }
    out.u_hat.set_zero_mode(0.0);
    fft.inverse(out.u_hat.coeffs(), next.values());
    const double change = max_difference(next, out.u);
    std::swap(out.u.storage(), next.storage());
    out.iterations = iter;
    if (!std::isfinite(change) || change > 1e3) {
      out.diverged = true;
      return out;
    }
    if (change < options.tolerance) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

/// Backward-Euler equation F(w) = w - u0 - dt rhs(w) = 0 by Newton-Krylov.
/// The preconditioner inverts 1 + dt (k^4/gamma^2 + c k^2 + 1), c the
/// positive part of the mean of N'(w).
ImplicitAttempt solve_implicit_newton(const RealField& u0, const SpectralField& u0_hat, double gamma, double m,
                                      double dt, const GradientStableOptions& options) {
  const double g2 = gamma * gamma;
  const double lin = 1.0 - 3.0 * m * m;
  ImplicitAttempt out{u0, u0_hat};
  const double tol = dt * std::max(1e-3 * residual_norm(u0_hat, gamma, m), 1e-10);

  auto residual_of = [&](const RealField& w) {
    RealField f = w;
    f -= u0;
    RealField r = rhs(w, gamma, m);
    krylov::axpy(-dt, r, f);
    krylov::remove_mean(f);
    return f;
  };
  RealField f = residual_of(out.u);
  double f_norm = l2_norm(f);
  for (int iter = 1; iter <= options.max_newton; ++iter) {
    if (f_norm <= tol) {
      out.converged = true;
      break;
    }
    double mean_slope = 0.0;
    for (double v : out.u.values()) mean_slope += 3.0 * v * v + 6.0 * m * v - lin;
    const double c = std::max(0.0, mean_slope / static_cast<double>(out.u.grid().points()));

    const RealField& base = out.u;
    auto apply = [&](const RealField& v) {
      RealField jv = jacobian_apply(base, v, gamma, m);
      RealField result = v;
      krylov::axpy(-dt, jv, result);
      return result;
    };
    auto precond = [&](const RealField& v) {
      SpectralField hat = forward(v);
      hat = apply_multiplier(
          hat, [&](double k2) { return 1.0 / (1.0 + dt * (k2 * k2 / g2 + c * k2 + 1.0)); }, ZeroMode::Pin);
      return inverse(hat);
    };
    RealField minus_f = -1.0 * f;
    krylov::GmresResult lin_solve =
        krylov::gmres(apply, precond, minus_f, options.krylov_restart, options.max_krylov, options.forcing);
    out.u += lin_solve.x;
    out.u += -out.u.mean();
    out.iterations = iter;
    if (!out.u.all_finite() || lin_solve.x.max_abs() > 1e3) {
      out.diverged = true;
      return out;
    }
    const double previous = f_norm;
    f = residual_of(out.u);
    f_norm = l2_norm(f);
    if (!std::isfinite(f_norm)) {
      out.diverged = true;
      return out;
    }
    // Stagnation at the rounding floor of dt * rhs counts as convergence.
    if (f_norm > 0.5 * previous && f_norm < 1e-9 * dt) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged && f_norm <= tol) out.converged = true;
  out.u_hat = forward(out.u);
  out.u_hat.set_zero_mode(0.0);
  return out;
}

}  // namespace

GradientStableResult gradient_stable_step(const SolverState& state, const GradientStableOptions& options) {
  require_mean_zero(state.u_bar, "gradient_stable_step");
  if (!(state.dt > 0.0)) throw std::invalid_argument("gradient_stable_step: dt must be positive");
  SpectralField u0_hat = forward(state.u_bar);
  u0_hat.set_zero_mode(0.0);
  const double e0 = deviation_energy(state.u_bar, u0_hat, state.gamma, state.m).dissipated;

  double dt = state.dt;
  for (int halvings = 0; halvings <= options.max_halvings; ++halvings, dt /= 2.0) {
    ImplicitAttempt attempt =
        options.solver == ImplicitSolver::Newton
            ? solve_implicit_newton(state.u_bar, u0_hat, state.gamma, state.m, dt, options)
            : solve_implicit(state.u_bar, u0_hat, state.gamma, state.m, dt, options);
    if (attempt.diverged || !attempt.u.all_finite()) continue;
    if (options.solver == ImplicitSolver::Newton && !attempt.converged) continue;
    const double e1 = deviation_energy(attempt.u, attempt.u_hat, state.gamma, state.m).dissipated;
    if (!(e1 <= e0 + options.descent_slack * std::abs(e0))) continue;
    GradientStableResult result{state, attempt.iterations, halvings, attempt.converged, e0, e1};
    result.state.u_bar = std::move(attempt.u);
    result.state.t = state.t + dt;
    result.state.dt = dt;
    result.state.stepper = Stepper::GradientStable;
    return result;
  }
  throw NumericalError("gradient-stable step failed to decrease the energy after " +
                       std::to_string(options.max_halvings) + " halvings of dt");
}

// ---------------------------------------------------------------------------
// Checkpoints

void write_checkpoint(const std::filesystem::path& path, const SolverState& state, unsigned long long seed) {
  RealField u = state.u_bar;
  u += state.m;
  write_field_dump(path, u);
  KeyValues meta;
  meta["gamma"] = format_double(state.gamma);
  meta["m"] = format_double(state.m);
  meta["t"] = format_double(state.t);
  meta["dt"] = format_double(state.dt);
  meta["stepper"] = to_string(state.stepper);
  meta["seed"] = std::to_string(seed);
  write_key_values(path.string() + ".meta", meta);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  const KeyValues meta = read_key_values(path.string() + ".meta");
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) throw std::runtime_error("checkpoint metadata lacks '" + key + "'");
    return it->second;
  };
  Checkpoint cp{SolverState{read_field_dump(path)}};
  cp.state.gamma = std::stod(need("gamma"));
  cp.state.m = std::stod(need("m"));
  cp.state.t = std::stod(need("t"));
  cp.state.dt = std::stod(need("dt"));
  cp.state.stepper = stepper_from_string(need("stepper"));
  cp.seed = std::stoull(need("seed"));
  cp.state.u_bar += -cp.state.m;
  // Remove the rounding residue of the stored mean.
  cp.state.u_bar += -cp.state.u_bar.mean();
  return cp;
}

}  // namespace okphase
