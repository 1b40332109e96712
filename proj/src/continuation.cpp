#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "okphase/dynamics.hpp"
#include "krylov.hpp"

namespace okphase {

namespace {

using krylov::axpy;
using krylov::gmres;
using krylov::GmresResult;
using krylov::remove_mean;

/// Inverse of the constant-coefficient part of the Jacobian, -(k^4/gamma^2 + k^2 + 1)^-1.
RealField precondition(const RealField& v, double gamma) {
  const double g2 = gamma * gamma;
  SpectralField hat = forward(v);
  hat = apply_multiplier(hat, [g2](double k2) { return -1.0 / (k2 * k2 / g2 + k2 + 1.0); }, ZeroMode::Pin);
  return inverse(hat);
}

}  // namespace

NewtonResult newton_solve(const RealField& u_bar, double gamma, double m, const NewtonOptions& options) {
  NewtonResult out{u_bar};
  remove_mean(out.u_bar);
  RealField r = rhs(out.u_bar, gamma, m);
  out.residual = l2_norm(r);
  for (int it = 0; it < options.max_newton; ++it) {
    if (out.residual < options.tolerance) {
      out.converged = true;
      return out;
    }
    const RealField& base = out.u_bar;
    auto apply = [&](const RealField& v) { return jacobian_apply(base, v, gamma, m); };
    auto precond = [&](const RealField& v) { return precondition(v, gamma); };
    RealField minus_r = -1.0 * r;
    GmresResult lin = gmres(apply, precond, minus_r, options.krylov_restart, options.max_krylov, options.forcing);
    out.krylov_iterations += lin.iterations;

    // Backtracking on the residual norm keeps Newton from jumping branches.
    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k < 6; ++k, step *= 0.5) {
      RealField trial = out.u_bar;
      axpy(step, lin.x, trial);
      remove_mean(trial);
      if (!trial.all_finite()) continue;
      RealField trial_r = rhs(trial, gamma, m);
      const double trial_res = l2_norm(trial_r);
      if (std::isfinite(trial_res) && trial_res < out.residual) {
        out.u_bar = std::move(trial);
        r = std::move(trial_r);
        out.residual = trial_res;
        accepted = true;
        break;
      }
    }
    out.newton_iterations = it + 1;
    if (!accepted) return out;
  }
  out.converged = out.residual < options.tolerance;
  return out;
}

Branch continue_in_m(const RealField& u_bar0, double gamma, double m0, double dm, int n_steps,
                     const NewtonOptions& options) {
  if (n_steps < 0) throw std::invalid_argument("continue_in_m: n_steps must be non-negative");
  const double r0 = residual_norm(u_bar0, gamma, m0);
  if (!(r0 < 1e-4)) {
    throw std::invalid_argument("continue_in_m: starting state is not stationary (residual " + std::to_string(r0) +
                                ")");
  }
  Branch branch;
  branch.gamma = gamma;
  RealField current = u_bar0;
  for (int i = 0; i <= n_steps; ++i) {
    const double m = m0 + i * dm;
    if (!(std::abs(m) < 1.0)) {
      branch.truncated = true;
      branch.failure = "m left (-1, 1)";
      break;
    }
    NewtonResult sol = newton_solve(current, gamma, m, options);
    if (!sol.converged) {
      branch.truncated = true;
      branch.failure = "Newton failed at m = " + std::to_string(m) + " (residual " + std::to_string(sol.residual) + ")";
      break;
    }
    BranchPoint point{m, sol.u_bar, deviation_energy(sol.u_bar, gamma, m), sol.residual, sol.newton_iterations};
    current = sol.u_bar;
    branch.points.push_back(std::move(point));
  }
  return branch;
}

}  // namespace okphase
