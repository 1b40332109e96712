#pragma once

// Restarted GMRES on mean-zero real fields, shared by the continuation
// Newton solver and the implicit time step.

#include <cmath>
#include <vector>

#include "okphase/spectral.hpp"

namespace okphase::krylov {


inline double dot(const RealField& a, const RealField& b) {
  auto av = a.values();
  auto bv = b.values();
  double s = 0.0;
  for (std::size_t k = 0; k < av.size(); ++k) s += av[k] * bv[k];
  return s;
}

inline double norm(const RealField& a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, const RealField& x, RealField& y) {
  auto xv = x.values();
  auto yv = y.values();
  for (std::size_t k = 0; k < xv.size(); ++k) yv[k] += alpha * xv[k];
}

inline void remove_mean(RealField& f) { f += -f.mean(); }

struct GmresResult {
  RealField x;
  int iterations = 0;
  double relative_residual = 1.0;
};

/// Right-preconditioned restarted GMRES for J x = b, with J and M^-1 given
/// only through their action. Every Krylov vector is projected to zero mean.
template <class Apply, class Precondition>
GmresResult gmres(const Apply& apply, const Precondition& precond, const RealField& b, int restart, int max_iter,
                  double rel_tol) {
  GmresResult out{RealField(b.grid())};
  const double b_norm = norm(b);
  if (b_norm == 0.0) {
    out.relative_residual = 0.0;
    return out;
  }
  int total = 0;
  while (total < max_iter) {
    RealField r = b;
    if (total > 0) axpy(-1.0, apply(out.x), r);
    remove_mean(r);
    const double beta = norm(r);
    out.relative_residual = beta / b_norm;
    if (out.relative_residual <= rel_tol) break;

    std::vector<RealField> basis;
    basis.reserve(static_cast<std::size_t>(restart) + 1);
    r *= 1.0 / beta;
    basis.push_back(std::move(r));
    std::vector<std::vector<double>> hess(static_cast<std::size_t>(restart) + 1,
                                          std::vector<double>(static_cast<std::size_t>(restart), 0.0));
    std::vector<double> cs(static_cast<std::size_t>(restart), 0.0), sn(static_cast<std::size_t>(restart), 0.0);
    std::vector<double> g(static_cast<std::size_t>(restart) + 1, 0.0);
    g[0] = beta;
    int used = 0;
    for (int j = 0; j < restart && total < max_iter; ++j, ++total) {
      const auto uj = static_cast<std::size_t>(j);
      RealField w = apply(precond(basis[uj]));
      remove_mean(w);
      for (int i = 0; i <= j; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        hess[ui][uj] = dot(w, basis[ui]);
        axpy(-hess[ui][uj], basis[ui], w);
      }
      const double w_norm = norm(w);
      hess[uj + 1][uj] = w_norm;
      for (int i = 0; i < j; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const double t = cs[ui] * hess[ui][uj] + sn[ui] * hess[ui + 1][uj];
        hess[ui + 1][uj] = -sn[ui] * hess[ui][uj] + cs[ui] * hess[ui + 1][uj];
        hess[ui][uj] = t;
      }
      const double denom = std::hypot(hess[uj][uj], hess[uj + 1][uj]);
      cs[uj] = denom == 0.0 ? 1.0 : hess[uj][uj] / denom;
      sn[uj] = denom == 0.0 ? 0.0 : hess[uj + 1][uj] / denom;
      hess[uj][uj] = denom;
      hess[uj + 1][uj] = 0.0;
      g[uj + 1] = -sn[uj] * g[uj];
      g[uj] = cs[uj] * g[uj];
      used = j + 1;
      out.relative_residual = std::abs(g[uj + 1]) / b_norm;
      if (out.relative_residual <= rel_tol || w_norm == 0.0) {
        ++total;
        break;
      }
      w *= 1.0 / w_norm;
      basis.push_back(std::move(w));
    }
    // Back substitution for the least-squares coefficients.
    std::vector<double> y(static_cast<std::size_t>(used), 0.0);
    for (int i = used - 1; i >= 0; --i) {
      const auto ui = static_cast<std::size_t>(i);
      double s = g[ui];
      for (int k = i + 1; k < used; ++k) s -= hess[ui][static_cast<std::size_t>(k)] * y[static_cast<std::size_t>(k)];
      y[ui] = hess[ui][ui] == 0.0 ? 0.0 : s / hess[ui][ui];
    }
    RealField z(b.grid());
    for (int i = 0; i < used; ++i) axpy(y[static_cast<std::size_t>(i)], basis[static_cast<std::size_t>(i)], z);
    RealField dx = precond(z);
    remove_mean(dx);
    out.x += dx;
    if (out.relative_residual <= rel_tol) break;
  }
  out.iterations = total;
  return out;
}

}  // namespace okphase::krylov
