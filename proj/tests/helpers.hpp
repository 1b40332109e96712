#pragma once

// Field builders shared by the test suites and the acceptance checks.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "okphase/annealing.hpp"
#include "okphase/classify.hpp"
#include "okphase/spectral.hpp"

namespace okphase::testing {

/// i.i.d. uniform samples in [-amplitude, amplitude], mean removed.
inline RealField random_field(const GridSpec& grid, std::uint64_t seed, double amplitude = 1.0) {
  UniformStream stream(seed);
  RealField f(grid);
  for (double& v : f.values()) v = stream.next(-amplitude, amplitude);
  f += -f.mean();
  return f;
}

/// Random combination of the integer modes with |kx|, |ky| <= kmax, mean zero.
inline RealField smooth_random_field(const GridSpec& grid, std::uint64_t seed, int kmax, double amplitude = 1.0) {
  UniformStream stream(seed);
  SpectralField v(grid);
  const int n = grid.n();
  for (int kx = -kmax; kx <= kmax; ++kx) {
    for (int ky = 1; ky <= kmax; ++ky) {
      v.at((kx + n) % n, ky) = Complex(stream.next(-1.0, 1.0), stream.next(-1.0, 1.0));
    }
  }
  for (int kx = 1; kx <= kmax; ++kx) {
    const Complex c(stream.next(-1.0, 1.0), stream.next(-1.0, 1.0));
    v.at(kx, 0) = c;
    v.at(n - kx, 0) = std::conj(c);
  }
  RealField f = inverse(v);
  f *= amplitude / f.max_abs();
  f += -f.mean();
  return f;
}

/// sum_j amp_j cos(k_j . x + phase_j) for integer wavevectors k_j.
struct Wave {
  int kx = 0;
  int ky = 0;
  double amplitude = 1.0;
  double phase = 0.0;
};

inline RealField superpose(const GridSpec& grid, const std::vector<Wave>& waves) {
  const double unit = grid.wavenumber_unit();
  return RealField::from_function(grid, [&](double x, double y) {
    double s = 0.0;
    for (const Wave& w : waves) s += w.amplitude * std::cos(unit * (w.kx * x + w.ky * y) + w.phase);
    return s;
  });
}

/// Cyclic shift of the samples by (di, dj).
inline RealField shifted(const RealField& f, int di, int dj) {
  RealField out(f.grid());
  const int n = f.n();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out((i + di) % n, (j + dj) % n) = f(i, j);
  }
  return out;
}

/// One of the 8 symmetries of the square grid: r quarter turns, then an
/// optional mirror.
inline RealField square_symmetry(const RealField& f, int r, bool mirror) {
  RealField out(f.grid());
  const int n = f.n();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      int a = i, b = j;
      for (int q = 0; q < r; ++q) {
        const int t = a;
        a = b;
        b = (n - t) % n;
      }
      if (mirror) b = (n - b) % n;
      out(a, b) = f(i, j);
    }
  }
  return out;
}

/// int v phi with -Lap phi = v, from a direct O(N^4) DFT, a Poisson solve on
/// the coefficients, a direct inverse DFT and the rectangle rule.
inline double brute_force_nonlocal(const RealField& v) {
  const int n = v.n();
  const double unit = v.grid().wavenumber_unit();
  std::vector<Complex> roots(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) roots[static_cast<std::size_t>(j)] = std::polar(1.0, -2.0 * std::numbers::pi * j / n);
  auto root = [&](long e) { return roots[static_cast<std::size_t>(((e % n) + n) % n)]; };

  std::vector<Complex> phi_hat(static_cast<std::size_t>(n) * n);
  for (int kx = 0; kx < n; ++kx) {
    for (int ky = 0; ky < n; ++ky) {
      const int sx = kx < n / 2 ? kx : kx - n;
      const int sy = ky < n / 2 ? ky : ky - n;
      if (sx == 0 && sy == 0) continue;
      Complex c = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) c += v(i, j) * root(static_cast<long>(kx) * i + static_cast<long>(ky) * j);
      }
      c /= static_cast<double>(n) * n;
      phi_hat[static_cast<std::size_t>(kx) * n + ky] = c / (unit * unit * (sx * sx + sy * sy));
    }
  }
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Complex phi = 0.0;
      for (int kx = 0; kx < n; ++kx) {
        for (int ky = 0; ky < n; ++ky) {
          phi += phi_hat[static_cast<std::size_t>(kx) * n + ky] *
                 std::conj(root(static_cast<long>(kx) * i + static_cast<long>(ky) * j));
        }
      }
      sum += v(i, j) * phi.real();
    }
  }
  return sum * v.grid().cell_area();
}

struct LabeledField {
  RealField field;
  PhaseLabel label;
};

/// Synthetic corpus of labeled fields on an n x n grid: stripes, hexagonal
/// and square spot lattices at random orientations, phases, amplitudes and
/// noise levels, uniform fields with sub-threshold noise, and multi-domain
/// superpositions that fit none of the lattices.
inline std::vector<LabeledField> labeled_corpus(int count, std::uint64_t seed, int n = 64) {
  UniformStream rng(seed);
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng.next() * (hi - lo + 1)); };
  std::vector<LabeledField> out;
  out.reserve(static_cast<std::size_t>(count));
  const GridSpec grid(n, 2.0 * std::numbers::pi * 8.0);
  for (int i = 0; i < count; ++i) {
    const int kind = i % 5;
    const double noise = rng.next(0.0, 0.15);
    std::vector<Wave> waves;
    PhaseLabel label = PhaseLabel::Mixed;
    switch (kind) {
      case 0: {  // stripes along a random lattice direction
        static const int dirs[][2] = {{6, 0}, {0, 6}, {4, 4}, {5, 3}, {3, 5}, {6, 2}, {2, 6}, {5, -3}, {4, -4}};
        const auto& d = dirs[pick(0, 8)];
        waves.push_back({d[0], d[1], rng.next(0.3, 1.0), rng.next(0.0, 2.0 * std::numbers::pi)});
        label = PhaseLabel::Lamellae;
        break;
      }
      case 1: {  // hexagonal spots: k1 + k2 + k3 = 0 on a nearly hexagonal integer triad
        static const int triads[][6] = {{7, 0, -4, 6, -3, -6}, {0, 7, 6, -4, -6, -3}, {8, 0, -4, 7, -4, -7}};
        const auto& t = triads[pick(0, 2)];
        const double a = rng.next(0.3, 1.0);
        const double sign = rng.next() < 0.5 ? -1.0 : 1.0;
        const double p1 = rng.next(0.0, 2.0 * std::numbers::pi), p2 = rng.next(0.0, 2.0 * std::numbers::pi);
        waves.push_back({t[0], t[1], sign * a, p1});
        waves.push_back({t[2], t[3], sign * a * rng.next(0.85, 1.0), p2});
        waves.push_back({t[4], t[5], sign * a * rng.next(0.85, 1.0), -p1 - p2});
        label = PhaseLabel::HexSpots;
        break;
      }
      case 2: {  // square spots
        const bool diagonal = rng.next() < 0.5;
        const double a = rng.next(0.3, 1.0);
        if (diagonal) {
          waves.push_back({4, 4, a, rng.next(0.0, 6.28)});
          waves.push_back({4, -4, a * rng.next(0.8, 1.0), rng.next(0.0, 6.28)});
        } else {
          waves.push_back({6, 0, a, rng.next(0.0, 6.28)});
          waves.push_back({0, 6, a * rng.next(0.8, 1.0), rng.next(0.0, 6.28)});
        }
        label = PhaseLabel::SquareSpots;
        break;
      }
      case 3: {  // uniform state with noise well below the disorder threshold
        LabeledField lf{random_field(grid, static_cast<std::uint64_t>(rng.next() * 1e18), 1e-6), PhaseLabel::Disorder};
        out.push_back(std::move(lf));
        continue;
      }
      default: {  // four stripe families at unrelated angles: no lattice fits
        static const int dirs[][2] = {{6, 0}, {5, 4}, {2, 6}, {-3, 5}, {-5, 3}};
        const int skip = pick(0, 4);
        for (int d = 0; d < 5; ++d) {
          if (d == skip) continue;
          waves.push_back({dirs[d][0], dirs[d][1], rng.next(0.6, 1.0), rng.next(0.0, 6.28)});
        }
        label = PhaseLabel::Mixed;
        break;
      }
    }
    RealField f = superpose(grid, waves);
    const double scale = f.max_abs();
    f += random_field(grid, static_cast<std::uint64_t>(rng.next() * 1e18), noise * scale);
    f += -f.mean();
    out.push_back({std::move(f), label});
  }
  return out;
}

}  // namespace okphase::testing
