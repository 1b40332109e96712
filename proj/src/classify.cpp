#include "okphase/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "okphase/annealing.hpp"

namespace okphase {

std::string to_string(PhaseLabel label) {
  switch (label) {
    case PhaseLabel::Disorder: return "Disorder";
    case PhaseLabel::Lamellae: return "Lamellae";
    case PhaseLabel::HexSpots: return "HexSpots";
    case PhaseLabel::SquareSpots: return "SquareSpots";
    case PhaseLabel::Mixed: return "Mixed";
  }
  return "?";
}

PhaseLabel phase_label_from_string(const std::string& name) {
  for (PhaseLabel l : {PhaseLabel::Disorder, PhaseLabel::Lamellae, PhaseLabel::HexSpots, PhaseLabel::SquareSpots,
                       PhaseLabel::Mixed}) {
    if (to_string(l) == name) return l;
  }
  throw std::invalid_argument("unknown phase label '" + name + "'");
}

std::vector<double> angular_spectrum(const SpectralField& v, double k_star, double eps, int samples) {
  if (!(k_star > 0.0)) throw std::invalid_argument("angular_spectrum: k_star must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("angular_spectrum: eps must be positive");
  if (samples < 1) throw std::invalid_argument("angular_spectrum: need at least one sample");

  // Modes whose distance to the ring already kills the Gaussian are skipped.
  constexpr double kCutoff = 60.0;
  struct Mode {
    double kx, ky, mag;
  };
  std::vector<Mode> modes;
  const int n = v.n();
  const int h = v.grid().half();
  const double unit = v.grid().wavenumber_unit();
  for (int ix = 0; ix < n; ++ix) {
    for (int jy = 0; jy < h; ++jy) {
      if (ix == 0 && jy == 0) continue;
      const double mag = std::abs(v.at(ix, jy));
      if (mag == 0.0) continue;
      const double kx = unit * signed_wavenumber(ix, n);
      const double ky = unit * jy;
      const double dr = std::hypot(kx, ky) - k_star;
      if (dr * dr / eps > kCutoff) continue;
      modes.push_back({kx, ky, mag});
      // Columns other than ky = 0 and ky = N/2 stand for their conjugate too.
      if (jy != 0 && 2 * jy != n) modes.push_back({-kx, -ky, mag});
    }
  }

  std::vector<double> g(static_cast<std::size_t>(samples), 0.0);
  for (int i = 0; i < samples; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / samples;
    const double cx = k_star * std::sin(theta);
    const double cy = k_star * std::cos(theta);
    double sum = 0.0;
    for (const Mode& m : modes) {
      const double dx = m.kx - cx;
      const double dy = m.ky - cy;
      sum += std::exp(-(dx * dx + dy * dy) / eps) * m.mag;
    }
    g[static_cast<std::size_t>(i)] = sum;
  }
  return g;
}

int count_peaks(const std::vector<double>& g, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("count_peaks: fraction must lie in (0, 1)");
  const std::size_t n = g.size();
  if (n == 0) return 0;
  // Rotate so the sequence starts at the beginning of a run of equal values.
  std::size_t start = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (g[i] != g[(i + n - 1) % n]) {
      start = i;
      break;
    }
  }
  if (start == n) return 0;
  std::vector<double> runs;
  for (std::size_t k = 0; k < n; ++k) {
    const double value = g[(start + k) % n];
    if (runs.empty() || value != runs.back()) runs.push_back(value);
  }
  const double top = *std::max_element(runs.begin(), runs.end());
  const std::size_t r = runs.size();
  int peaks = 0;
  for (std::size_t k = 0; k < r; ++k) {
    const double prev = runs[(k + r - 1) % r];
    const double next = runs[(k + 1) % r];
    if (runs[k] > prev && runs[k] > next && runs[k] > fraction * top) ++peaks;
  }
  return peaks;
}

Classification classify(const SpectralField& u_bar_hat) {
  Classification out;
  if (u_bar_hat.power_without_mean() < kDisorderPower) return out;
  const auto k_star = dominant_mode(u_bar_hat);
  if (!k_star) return out;
  out.k_star = *k_star;
  const double eps = (0.2 * out.k_star) * (0.2 * out.k_star);
  out.peaks = count_peaks(angular_spectrum(u_bar_hat, out.k_star, eps));
  switch (out.peaks) {
    case 2: out.label = PhaseLabel::Lamellae; break;
    case 4: out.label = PhaseLabel::SquareSpots; break;
    case 6: out.label = PhaseLabel::HexSpots; break;
    default: out.label = PhaseLabel::Mixed; break;
  }
  return out;
}

Classification classify(const RealField& u_bar) {
  SpectralField hat = forward(u_bar);
  hat.set_zero_mode(0.0);
  return classify(hat);
}

}  // namespace okphase
