#include "okphase/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace okphase {

GridSpec::GridSpec(int n, double length) : n_(n), length_(length) {
  if (n < 8 || n % 2 != 0) {
    throw std::invalid_argument("grid size must be even and at least 8, got " + std::to_string(n));
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw std::invalid_argument("box length must be positive and finite");
  }
}

double GridSpec::wavenumber_unit() const { return 2.0 * std::numbers::pi / length_; }

// ---------------------------------------------------------------------------
// RealField

RealField::RealField(GridSpec grid) : grid_(grid), values_(grid.points(), 0.0) {}

RealField::RealField(GridSpec grid, RealVector values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.points()) {
    throw std::invalid_argument("sample count does not match grid");
  }
}

RealField RealField::from_function(GridSpec grid, const std::function<double(double, double)>& f) {
  RealField out(grid);
  const double h = grid.spacing();
  for (int i = 0; i < grid.n(); ++i) {
    for (int j = 0; j < grid.n(); ++j) out(i, j) = f(i * h, j * h);
  }
  return out;
}

RealField RealField::constant(GridSpec grid, double value) {
  RealField out(grid);
  std::fill(out.values_.begin(), out.values_.end(), value);
  return out;
}

double RealField::mean() const {
  // Kahan summation.
  double sum = 0.0, c = 0.0;
  for (double v : values_) {
    double y = v - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum / static_cast<double>(values_.size());
}

double RealField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double RealField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double RealField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool RealField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

RealField& RealField::operator+=(const RealField& other) {
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

RealField& RealField::operator-=(const RealField& other) {
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

RealField& RealField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

RealField& RealField::operator+=(double s) {
  for (double& v : values_) v += s;
  return *this;
}

RealField operator+(RealField a, const RealField& b) { return a += b; }
RealField operator-(RealField a, const RealField& b) { return a -= b; }
RealField operator*(double s, RealField a) { return a *= s; }

double integrate_product(const RealField& a, const RealField& b) {
  auto av = a.values();
  auto bv = b.values();
  double sum = 0.0;
  for (std::size_t k = 0; k < av.size(); ++k) sum += av[k] * bv[k];
  return sum * a.grid().cell_area();
}

double l2_norm(const RealField& f) { return std::sqrt(integrate_product(f, f)); }

double max_difference(const RealField& a, const RealField& b) {
  auto av = a.values();
  auto bv = b.values();
  double m = 0.0;
  for (std::size_t k = 0; k < av.size(); ++k) m = std::max(m, std::abs(av[k] - bv[k]));
  return m;
}

// ---------------------------------------------------------------------------
// SpectralField

SpectralField::SpectralField(GridSpec grid) : grid_(grid), coeffs_(grid.spectral_points()) {}

SpectralField::SpectralField(GridSpec grid, ComplexVector coeffs) : grid_(grid), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != grid_.spectral_points()) {
    throw std::invalid_argument("coefficient count does not match grid");
  }
}

Complex SpectralField::coeff(int kx, int ky) const {
  const int n = grid_.n();
  if (kx < -n / 2 || kx >= n / 2 || ky < -n / 2 || ky >= n / 2) {
    throw std::out_of_range("wavevector outside [-N/2, N/2)^2");
  }
  auto wrap = [n](int k) { return ((k % n) + n) % n; };
  if (ky >= 0) return at(wrap(kx), ky);
  // ky < 0: use v(-k) = conj(v(k)); -ky lies in (0, N/2].
  return std::conj(at(wrap(-kx), -ky));
}

double SpectralField::k_squared(int ix, int jy) const {
  const double unit = grid_.wavenumber_unit();
  const double kx = signed_wavenumber(ix, grid_.n()) * unit;
  // The ky = N/2 column is the Nyquist mode; its magnitude is N/2.
  const double ky = jy * unit;
  return kx * kx + ky * ky;
}

double SpectralField::power() const {
  const int n = grid_.n();
  const int h = grid_.half();
  double sum = 0.0;
  for (int ix = 0; ix < n; ++ix) {
    for (int jy = 0; jy < h; ++jy) sum += multiplicity(jy) * std::norm(at(ix, jy));
  }
  return sum;
}

double SpectralField::power_without_mean() const { return power() - std::norm(coeffs_[0]); }

bool SpectralField::all_finite() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

// ---------------------------------------------------------------------------
// FFT plans

namespace {

struct PlanPair {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

const PlanPair* plans_for(int n) {
  static std::map<int, std::unique_ptr<PlanPair>> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second.get();
  RealVector real(static_cast<std::size_t>(n) * n);
  ComplexVector spec(static_cast<std::size_t>(n) * (n / 2 + 1));
  auto plans = std::make_unique<PlanPair>();
  auto* c = reinterpret_cast<fftw_complex*>(spec.data());
  plans->r2c = fftw_plan_dft_r2c_2d(n, n, real.data(), c, FFTW_ESTIMATE);
  plans->c2r = fftw_plan_dft_c2r_2d(n, n, c, real.data(), FFTW_ESTIMATE);
  if (plans->r2c == nullptr || plans->c2r == nullptr) throw std::runtime_error("FFTW planning failed");
  const PlanPair* raw = plans.get();
  cache.emplace(n, std::move(plans));
  return raw;
}

}  // namespace

Fft::Fft(int n) : n_(n), plans_(plans_for(n)) {}

void Fft::forward(std::span<const double> in, std::span<Complex> out) const {
  const auto* p = static_cast<const PlanPair*>(plans_);
  // r2c does not modify its input.
  fftw_execute_dft_r2c(p->r2c, const_cast<double*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / (static_cast<double>(n_) * n_);
  for (auto& c : out) c *= scale;
}

void Fft::inverse(std::span<const Complex> in, std::span<double> out) const {
  const auto* p = static_cast<const PlanPair*>(plans_);
  thread_local ComplexVector scratch;
  scratch.assign(in.begin(), in.end());
  fftw_execute_dft_c2r(p->c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

SpectralField forward(const RealField& f) {
  if (!f.all_finite()) throw NumericalError("forward transform of a non-finite field");
  SpectralField out(f.grid());
  Fft(f.n()).forward(f.values(), out.coeffs());
  return out;
}

double conjugate_symmetry_defect(const SpectralField& v) {
  const int n = v.n();
  double defect = 0.0;
  for (int jy : {0, n / 2}) {
    for (int ix = 0; ix < n; ++ix) {
      const int mirror = (n - ix) % n;
      defect = std::max(defect, std::abs(v.at(ix, jy) - std::conj(v.at(mirror, jy))));
    }
  }
  return defect;
}

RealField inverse(const SpectralField& v) {
  if (!v.all_finite()) throw NumericalError("inverse transform of non-finite coefficients");
  double scale = 1.0;
  for (const auto& c : v.coeffs()) scale = std::max(scale, std::abs(c));
  if (conjugate_symmetry_defect(v) > 1e-10 * scale) {
    throw NumericalError("spectral coefficients are not conjugate symmetric (corrupted state)");
  }
  RealField out(v.grid());
  Fft(v.n()).inverse(v.coeffs(), out.values());
  return out;
}

SpectralField apply_multiplier(const SpectralField& v, const std::function<double(double)>& s,
                               ZeroMode zero_mode) {
  SpectralField out(v.grid());
  const int n = v.n();
  const int h = v.grid().half();
  for (int ix = 0; ix < n; ++ix) {
    for (int jy = 0; jy < h; ++jy) {
      if (ix == 0 && jy == 0) continue;
      out.at(ix, jy) = s(v.k_squared(ix, jy)) * v.at(ix, jy);
    }
  }
  if (zero_mode == ZeroMode::Pin) {
    out.set_zero_mode(0.0);
  } else {
    const double s0 = s(0.0);
    if (std::isfinite(s0)) {
      out.set_zero_mode(s0 * v.zero_mode());
    } else if (std::abs(v.zero_mode()) > 1e-12) {
      throw std::domain_error("multiplier is singular at k = 0 but the zero mode is nonzero");
    } else {
      out.set_zero_mode(0.0);
    }
  }
  return out;
}

void apply_two_thirds_dealiasing(SpectralField& v) {
  const int n = v.n();
  const int h = v.grid().half();
  const int cutoff = n / 3;
  for (int ix = 0; ix < n; ++ix) {
    const bool kx_out = std::abs(signed_wavenumber(ix, n)) > cutoff;
    for (int jy = 0; jy < h; ++jy) {
      if (kx_out || jy > cutoff) v.at(ix, jy) = 0.0;
    }
  }
}

}  // namespace okphase
