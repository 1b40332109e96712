#pragma once

/// @file spectral.hpp
/// @brief Periodic N x N grids, real and spectral fields, and the 2D DFT pair.
///
/// Conventions used throughout the library:
///  - A RealField stores samples f(x_i, y_j) at x_i = i L / N, y_j = j L / N,
///    row-major with the x index i outermost: values[i * N + j].
///  - forward() carries the 1/N^2 normalization, so the zero mode is the
///    spatial mean; inverse() is unnormalized.
///  - A SpectralField stores the non-redundant half spectrum of a real field:
///    kx over the full range (FFT order), ky in [0, N/2]. Any integer
///    wavevector in [-N/2, N/2)^2 is reachable through coeff(), which applies
///    conjugate symmetry. Physical wavevectors are (2 pi / L) k.

#include <complex>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <limits>
#include <new>
#include <span>
#include <stdexcept>
#include <vector>

namespace okphase {

/// Cache-line aligned allocator so every buffer satisfies the alignment the
/// FFT plans were created with.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t alignment = 64;

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t count) {
    std::size_t bytes = count * sizeof(T);
    bytes = (bytes + alignment - 1) / alignment * alignment;
    void* p = std::aligned_alloc(alignment, bytes == 0 ? alignment : bytes);
    if (p == nullptr) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using RealVector = std::vector<double, AlignedAllocator<double>>;
using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex, AlignedAllocator<Complex>>;

/// Raised when a field or a time step leaves the finite range.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Square periodic box [0, L)^2 sampled with N points per side.
class GridSpec {
 public:
  GridSpec(int n, double length);

  int n() const { return n_; }
  double length() const { return length_; }
  std::size_t points() const { return static_cast<std::size_t>(n_) * n_; }
  /// Number of stored ky columns in the half spectrum (N/2 + 1).
  int half() const { return n_ / 2 + 1; }
  std::size_t spectral_points() const { return static_cast<std::size_t>(n_) * half(); }
  double spacing() const { return length_ / n_; }
  double cell_area() const { return spacing() * spacing(); }
  double area() const { return length_ * length_; }
  /// 2 pi / L, the physical wavenumber of integer index 1.
  double wavenumber_unit() const;

  /// Same samples, different box length.
  GridSpec with_length(double length) const { return GridSpec(n_, length); }

  bool operator==(const GridSpec&) const = default;

 private:
  int n_;
  double length_;
};

/// Integer wavenumber stored at FFT-ordered index `index` (range [-N/2, N/2)).
inline int signed_wavenumber(int index, int n) { return index < n / 2 ? index : index - n; }

/// Real samples on a GridSpec.
class RealField {
 public:
  explicit RealField(GridSpec grid);
  RealField(GridSpec grid, RealVector values);

  /// Samples f(x, y) at the grid nodes.
  static RealField from_function(GridSpec grid, const std::function<double(double, double)>& f);
  static RealField constant(GridSpec grid, double value);

  const GridSpec& grid() const { return grid_; }
  int n() const { return grid_.n(); }

  double& operator()(int i, int j) { return values_[static_cast<std::size_t>(i) * grid_.n() + j]; }
  double operator()(int i, int j) const { return values_[static_cast<std::size_t>(i) * grid_.n() + j]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  RealVector& storage() { return values_; }
  const RealVector& storage() const { return values_; }

  double mean() const;
  double min() const;
  double max() const;
  double max_abs() const;
  bool all_finite() const;

  /// Replaces the box length without touching the samples.
  void rescale_box(double length) { grid_ = grid_.with_length(length); }

  RealField& operator+=(const RealField& other);
  RealField& operator-=(const RealField& other);
  RealField& operator*=(double s);
  RealField& operator+=(double s);

 private:
  GridSpec grid_;
  RealVector values_;
};

RealField operator+(RealField a, const RealField& b);
RealField operator-(RealField a, const RealField& b);
RealField operator*(double s, RealField a);

/// Grid inner product sum_j a_j b_j times the cell area, i.e. the rectangle
/// rule for the integral of a*b over the box.
double integrate_product(const RealField& a, const RealField& b);
/// Continuous L2 norm over the physical box (rectangle rule).
double l2_norm(const RealField& f);
/// Largest |a - b| over the grid.
double max_difference(const RealField& a, const RealField& b);

/// Half-spectrum Fourier coefficients of a real field.
class SpectralField {
 public:
  explicit SpectralField(GridSpec grid);
  SpectralField(GridSpec grid, ComplexVector coeffs);

  const GridSpec& grid() const { return grid_; }
  int n() const { return grid_.n(); }

  /// Storage access: ix in [0, N) (FFT order), jy in [0, N/2].
  Complex& at(int ix, int jy) { return coeffs_[static_cast<std::size_t>(ix) * grid_.half() + jy]; }
  Complex at(int ix, int jy) const { return coeffs_[static_cast<std::size_t>(ix) * grid_.half() + jy]; }

  /// Coefficient of integer wavevector (kx, ky), each in [-N/2, N/2).
  Complex coeff(int kx, int ky) const;

  std::span<Complex> coeffs() { return coeffs_; }
  std::span<const Complex> coeffs() const { return coeffs_; }
  ComplexVector& storage() { return coeffs_; }
  const ComplexVector& storage() const { return coeffs_; }

  /// Physical |k|^2 of the stored mode (ix, jy).
  double k_squared(int ix, int jy) const;
  /// Multiplicity of a stored column in the full spectrum (1 for ky = 0 and
  /// ky = N/2, 2 otherwise).
  double multiplicity(int jy) const { return (jy == 0 || 2 * jy == grid_.n()) ? 1.0 : 2.0; }

  Complex zero_mode() const { return coeffs_[0]; }
  void set_zero_mode(Complex value) { coeffs_[0] = value; }

  /// sum over the full spectrum of |v_k|^2 (equals the mean of f^2 for the
  /// field f this spectrum came from).
  double power() const;
  /// As power() but with the zero mode left out.
  double power_without_mean() const;
  bool all_finite() const;

  void rescale_box(double length) { grid_ = grid_.with_length(length); }

 private:
  GridSpec grid_;
  ComplexVector coeffs_;
};

/// Thread-safe FFTW-backed transform pair for one grid size. Plans are cached
/// per N and shared by all instances.
class Fft {
 public:
  explicit Fft(int n);

  int n() const { return n_; }
  /// out = (1/N^2) DFT(in); `out` has N*(N/2+1) entries.
  void forward(std::span<const double> in, std::span<Complex> out) const;
  /// out = inverse DFT(in) without normalization; `in` is left intact.
  void inverse(std::span<const Complex> in, std::span<double> out) const;

 private:
  int n_;
  const void* plans_;
};

SpectralField forward(const RealField& f);

/// Inverse transform. Self-conjugate coefficients whose imaginary parts (or
/// conjugate mismatch) exceed 1e-10 relative to the largest coefficient are
/// rejected as corrupted state; smaller residue is discarded.
RealField inverse(const SpectralField& v);

/// Maximum conjugate-symmetry defect among the self-conjugate columns.
double conjugate_symmetry_defect(const SpectralField& v);

enum class ZeroMode {
  Keep,  ///< evaluate the multiplier at |k|^2 = 0
  Pin,   ///< force the zero-mode output to 0
};

/// Multiplies each coefficient by s(|k|^2) at its physical wavevector.
/// A multiplier that is not finite at k = 0 requires either ZeroMode::Pin or
/// a vanishing zero mode; otherwise std::domain_error is thrown.
SpectralField apply_multiplier(const SpectralField& v, const std::function<double(double)>& s,
                               ZeroMode zero_mode = ZeroMode::Keep);

/// Common multipliers.
namespace multiplier {
inline double laplacian(double k2) { return -k2; }
inline double bilaplacian(double k2) { return k2 * k2; }
inline double inverse_negative_laplacian(double k2) {
  return k2 == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / k2;
}
}  // namespace multiplier

/// 2/3-rule mask: zeroes every mode with |kx| > N/3 or |ky| > N/3.
void apply_two_thirds_dealiasing(SpectralField& v);

}  // namespace okphase
