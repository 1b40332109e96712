#include "okphase/asymptotics.hpp"

#include <Eigen/Eigenvalues>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "okphase/field_io.hpp"

namespace okphase {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kInf = std::numeric_limits<double>::infinity();

double min_eig(const AmplitudeState& s) { return hessian_eigs(s)[0]; }

AmplitudeState at(double a, double b, double c, double beta) { return {a, b, c, beta}; }

}  // namespace

double odt(double gamma) {
  if (!(gamma > 2.0)) throw std::invalid_argument("odt: gamma must exceed 2");
  return std::sqrt((gamma - 2.0) / (3.0 * gamma));
}

double odt_inverse(double m) {
  if (!(3.0 * m * m < 1.0)) throw std::invalid_argument("odt_inverse: requires 3 m^2 < 1");
  return 2.0 / (1.0 - 3.0 * m * m);
}

Vec3 lyapunov_gradient(const AmplitudeState& s) {
  const double lin = -6.0 * (1.0 - s.beta * s.beta);
  const double cub = 6.0 * kSqrt2 * s.beta;
  const double a2 = s.a * s.a, b2 = s.b * s.b, c2 = s.c * s.c;
  return {lin * s.a + cub * s.b * s.c + 6.0 * (b2 + c2) * s.a + 3.0 * a2 * s.a,
          lin * s.b + cub * s.a * s.c + 6.0 * (a2 + c2) * s.b + 3.0 * b2 * s.b,
          lin * s.c + cub * s.a * s.b + 6.0 * (a2 + b2) * s.c + 3.0 * c2 * s.c};
}

Vec3 amplitude_rhs(const AmplitudeState& s) {
  const double lin = 6.0 * (1.0 - s.beta * s.beta);
  const double cub = 6.0 * kSqrt2 * s.beta;
  const double a2 = s.a * s.a, b2 = s.b * s.b, c2 = s.c * s.c;
  return {lin * s.a - cub * s.b * s.c - 6.0 * (b2 + c2) * s.a - 3.0 * a2 * s.a,
          lin * s.b - cub * s.a * s.c - 6.0 * (a2 + c2) * s.b - 3.0 * b2 * s.b,
          lin * s.c - cub * s.a * s.b - 6.0 * (a2 + b2) * s.c - 3.0 * c2 * s.c};
}

double lyapunov(const AmplitudeState& s) {
  const double a2 = s.a * s.a, b2 = s.b * s.b, c2 = s.c * s.c;
  return -3.0 * (1.0 - s.beta * s.beta) * (a2 + b2 + c2) + 6.0 * kSqrt2 * s.beta * s.a * s.b * s.c +
         3.0 * (a2 * b2 + b2 * c2 + a2 * c2) + 0.75 * (a2 * a2 + b2 * b2 + c2 * c2);
}

double gradient_consistency(const AmplitudeState& s) {
  const Vec3 f = amplitude_rhs(s);
  const Vec3 g = lyapunov_gradient(s);
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(f[i] + g[i]));
  return worst;
}

std::array<double, 9> lyapunov_hessian(const AmplitudeState& s) {
  const double lin = -6.0 * (1.0 - s.beta * s.beta);
  const double cub = 6.0 * kSqrt2 * s.beta;
  const double a2 = s.a * s.a, b2 = s.b * s.b, c2 = s.c * s.c;
  const double haa = lin + 6.0 * (b2 + c2) + 9.0 * a2;
  const double hbb = lin + 6.0 * (a2 + c2) + 9.0 * b2;
  const double hcc = lin + 6.0 * (a2 + b2) + 9.0 * c2;
  const double hab = cub * s.c + 12.0 * s.a * s.b;
  const double hac = cub * s.b + 12.0 * s.a * s.c;
  const double hbc = cub * s.a + 12.0 * s.b * s.c;
  return {haa, hab, hac, hab, hbb, hbc, hac, hbc, hcc};
}

Vec3 hessian_eigs(const AmplitudeState& s) {
  const auto h = lyapunov_hessian(s);
  Eigen::Matrix3d m;
  m << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8];
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(m, Eigen::EigenvaluesOnly);
  const Eigen::Vector3d ev = solver.eigenvalues();
  return {ev[0], ev[1], ev[2]};
}

std::string to_string(AmplitudeFamily family) {
  switch (family) {
    case AmplitudeFamily::Disorder: return "Disorder";
    case AmplitudeFamily::Lamellae: return "Lamellae";
    case AmplitudeFamily::TriangularSpots: return "TriangularSpots";
    case AmplitudeFamily::HexSpots: return "HexSpots";
    case AmplitudeFamily::ABnotC: return "ABnotC";
  }
  return "?";
}

std::optional<std::array<double, 2>> hex_amplitudes(double beta) {
  const double disc = 5.0 - 4.0 * beta * beta;
  if (disc < 0.0) return std::nullopt;
  const double r = std::sqrt(disc);
  return std::array<double, 2>{-(kSqrt2 / 5.0) * (beta + r), -(kSqrt2 / 5.0) * (beta - r)};
}

FixedPointSet fixed_points(double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("fixed_points: beta must be non-negative");
  FixedPointSet set;
  set.beta = beta;
  set.points.push_back({AmplitudeFamily::Disorder, at(0, 0, 0, beta), "origin"});

  const double s = 1.0 - beta * beta;
  if (s > 0.0) {
    const double a = std::sqrt(2.0 * s);
    set.points.push_back({AmplitudeFamily::Lamellae, at(a, 0, 0, beta), "a > 0"});
    set.points.push_back({AmplitudeFamily::Lamellae, at(-a, 0, 0, beta), "a < 0"});
  } else {
    set.omitted.push_back("Lamellae: requires beta < 1");
  }

  if (beta == 0.0) {
    const double a = std::sqrt(2.0 / 3.0);
    set.points.push_back({AmplitudeFamily::TriangularSpots, at(a, a, 0, beta), "a = b > 0"});
    set.points.push_back({AmplitudeFamily::TriangularSpots, at(-a, -a, 0, beta), "a = b < 0"});
  } else {
    set.omitted.push_back("TriangularSpots: c' = -6 sqrt2 beta a^2 does not vanish for beta > 0");
  }

  if (const auto hex = hex_amplitudes(beta)) {
    set.points.push_back({AmplitudeFamily::HexSpots, at((*hex)[0], (*hex)[0], (*hex)[0], beta), "root beta + sqrt(5 - 4 beta^2)"});
    set.points.push_back({AmplitudeFamily::HexSpots, at((*hex)[1], (*hex)[1], (*hex)[1], beta), "root beta - sqrt(5 - 4 beta^2)"});
  } else {
    set.omitted.push_back("HexSpots: requires beta <= sqrt5/2");
  }

  if (5.0 * beta * beta < 1.0) {
    const double a = std::sqrt(2.0 * (1.0 - 5.0 * beta * beta) / 3.0);
    const double c = 2.0 * kSqrt2 * beta;
    set.points.push_back({AmplitudeFamily::ABnotC, at(a, a, -c, beta), "a = b, c = -c_bar"});
    set.points.push_back({AmplitudeFamily::ABnotC, at(a, -a, c, beta), "a = -b, c = c_bar"});
  } else {
    set.omitted.push_back("ABnotC: requires beta < 1/sqrt5");
  }
  return set;
}

StabilityRegions stability_regions() {
  const auto t = stability_thresholds();
  StabilityRegions r;
  r.lamellae_linear = {0.0, t[0]};
  r.hex_linear = {t[1], t[2]};
  r.disorder_linear = {t[3], kInf};
  r.lamellae_global = {0.0, t[4]};
  r.hex_global = {t[4], t[5]};
  r.disorder_global = {t[5], kInf};
  return r;
}

std::array<double, 6> stability_thresholds() {
  return {1.0 / std::sqrt(5.0),
          1.0 / std::sqrt(17.0),
          std::sqrt(5.0) / 2.0,
          1.0,
          std::sqrt(551.0 - 174.0 * std::sqrt(6.0)) / 29.0,
          3.0 * std::sqrt(5.0 / 37.0)};
}

namespace {

struct ScanSample {
  bool lamellae_stable = false;
  bool hex_stable = false;
  bool disorder_stable = false;
  AmplitudeFamily global = AmplitudeFamily::Disorder;
};

ScanSample scan_sample(double beta) {
  ScanSample out;
  double best_v = kInf;
  for (const FixedPoint& p : fixed_points(beta).points) {
    if (!(min_eig(p.state) > 0.0)) continue;
    switch (p.family) {
      case AmplitudeFamily::Lamellae: out.lamellae_stable = true; break;
      case AmplitudeFamily::HexSpots: out.hex_stable = true; break;
      case AmplitudeFamily::Disorder: out.disorder_stable = true; break;
      default: break;
    }
    const double v = lyapunov(p.state);
    if (v < best_v) {
      best_v = v;
      out.global = p.family;
    }
  }
  return out;
}

}  // namespace

AmplitudeFamily global_minimizer(double beta) { return scan_sample(beta).global; }

std::vector<AmplitudeFamily> linearly_stable(double beta) {
  const ScanSample s = scan_sample(beta);
  std::vector<AmplitudeFamily> out;
  if (s.lamellae_stable) out.push_back(AmplitudeFamily::Lamellae);
  if (s.hex_stable) out.push_back(AmplitudeFamily::HexSpots);
  if (s.disorder_stable) out.push_back(AmplitudeFamily::Disorder);
  return out;
}

std::array<double, 6> scan_thresholds(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi > lo)) throw std::invalid_argument("scan_thresholds: empty range");
  std::array<double, 6> out;
  out.fill(std::numeric_limits<double>::quiet_NaN());
  const auto count = static_cast<long>(std::floor((hi - lo) / step));
  ScanSample prev = scan_sample(lo);
  for (long i = 1; i <= count; ++i) {
    const double beta = lo + static_cast<double>(i) * step;
    const ScanSample cur = scan_sample(beta);
    const double mid = beta - 0.5 * step;
    if (prev.lamellae_stable && !cur.lamellae_stable) out[0] = mid;
    if (!prev.hex_stable && cur.hex_stable) out[1] = mid;
    if (prev.hex_stable && !cur.hex_stable) out[2] = mid;
    if (!prev.disorder_stable && cur.disorder_stable) out[3] = mid;
    if (prev.global == AmplitudeFamily::Lamellae && cur.global == AmplitudeFamily::HexSpots) out[4] = mid;
    if (prev.global == AmplitudeFamily::HexSpots && cur.global == AmplitudeFamily::Disorder) out[5] = mid;
    prev = cur;
  }
  return out;
}

AmplitudeTrajectory amplitude_flow(const AmplitudeState& s0, double t_end, double tolerance) {
  namespace ode = boost::numeric::odeint;
  if (!(t_end > 0.0)) throw std::invalid_argument("amplitude_flow: T must be positive");
  using State = std::array<double, 3>;
  const double beta = s0.beta;
  auto system = [beta](const State& x, State& dxdt, double) {
    dxdt = amplitude_rhs({x[0], x[1], x[2], beta});
  };
  AmplitudeTrajectory traj;
  auto observer = [&](const State& x, double t) {
    const AmplitudeState s{x[0], x[1], x[2], beta};
    traj.t.push_back(t);
    traj.states.push_back(s);
    traj.v.push_back(lyapunov(s));
  };
  State x{s0.a, s0.b, s0.c};
  auto stepper = ode::make_dense_output(tolerance, tolerance, ode::runge_kutta_dopri5<State>());
  ode::integrate_adaptive(stepper, system, x, 0.0, t_end, 1e-3, observer);
  return traj;
}

AnsatzLattice ansatz_lattice(const GridSpec& grid) {
  const double s = grid.length() / (2.0 * std::numbers::pi);
  const std::array<std::array<double, 2>, 3> exact{{{kSqrt2, 0.0},
                                                    {-1.0 / kSqrt2, std::sqrt(1.5)},
                                                    {-1.0 / kSqrt2, -std::sqrt(1.5)}}};
  AnsatzLattice lat;
  for (std::size_t m = 0; m < 3; ++m) {
    double err2 = 0.0;
    for (std::size_t d = 0; d < 2; ++d) {
      const double target = exact[m][d] * s;
      const double snapped = std::round(target);
      lat.index[m][d] = static_cast<int>(snapped);
      const double dk = (snapped - target) / s;
      err2 += dk * dk;
    }
    lat.relative_error[m] = std::sqrt(err2) / kSqrt2;
  }
  return lat;
}

double hex_box_length(double min_length, double tolerance) {
  for (int p = 1; p < 100000; ++p) {
    const double length = 2.0 * std::numbers::pi * kSqrt2 * p;
    if (length < min_length) continue;
    const double q = std::sqrt(3.0) * p;
    if (std::abs(q - std::round(q)) / (2.0 * p) <= tolerance) return length;
  }
  throw std::invalid_argument("hex_box_length: no commensurate box found");
}

RealField ansatz_field(const AmplitudeState& s, double gamma, const GridSpec& grid) {
  const double scale = odt(gamma);
  const AnsatzLattice lat = ansatz_lattice(grid);
  const std::array<double, 3> amp{s.a, s.b, s.c};
  for (std::size_t m = 0; m < 3; ++m) {
    if (amp[m] != 0.0 && lat.relative_error[m] > kAnsatzTolerance) {
      throw std::invalid_argument("ansatz_field: box length " + format_double(grid.length()) +
                                  " is incommensurate with basis mode " + std::to_string(m + 1));
    }
  }
  const double unit = grid.wavenumber_unit();
  const int n = grid.n();
  RealField out(grid);
  for (int i = 0; i < n; ++i) {
    const double x = i * grid.spacing();
    for (int j = 0; j < n; ++j) {
      const double y = j * grid.spacing();
      double v = 0.0;
      for (std::size_t m = 0; m < 3; ++m) {
        if (amp[m] == 0.0) continue;
        v += amp[m] * kSqrt2 * std::cos(unit * (lat.index[m][0] * x + lat.index[m][1] * y));
      }
      out(i, j) = scale * v;
    }
  }
  // Each cosine has an exact zero grid mean; remove rounding residue.
  out += -out.mean();
  return out;
}

std::string lyapunov_landscape_csv(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("lyapunov_landscape_csv: empty range");
  std::ostringstream os;
  os << "beta,V_disorder,V_lamellae,V_hex_plus,V_hex_minus,V_abnotc,linear_stable,global\n";
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  auto field = [](std::optional<double> v) { return v ? format_double(*v) : std::string(); };
  for (long i = 0; i <= count; ++i) {
    const double beta = lo + static_cast<double>(i) * step;
    const FixedPointSet set = fixed_points(beta);
    std::optional<double> dis, lam, hex_plus, hex_minus, abc;
    for (const FixedPoint& p : set.points) {
      const double v = lyapunov(p.state);
      switch (p.family) {
        case AmplitudeFamily::Disorder: dis = v; break;
        case AmplitudeFamily::Lamellae: lam = v; break;
        case AmplitudeFamily::HexSpots: (hex_plus ? hex_minus : hex_plus) = v; break;
        case AmplitudeFamily::ABnotC: abc = v; break;
        default: break;
      }
    }
    std::string stable;
    for (AmplitudeFamily f : linearly_stable(beta)) stable += (stable.empty() ? "" : "|") + to_string(f);
    os << format_double(beta) << ',' << field(dis) << ',' << field(lam) << ',' << field(hex_plus) << ','
       << field(hex_minus) << ',' << field(abc) << ',' << stable << ',' << to_string(global_minimizer(beta))
       << '\n';
  }
  return os.str();
}

}  // namespace okphase
