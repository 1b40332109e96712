#include "okphase/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "okphase/asymptotics.hpp"
#include "okphase/classify.hpp"
#include "okphase/dynamics.hpp"
#include "okphase/energy.hpp"
#include "okphase/field_io.hpp"
#include "okphase/pipeline.hpp"

namespace okphase {

namespace {

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

struct ScheduleFlags {
  std::optional<double> rho, t1, t2, t3, t4, t5;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--rho", rho, "spectral weighting strength in [0, 1)");
    cmd.add_option("--t1", t1, "end of the plain ETDRK4 phase");
    cmd.add_option("--t2", t2, "end of the weighting phase");
    cmd.add_option("--t3", t3, "end of the noise phase");
    cmd.add_option("--t4", t4, "end of the first gradient-stable phase");
    cmd.add_option("--t5", t5, "final time");
  }

  void apply(Schedule& s) const {
    if (rho) s.rho = *rho;
    if (t1) s.t1 = *t1;
    if (t2) s.t2 = *t2;
    if (t3) s.t3 = *t3;
    if (t4) s.t4 = *t4;
    if (t5) s.t5 = *t5;
  }
};

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

int run_command(double gamma, double m, std::uint64_t seed, int n, const ScheduleFlags& flags,
                const std::string& out_dir, std::ostream& out, std::ostream& err) {
  require(gamma > 0.0, "--gamma must be positive");
  require(std::abs(m) < 1.0, "--m must satisfy |m| < 1");
  RunOptions options;
  options.n = n;
  flags.apply(options.schedule);
  options.schedule.validate();
  GridSpec(n, 1.0);  // validates n before any compute
  if (!out_dir.empty()) options.out_dir = out_dir;
  const RunRecord rec = run_protocol(gamma, m, seed, options);
  out << record_csv_header() << '\n' << record_csv_row(rec) << '\n';
  if (rec.aborted) {
    err << "run aborted: " << rec.failure << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

int asymptotics_command(bool beta_scan, const std::string& landscape, std::ostream& out) {
  static const char* const names[] = {"lamellae_linear_upper", "hex_linear_lower",  "hex_linear_upper",
                                      "disorder_linear_lower", "lamellae_hex_global", "hex_disorder_global"};
  const auto closed = stability_thresholds();
  std::array<double, 6> scanned{};
  if (beta_scan) scanned = scan_thresholds();
  for (std::size_t i = 0; i < closed.size(); ++i) {
    out << names[i] << ' ' << fixed(closed[i], 6);
    if (beta_scan) out << ' ' << fixed(scanned[i], 6);
    out << '\n';
  }
  if (!landscape.empty()) {
    std::ofstream csv(landscape, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + landscape);
    csv << lyapunov_landscape_csv(0.0, 1.3, 0.005);
  }
  return kExitOk;
}

int classify_command(const std::string& path, std::ostream& out) {
  const RealField u = read_field_dump(path);
  const Classification c = classify(u);
  out << to_string(c.label) << ' ' << c.peaks << ' ' << fixed(c.k_star, 3) << '\n';
  return kExitOk;
}

int energy_command(const std::string& path, double gamma, double m, std::ostream& out) {
  require(gamma > 0.0, "--gamma must be positive");
  const RealField u = read_field_dump(path);
  const EnergyBreakdown e = total_energy(u, gamma, m);
  out << "I1,I2,I3,E_paper,E_diss\n"
      << format_double(e.i1) << ',' << format_double(e.i2) << ',' << format_double(e.i3) << ','
      << format_double(e.paper) << ',' << format_double(e.dissipated) << '\n';
  return kExitOk;
}

int continue_command(const std::string& from, double dm, int steps, const std::string& out_path, std::ostream& out,
                     std::ostream& err) {
  require(steps >= 0, "--steps must be non-negative");
  const Checkpoint cp = read_checkpoint(from);
  const Branch branch = continue_in_m(cp.state.u_bar, cp.state.gamma, cp.state.m, dm, steps);
  std::ostringstream csv;
  csv << "m,E_paper,E_diss,residual,newton_iterations,half_range\n";
  for (const BranchPoint& p : branch.points) {
    csv << format_double(p.m) << ',' << format_double(p.energy.paper) << ',' << format_double(p.energy.dissipated)
        << ',' << format_double(p.residual) << ',' << p.newton_iterations << ',' << format_double(half_range(p.u_bar))
        << '\n';
  }
  out << csv.str();
  if (!out_path.empty()) {
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + out_path);
    file << csv.str();
  }
  if (branch.truncated) err << "branch truncated: " << branch.failure << '\n';
  return kExitOk;
}

struct SweepFlags {
  std::optional<double> gamma_min, gamma_max, m_min, m_max;
  std::optional<int> count, rounds, jobs, n;
  std::optional<std::uint64_t> seed;
  std::string out, config, run_dirs;
  ScheduleFlags schedule;
};

int sweep_command(const SweepFlags& f, std::ostream& out) {
  SweepOptions options;
  if (const char* env = std::getenv("OKPHASE_JOBS"); env != nullptr && *env != '\0') {
    options.jobs = std::stoi(env);
  }
  if (!f.config.empty()) options = sweep_options_from(read_key_values(f.config), options);
  if (f.gamma_min) options.region.gamma_min = *f.gamma_min;
  if (f.gamma_max) options.region.gamma_max = *f.gamma_max;
  if (f.m_min) options.region.m_min = *f.m_min;
  if (f.m_max) options.region.m_max = *f.m_max;
  if (f.count) options.count = *f.count;
  if (f.rounds) options.rounds = *f.rounds;
  if (f.jobs) options.jobs = *f.jobs;
  if (f.n) options.run.n = *f.n;
  if (f.seed) options.master_seed = *f.seed;
  if (!f.out.empty()) options.csv = f.out;
  if (!f.run_dirs.empty()) options.run_dirs = f.run_dirs;
  f.schedule.apply(options.run.schedule);
  require(options.jobs >= 1, "jobs must be at least 1");
  GridSpec(options.run.n, 1.0);
  const PhaseDiagram diagram = sweep(options);
  if (options.csv.empty()) {
    out << record_csv_header() << '\n';
    for (const RunRecord& r : diagram.records) out << record_csv_row(r) << '\n';
  } else {
    out << diagram.records.size() << " runs in " << diagram.generations << " generations written to "
        << options.csv.string() << '\n';
  }
  return kExitOk;
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phase diagrams of the 2D Cahn-Hilliard energy with long-range interaction"};
  app.require_subcommand(1);

  double gamma = 0.0, m = 0.0;
  std::uint64_t seed = 1;
  int n = 128;
  std::string out_dir;
  ScheduleFlags run_schedule;
  CLI::App* run = app.add_subcommand("run", "minimize at one (gamma, m)");
  run->add_option("--gamma", gamma, "interaction parameter")->required();
  run->add_option("--m", m, "mean of u")->required();
  run->add_option("--seed", seed, "random seed");
  run->add_option("--n", n, "grid points per side");
  run->add_option("--out", out_dir, "directory for checkpoints, trace and preview");
  run_schedule.add_to(*run);

  SweepFlags sf;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "sample the (m, gamma) plane");
  sweep_cmd->add_option("--gamma-min", sf.gamma_min);
  sweep_cmd->add_option("--gamma-max", sf.gamma_max);
  sweep_cmd->add_option("--m-min", sf.m_min);
  sweep_cmd->add_option("--m-max", sf.m_max);
  sweep_cmd->add_option("--count", sf.count, "initial random points");
  sweep_cmd->add_option("--rounds", sf.rounds, "refinement rounds");
  sweep_cmd->add_option("--jobs", sf.jobs, "worker threads (default: OKPHASE_JOBS or 1)");
  sweep_cmd->add_option("--seed", sf.seed, "master seed");
  sweep_cmd->add_option("--n", sf.n, "grid points per side");
  sweep_cmd->add_option("--out", sf.out, "CSV output path");
  sweep_cmd->add_option("--config", sf.config, "key=value master config");
  sweep_cmd->add_option("--run-dirs", sf.run_dirs, "directory for per-run outputs");
  sf.schedule.add_to(*sweep_cmd);

  std::string from, branch_out;
  double dm = 0.01;
  int steps = 10;
  CLI::App* cont = app.add_subcommand("continue", "continue a stationary state in m");
  cont->add_option("--from", from, "checkpoint")->required();
  cont->add_option("--dm", dm, "step in m");
  cont->add_option("--steps", steps, "number of steps");
  cont->add_option("--out", branch_out, "branch CSV path");

  bool beta_scan = false;
  std::string landscape;
  CLI::App* asym = app.add_subcommand("asymptotics", "stability thresholds of the amplitude equations");
  asym->add_flag("--beta-scan", beta_scan, "also recover the thresholds by scanning beta");
  asym->add_option("--landscape", landscape, "write Lyapunov values of the fixed points as CSV");

  std::string field_file;
  CLI::App* cls = app.add_subcommand("classify", "label a field dump");
  cls->add_option("field", field_file, "field dump")->required();

  std::string energy_file;
  double e_gamma = 0.0, e_m = 0.0;
  CLI::App* en = app.add_subcommand("energy", "energy of a field dump");
  en->add_option("field", energy_file, "field dump")->required();
  en->add_option("--gamma", e_gamma)->required();
  en->add_option("--m", e_m)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*run) return run_command(gamma, m, seed, n, run_schedule, out_dir, out, err);
    if (*sweep_cmd) return sweep_command(sf, out);
    if (*cont) return continue_command(from, dm, steps, branch_out, out, err);
    if (*asym) return asymptotics_command(beta_scan, landscape, out);
    if (*cls) return classify_command(field_file, out);
    if (*en) return energy_command(energy_file, e_gamma, e_m, out);
  } catch (const NumericalError& e) {
    err << "numerical abort: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}

int parse_and_dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return parse_and_dispatch(args, std::cout, std::cerr);
}

}  // namespace okphase
