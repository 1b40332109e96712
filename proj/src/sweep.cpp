#include <atomic>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "okphase/annealing.hpp"
#include "okphase/pipeline.hpp"

namespace okphase {

double SweepRegion::diameter() const { return std::hypot(gamma_max - gamma_min, m_max - m_min); }

bool SweepRegion::contains(double gamma, double m) const {
  return gamma >= gamma_min && gamma <= gamma_max && m >= m_min && m <= m_max;
}

std::vector<SweepPoint> initial_points(const SweepRegion& region, int count, std::uint64_t master_seed) {
  if (count < 1) throw std::invalid_argument("sweep: need at least one initial point");
  UniformStream stream(derive_seed(master_seed, 0x5eed));
  std::vector<SweepPoint> points;
  points.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    SweepPoint p;
    p.m = stream.next(region.m_min, region.m_max);
    p.gamma = stream.next(region.gamma_min, region.gamma_max);
    p.seed = derive_seed(master_seed, static_cast<std::uint64_t>(i));
    points.push_back(p);
  }
  return points;
}

std::vector<SweepPoint> refinement_points(const std::vector<SweepPoint>& points,
                                          const std::vector<RunRecord>& records, double radius, int generation,
                                          std::uint64_t master_seed) {
  if (points.size() != records.size()) throw std::invalid_argument("refinement_points: size mismatch");
  std::vector<SweepPoint> added;
  auto taken = [&](double gamma, double m) {
    auto near = [&](const SweepPoint& q) { return std::hypot(q.gamma - gamma, q.m - m) < 1e-9; };
    for (const SweepPoint& q : points) {
      if (near(q)) return true;
    }
    for (const SweepPoint& q : added) {
      if (near(q)) return true;
    }
    return false;
  };
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (records[i].aborted) continue;
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (records[j].aborted) continue;
      if (records[i].classification.label == records[j].classification.label) continue;
      if (std::hypot(points[i].gamma - points[j].gamma, points[i].m - points[j].m) >= radius) continue;
      SweepPoint mid;
      mid.gamma = 0.5 * (points[i].gamma + points[j].gamma);
      mid.m = 0.5 * (points[i].m + points[j].m);
      if (taken(mid.gamma, mid.m)) continue;
      mid.generation = generation;
      mid.seed = derive_seed(master_seed, points.size() + added.size());
      added.push_back(mid);
    }
  }
  return added;
}

std::vector<RunRecord> run_points(const std::vector<SweepPoint>& points, const RunOptions& options, int jobs,
                                  const std::function<void(std::size_t, const RunRecord&)>& on_record) {
  const std::size_t total = points.size();
  std::vector<std::optional<RunRecord>> slots(total);
  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (std::size_t i = next++; i < total; i = next++) {
      RunRecord rec;
      try {
        rec = run_protocol(points[i].gamma, points[i].m, points[i].seed, options);
      } catch (const std::exception& e) {
        rec.gamma = points[i].gamma;
        rec.m = points[i].m;
        rec.seed = points[i].seed;
        rec.aborted = true;
        rec.failure = e.what();
      }
      std::lock_guard<std::mutex> lock(mutex);
      slots[i] = std::move(rec);
      ready.notify_all();
    }
  };

  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(total)));
  std::vector<std::jthread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);

  // This thread is the single writer: records are handed out in index order.
  std::vector<RunRecord> out;
  out.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::unique_lock<std::mutex> lock(mutex);
    ready.wait(lock, [&] { return slots[i].has_value(); });
    RunRecord rec = std::move(*slots[i]);
    slots[i].reset();
    lock.unlock();
    if (on_record) on_record(i, rec);
    out.push_back(std::move(rec));
  }
  return out;
}

PhaseDiagram sweep(const SweepOptions& options) {
  if (options.count < 1) throw std::invalid_argument("sweep: count must be at least 1");
  if (options.rounds < 0) throw std::invalid_argument("sweep: rounds must be non-negative");
  const SweepRegion& region = options.region;
  if (!(region.gamma_min > 0.0 && region.gamma_min <= region.gamma_max && region.m_min <= region.m_max &&
        region.m_min > -1.0 && region.m_max < 1.0)) {
    throw std::invalid_argument("sweep: invalid region");
  }
  options.run.schedule.validate();

  std::ofstream csv;
  if (!options.csv.empty()) {
    if (options.csv.has_parent_path()) std::filesystem::create_directories(options.csv.parent_path());
    csv.open(options.csv, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + options.csv.string());
    csv << record_csv_header() << '\n' << std::flush;
  }

  PhaseDiagram diagram;
  diagram.region = region;
  const double radius = options.radius_fraction * region.diameter();
  std::vector<SweepPoint> batch = initial_points(region, options.count, options.master_seed);
  for (int generation = 0; !batch.empty(); ++generation) {
    const std::size_t offset = diagram.records.size();
    RunOptions run = options.run;
    auto on_record = [&](std::size_t i, const RunRecord& rec) {
      if (csv.is_open()) csv << record_csv_row(rec) << '\n' << std::flush;
      if (!options.run_dirs.empty()) {
        write_run_outputs(options.run_dirs / ("run_" + std::to_string(offset + i)), rec);
      }
    };
    std::vector<RunRecord> records = run_points(batch, run, options.jobs, on_record);
    diagram.points.insert(diagram.points.end(), batch.begin(), batch.end());
    for (RunRecord& r : records) diagram.records.push_back(std::move(r));
    diagram.generations = generation + 1;
    if (generation >= options.rounds) break;
    batch = refinement_points(diagram.points, diagram.records, radius, generation + 1, options.master_seed);
  }
  return diagram;
}

SweepOptions sweep_options_from(const KeyValues& config, SweepOptions base) {
  auto number = [&](const std::string& key, double& target) {
    if (auto it = config.find(key); it != config.end()) {
      std::size_t used = 0;
      target = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("config: bad number for " + key);
    }
  };
  auto integer = [&](const std::string& key, auto& target) {
    if (auto it = config.find(key); it != config.end()) {
      std::size_t used = 0;
      const long long v = std::stoll(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("config: bad integer for " + key);
      target = static_cast<std::remove_reference_t<decltype(target)>>(v);
    }
  };
  static const char* const known[] = {"gamma_min", "gamma_max", "m_min",   "m_max", "count",        "rounds",
                                      "radius_fraction", "seed", "jobs",    "n",     "rho",          "t1",
                                      "t2",        "t3",        "t4",      "t5",    "residual_tol", "noise",
                                      "out",       "run_dirs"};
  for (const auto& [key, value] : config) {
    bool found = false;
    for (const char* k : known) found = found || key == k;
    if (!found) throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  number("gamma_min", base.region.gamma_min);
  number("gamma_max", base.region.gamma_max);
  number("m_min", base.region.m_min);
  number("m_max", base.region.m_max);
  integer("count", base.count);
  integer("rounds", base.rounds);
  number("radius_fraction", base.radius_fraction);
  integer("seed", base.master_seed);
  integer("jobs", base.jobs);
  integer("n", base.run.n);
  Schedule& s = base.run.schedule;
  number("rho", s.rho);
  number("t1", s.t1);
  number("t2", s.t2);
  number("t3", s.t3);
  number("t4", s.t4);
  number("t5", s.t5);
  number("residual_tol", s.residual_tol);
  number("noise", s.noise_amplitude_factor);
  if (auto it = config.find("out"); it != config.end()) base.csv = it->second;
  if (auto it = config.find("run_dirs"); it != config.end()) base.run_dirs = it->second;
  return base;
}

}  // namespace okphase
