#include "peacock/workload.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "peacock/errors.hpp"
#include "peacock/random.hpp"

namespace peacock {

using nlohmann::json;

Micros stage_estimate(const Stage& stage) {
  if (stage.durations.empty()) return 0;
  Micros sum = std::accumulate(stage.durations.begin(), stage.durations.end(), Micros{0});
  return sum / static_cast<Micros>(stage.durations.size());
}

namespace {

// Kahn's algorithm; nullopt on a cycle.
std::optional<std::vector<std::uint32_t>> topo_order(const Job& job) {
  const std::size_t n = job.stages.size();
  std::vector<std::uint32_t> indegree(n, 0);
  std::vector<std::vector<std::uint32_t>> dependents(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    for (std::uint32_t d : job.stages[s].deps) {
      dependents[d].push_back(s);
      ++indegree[s];
    }
  }
  std::vector<std::uint32_t> order;
  for (std::uint32_t s = 0; s < n; ++s)
    if (indegree[s] == 0) order.push_back(s);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::uint32_t next : dependents[order[i]])
      if (--indegree[next] == 0) order.push_back(next);
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

}  // namespace

std::optional<std::string> validate_job(const Job& job) {
  if (job.stages.empty()) return "job has no stages";
  for (std::size_t s = 0; s < job.stages.size(); ++s) {
    const Stage& stage = job.stages[s];
    if (stage.durations.empty()) return "stage " + std::to_string(s) + " has no tasks";
    for (Micros d : stage.durations)
      if (d <= 0) return "non-positive task duration in stage " + std::to_string(s);
    std::set<std::uint32_t> seen;
    for (std::uint32_t d : stage.deps) {
      if (d >= job.stages.size()) return "dependency out of range in stage " + std::to_string(s);
      if (d == s) return "stage " + std::to_string(s) + " depends on itself";
      if (!seen.insert(d).second) return "duplicate dependency in stage " + std::to_string(s);
    }
  }
  if (!topo_order(job)) return "stage dependencies are cyclic";
  return std::nullopt;
}

Micros critical_path(const Job& job) {
  auto order = topo_order(job);
  if (!order) throw std::invalid_argument("cyclic job");
  std::vector<Micros> finish(job.stages.size(), 0);
  Micros best = 0;
  for (std::uint32_t s : *order) {
    Micros start = 0;
    for (std::uint32_t d : job.stages[s].deps) start = std::max(start, finish[d]);
    const auto& durs = job.stages[s].durations;
    finish[s] = start + *std::max_element(durs.begin(), durs.end());
    best = std::max(best, finish[s]);
  }
  return best;
}

// ---- trace files ------------------------------------------------------------

namespace {

std::string read_all(const std::filesystem::path& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw std::runtime_error("cannot open trace " + path.string());
  std::string data;
  char buf[1 << 16];
  int n = 0;
  while ((n = gzread(f, buf, sizeof buf)) > 0) data.append(buf, static_cast<std::size_t>(n));
  int err = 0;
  const char* msg = gzerror(f, &err);
  std::string error = (n < 0 || err < 0) ? std::string(msg) : std::string();
  gzclose(f);
  if (!error.empty()) throw std::runtime_error("reading " + path.string() + ": " + error);
  return data;
}

TraceRecord parse_record(const json& j) {
  TraceRecord r;
  r.job_id = j.at("id").get<std::uint64_t>();
  if (auto it = j.find("submit_us"); it != j.end() && !it->is_null())
    r.submit = it->get<Micros>();
  for (const json& s : j.at("stages")) {
    Stage stage;
    stage.durations = s.at("durations_us").get<std::vector<Micros>>();
    if (auto it = s.find("deps"); it != s.end())
      stage.deps = it->get<std::vector<std::uint32_t>>();
    r.stages.push_back(std::move(stage));
  }
  return r;
}

json record_json(const TraceRecord& r) {
  json j;
  j["id"] = r.job_id;
  if (r.submit) j["submit_us"] = *r.submit;
  json stages = json::array();
  for (const Stage& s : r.stages)
    stages.push_back({{"durations_us", s.durations}, {"deps", s.deps}});
  j["stages"] = std::move(stages);
  return j;
}

}  // namespace

TraceLoad load_trace(const std::filesystem::path& path) {
  std::istringstream in(read_all(path));
  TraceLoad out;
  std::set<std::uint64_t> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw TraceError(std::string("malformed JSON: ") + e.what(), lineno);
    }
    if (j.is_object() && j.contains("schema")) {
      if (j["schema"] != kTraceSchema || j.value("version", 0) != kTraceVersion)
        throw TraceError("unsupported trace schema", lineno);
      continue;
    }
    TraceRecord r;
    try {
      r = parse_record(j);
    } catch (const json::exception& e) {
      throw TraceError(std::string("bad record: ") + e.what(), lineno);
    }
    Job probe_job{r.job_id, 0, r.stages};
    if (validate_job(probe_job) || !ids.insert(r.job_id).second) {
      ++out.pruned;
      continue;
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

void write_trace(const std::filesystem::path& path, std::span<const TraceRecord> records,
                 bool gzip) {
  std::string text =
      json{{"schema", kTraceSchema}, {"version", kTraceVersion}}.dump() + "\n";
  for (const TraceRecord& r : records) text += record_json(r).dump() + "\n";
  gzFile f = gzopen(path.c_str(), gzip ? "wb" : "wbT");
  if (f == nullptr) throw std::runtime_error("cannot write trace " + path.string());
  int written = gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
  gzclose(f);
  if (written != static_cast<int>(text.size()))
    throw std::runtime_error("short write to " + path.string());
}

// ---- synthetic workloads ----------------------------------------------------

double mean_interarrival(double rho, std::uint32_t workers, double mean_tasks,
                         double mean_duration_s) {
  if (rho <= 0 || workers == 0 || mean_tasks <= 0 || mean_duration_s <= 0)
    throw std::invalid_argument("mean_interarrival: all inputs must be positive");
  return mean_tasks * mean_duration_s / (rho * static_cast<double>(workers));
}

namespace {

double total_weight(const SyntheticSpec& spec) {
  double w = 0;
  for (const JobClass& c : spec.classes) w += c.weight;
  return w;
}

}  // namespace

double SyntheticSpec::mean_tasks() const {
  double m = 0;
  for (const JobClass& c : classes) m += c.weight * c.mean_tasks;
  return m / total_weight(*this);
}

double SyntheticSpec::mean_duration_s() const {
  double work = 0;
  for (const JobClass& c : classes) work += c.weight * c.mean_tasks * c.mean_duration_s;
  return work / total_weight(*this) / mean_tasks();
}

std::vector<GeneratedJob> generate_with_classes(const SyntheticSpec& spec,
                                                std::uint32_t workers) {
  if (spec.target_load <= 0) throw std::invalid_argument("target load must be positive");
  if (spec.classes.empty()) throw std::invalid_argument("no job classes");
  for (const JobClass& c : spec.classes) {
    if (c.weight < 0 || c.mean_tasks < 1 || c.mean_duration_s <= 0 || c.sigma < 0)
      throw std::invalid_argument("invalid job class");
  }

  Rng rng = make_stream(spec.seed, stream::kWorkload);
  const double gap_s =
      mean_interarrival(spec.target_load, workers, spec.mean_tasks(), spec.mean_duration_s());
  std::exponential_distribution<double> interarrival(1.0 / gap_s);
  std::vector<double> weights;
  for (const JobClass& c : spec.classes) weights.push_back(c.weight);
  std::discrete_distribution<std::size_t> pick_class(weights.begin(), weights.end());
  if (spec.within_job_sigma < 0) throw std::invalid_argument("negative within-job spread");
  // Mean-one lognormal factor; sigma 0 means no spread (and no draw).
  auto spread = [&rng](double sigma) {
    if (sigma == 0) return 1.0;
    return std::lognormal_distribution<double>(-sigma * sigma / 2.0, sigma)(rng);
  };

  std::vector<GeneratedJob> out;
  out.reserve(spec.job_count);
  double clock_s = 0;
  for (std::size_t i = 0; i < spec.job_count; ++i) {
    clock_s += interarrival(rng);
    const std::size_t k = pick_class(rng);
    const JobClass& c = spec.classes[k];
    std::size_t tasks = 1;
    if (c.mean_tasks > 1.0) {
      std::poisson_distribution<std::size_t> extra(c.mean_tasks - 1.0);
      tasks += extra(rng);
    }
    const double typical = c.mean_duration_s * spread(c.sigma);
    Stage stage;
    stage.durations.reserve(tasks);
    for (std::size_t t = 0; t < tasks; ++t) {
      const double d = typical * spread(spec.within_job_sigma);
      stage.durations.push_back(std::max<Micros>(from_seconds(d), kMicrosPerMilli));
    }
    out.push_back({Job{i, from_seconds(clock_s), {std::move(stage)}}, k});
  }
  return out;
}

Workload generate(const SyntheticSpec& spec, std::uint32_t workers) {
  Workload w;
  for (GeneratedJob& g : generate_with_classes(spec, workers)) w.push_back(std::move(g.job));
  return w;
}

Workload workload_from_trace(std::span<const TraceRecord> records, double rho,
                             std::uint32_t workers, std::uint64_t seed) {
  Workload w;
  w.reserve(records.size());
  double tasks = 0;
  double work_s = 0;
  for (const TraceRecord& r : records) {
    for (const Stage& s : r.stages) {
      tasks += static_cast<double>(s.durations.size());
      for (Micros d : s.durations) work_s += to_seconds(d);
    }
  }
  const bool need_arrivals = std::any_of(records.begin(), records.end(),
                                         [](const TraceRecord& r) { return !r.submit; });
  Rng rng = make_stream(seed, stream::kWorkload);
  std::exponential_distribution<double> interarrival(1.0);
  if (need_arrivals && !records.empty()) {
    const double n = static_cast<double>(records.size());
    interarrival = std::exponential_distribution<double>(
        1.0 / mean_interarrival(rho, workers, tasks / n, work_s / tasks));
  }
  double clock_s = 0;
  for (const TraceRecord& r : records) {
    Micros arrival = 0;
    if (r.submit) {
      arrival = *r.submit;
    } else {
      clock_s += interarrival(rng);
      arrival = from_seconds(clock_s);
    }
    w.push_back(Job{r.job_id, arrival, r.stages});
  }
  std::stable_sort(w.begin(), w.end(),
                   [](const Job& a, const Job& b) { return a.arrival < b.arrival; });
  return w;
}

std::vector<TraceRecord> to_trace(const Workload& workload) {
  std::vector<TraceRecord> out;
  out.reserve(workload.size());
  for (const Job& j : workload) out.push_back({j.id, j.arrival, j.stages});
  return out;
}

double offered_load(const Workload& workload, std::uint32_t workers) {
  if (workload.empty()) return 0;
  double work_s = 0;
  for (const Job& j : workload)
    for (const Stage& s : j.stages)
      for (Micros d : s.durations) work_s += to_seconds(d);
  return work_s / (to_seconds(workload.back().arrival) * static_cast<double>(workers));
}

}  // namespace peacock
