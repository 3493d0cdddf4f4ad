#include "peacock/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace peacock {

std::uint64_t Counters::messages_total() const {
  std::uint64_t total = 0;
  for (std::size_t k = 0; k < kPayloadKinds; ++k) total += messages[k];
  return total;
}

std::vector<double> default_cdf_grid(double max_jct_s) {
  std::vector<double> grid;
  for (double decade = 1.0;; decade *= 10.0) {
    for (double m : {1.0, 2.0, 5.0}) {
      grid.push_back(m * decade);
      if (m * decade >= max_jct_s) return grid;
    }
  }
}

Report summarize(std::span<const JobRecord> records, const Counters& counters,
                 std::span<const double> cdf_grid) {
  Report r;
  r.counters = counters;
  r.messages_total = counters.messages_total();
  for (std::size_t k = 0; k < kPayloadKinds; ++k)
    if (counters.messages[k] != 0) r.messages.emplace(std::string(kPayloadNames[k]), counters.messages[k]);
  if (counters.workers > 0 && counters.makespan > 0) {
    r.utilization = static_cast<double>(counters.busy_time) /
                    (static_cast<double>(counters.workers) * static_cast<double>(counters.makespan));
  }
  if (counters.workers > 0 && counters.window_end > counters.window_start) {
    r.steady_utilization =
        static_cast<double>(counters.window_busy_time) /
        (static_cast<double>(counters.workers) *
         static_cast<double>(counters.window_end - counters.window_start));
  }
  if (counters.probes > 0)
    r.rotations_per_probe = static_cast<double>(counters.rotations) / static_cast<double>(counters.probes);
  if (records.empty()) return r;

  r.empty = false;
  r.jobs = records.size();
  std::vector<Micros> jcts;
  jcts.reserve(records.size());
  std::uint64_t task_rotations = 0;
  std::uint64_t tasks = 0;
  for (const JobRecord& rec : records) {
    jcts.push_back(rec.jct());
    for (std::uint32_t c : rec.rotations) task_rotations += c;
    tasks += rec.rotations.size();
  }
  std::sort(jcts.begin(), jcts.end());
  const Micros total = std::accumulate(jcts.begin(), jcts.end(), Micros{0});
  r.ajct_s = to_seconds(total) / static_cast<double>(jcts.size());
  const double n = static_cast<double>(jcts.size());
  for (int p : kReportPercentiles) {
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    rank = std::clamp<std::size_t>(rank, 1, jcts.size());
    r.percentiles_s[p] = to_seconds(jcts[rank - 1]);
  }
  if (tasks > 0) r.rotations_per_task = static_cast<double>(task_rotations) / static_cast<double>(tasks);

  std::vector<double> grid(cdf_grid.begin(), cdf_grid.end());
  if (grid.empty()) grid = default_cdf_grid(to_seconds(jcts.back()));
  for (double x : grid) {
    const auto below = std::upper_bound(jcts.begin(), jcts.end(), from_seconds(x)) - jcts.begin();
    r.cdf.emplace_back(x, static_cast<double>(below) / n);
  }
  return r;
}

FractionFaster fraction_faster(std::span<const JobRecord> a, std::span<const JobRecord> b) {
  if (a.size() != b.size()) throw std::invalid_argument("runs cover different job sets");
  std::unordered_map<std::uint64_t, Micros> other;
  other.reserve(b.size());
  for (const JobRecord& r : b) other.emplace(r.job_id, r.jct());
  FractionFaster f;
  for (const JobRecord& r : a) {
    auto it = other.find(r.job_id);
    if (it == other.end()) throw std::invalid_argument("runs cover different job sets");
    if (r.jct() < it->second) ++f.a_count;
    else if (r.jct() > it->second) ++f.b_count;
    else ++f.tie_count;
  }
  if (a.empty()) return f;
  const double n = static_cast<double>(a.size());
  f.a = static_cast<double>(f.a_count) / n;
  f.b = static_cast<double>(f.b_count) / n;
  f.ties = static_cast<double>(f.tie_count) / n;
  return f;
}

nlohmann::ordered_json report_json(const Report& r) {
  nlohmann::ordered_json j;
  j["schema"] = kReportSchema;
  j["version"] = kReportVersion;
  j["empty"] = r.empty;
  j["jobs"] = r.jobs;
  j["ajct_s"] = r.ajct_s;
  nlohmann::ordered_json pct = nlohmann::ordered_json::object();
  for (const auto& [p, v] : r.percentiles_s) pct["p" + std::to_string(p)] = v;
  j["percentiles_s"] = std::move(pct);
  nlohmann::ordered_json cdf = nlohmann::ordered_json::array();
  for (const auto& [x, f] : r.cdf) cdf.push_back({x, f});
  j["cdf"] = std::move(cdf);
  j["rotations_per_probe"] = r.rotations_per_probe;
  j["rotations_per_task"] = r.rotations_per_task;
  j["utilization"] = r.utilization;
  j["steady_utilization"] = r.steady_utilization;
  j["messages_total"] = r.messages_total;
  j["messages"] = r.messages;
  const Counters& c = r.counters;
  j["counters"] = {{"events", c.events},
                   {"probes", c.probes},
                   {"tasks", c.tasks},
                   {"cancels", c.cancels},
                   {"rotations", c.rotations},
                   {"rotation_messages", c.rotation_messages},
                   {"resamples", c.resamples},
                   {"aggregate_clamps", c.aggregate_clamps},
                   {"busy_time_us", c.busy_time},
                   {"makespan_us", c.makespan},
                   {"window_start_us", c.window_start},
                   {"window_end_us", c.window_end},
                   {"window_busy_time_us", c.window_busy_time},
                   {"workers", c.workers}};
  return j;
}

nlohmann::ordered_json records_json(std::span<const JobRecord> records) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const JobRecord& r : records) {
    out.push_back({{"id", r.job_id},
                   {"arrival_us", r.arrival},
                   {"completion_us", r.completion},
                   {"jct_us", r.jct()},
                   {"scheduler", r.scheduler},
                   {"rotations", r.rotations}});
  }
  return out;
}

std::string report_csv_header() {
  std::string h = "label,empty,jobs,ajct_s";
  for (int p : kReportPercentiles) h += ",p" + std::to_string(p) + "_s";
  h += ",rotations_per_probe,rotations_per_task,utilization,steady_utilization,messages_total,probes,tasks,cancels,"
       "rotations,resamples,makespan_us\n";
  return h;
}

std::string report_csv_row(const std::string& label, const Report& r) {
  std::ostringstream os;
  os.precision(17);
  os << label << ',' << (r.empty ? 1 : 0) << ',' << r.jobs << ',' << r.ajct_s;
  for (int p : kReportPercentiles) {
    auto it = r.percentiles_s.find(p);
    os << ',' << (it == r.percentiles_s.end() ? 0.0 : it->second);
  }
  const Counters& c = r.counters;
  os << ',' << r.rotations_per_probe << ',' << r.rotations_per_task << ',' << r.utilization << ','
     << r.steady_utilization << ',' << r.messages_total << ',' << c.probes << ',' << c.tasks << ',' << c.cancels << ','
     << c.rotations << ',' << c.resamples << ',' << c.makespan << '\n';
  return os.str();
}

std::string records_csv(std::span<const JobRecord> records) {
  std::ostringstream os;
  os << "id,arrival_us,completion_us,jct_us,scheduler,rotations\n";
  for (const JobRecord& r : records) {
    std::uint64_t rot = 0;
    for (auto c : r.rotations) rot += c;
    os << r.job_id << ',' << r.arrival << ',' << r.completion << ',' << r.jct() << ','
       << r.scheduler << ',' << rot << '\n';
  }
  return os.str();
}

}  // namespace peacock
