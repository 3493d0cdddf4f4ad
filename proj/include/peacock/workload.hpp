#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "peacock/time.hpp"

namespace peacock {

struct Stage {
  std::vector<Micros> durations;      // actual task runtimes
  std::vector<std::uint32_t> deps;    // indices of stages that must finish first

  bool operator==(const Stage&) const = default;
};

struct Job {
  std::uint64_t id = 0;
  Micros arrival = 0;
  std::vector<Stage> stages;

  bool operator==(const Job&) const = default;
};

// Jobs sorted by arrival; the position in the vector is the simulator's
// internal job index.
using Workload = std::vector<Job>;

// Mean of a stage's task durations, used as the runtime estimate of each of
// its probes.
Micros stage_estimate(const Stage& stage);

// Returns a reason when the job is unusable: no stages, empty stage,
// non-positive duration, dependency out of range or cyclic.
std::optional<std::string> validate_job(const Job& job);

// Sum over stages along the longest dependency chain.
Micros critical_path(const Job& job);

// ---- trace files ------------------------------------------------------------

struct TraceRecord {
  std::uint64_t job_id = 0;
  std::optional<Micros> submit;
  std::vector<Stage> stages;

  bool operator==(const TraceRecord&) const = default;
};

struct TraceLoad {
  std::vector<TraceRecord> records;
  std::size_t pruned = 0;
};

inline constexpr const char* kTraceSchema = "peacock-trace";
inline constexpr int kTraceVersion = 1;

// One JSON object per line. An optional first line
// {"schema":"peacock-trace","version":1} pins the format version. gzip input
// is detected transparently. Invalid jobs are dropped and counted; malformed
// lines throw TraceError carrying the line number.
TraceLoad load_trace(const std::filesystem::path& path);
void write_trace(const std::filesystem::path& path, std::span<const TraceRecord> records,
                 bool gzip = false);

// ---- synthetic workloads ----------------------------------------------------

// Mean job inter-arrival (seconds) that offers `rho` times the capacity of
// `workers` single-slot workers: m * d / (rho * W).
double mean_interarrival(double rho, std::uint32_t workers, double mean_tasks,
                         double mean_duration_s);

struct JobClass {
  double weight = 1.0;
  double mean_tasks = 10.0;       // tasks = 1 + Poisson(mean_tasks - 1)
  double mean_duration_s = 10.0;  // lognormal mean of the job's typical task
  double sigma = 0.8;             // lognormal shape across jobs
};

struct SyntheticSpec {
  double target_load = 0.8;
  std::size_t job_count = 1000;
  std::vector<JobClass> classes = {{0.9, 10.0, 10.0, 0.8}, {0.1, 20.0, 200.0, 0.8}};
  double within_job_sigma = 0.5;  // lognormal spread of tasks around the job's mean
  std::uint64_t seed = 1;

  double mean_tasks() const;
  // Task-weighted mean duration, i.e. expected work per job / mean tasks.
  double mean_duration_s() const;
};

struct GeneratedJob {
  Job job;
  std::size_t job_class = 0;
};

std::vector<GeneratedJob> generate_with_classes(const SyntheticSpec& spec, std::uint32_t workers);
Workload generate(const SyntheticSpec& spec, std::uint32_t workers);

// Turns trace records into a workload. Records without submit times get
// Poisson arrivals calibrated to `rho` from the trace's own means.
Workload workload_from_trace(std::span<const TraceRecord> records, double rho,
                             std::uint32_t workers, std::uint64_t seed);

std::vector<TraceRecord> to_trace(const Workload& workload);

// Sum of task durations / (last arrival * W).
double offered_load(const Workload& workload, std::uint32_t workers);

}  // namespace peacock
