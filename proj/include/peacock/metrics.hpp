#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "peacock/messages.hpp"
#include "peacock/time.hpp"

namespace peacock {

struct JobRecord {
  std::uint64_t job_id = 0;
  Micros arrival = 0;
  Micros completion = 0;
  std::uint32_t scheduler = 0;
  std::vector<std::uint32_t> rotations;  // one entry per executed task

  Micros jct() const { return completion - arrival; }
  bool operator==(const JobRecord&) const = default;
};

struct Counters {
  std::uint64_t events = 0;
  std::array<std::uint64_t, kPayloadKinds> messages{};  // network sends by kind
  std::uint64_t probes = 0;            // probes created by schedulers
  std::uint64_t tasks = 0;             // tasks launched
  std::uint64_t cancels = 0;           // late-binding cancellations
  std::uint64_t rotations = 0;         // probe hops over the ring
  std::uint64_t rotation_messages = 0;
  std::uint64_t resamples = 0;         // Eagle short-probe relocations
  std::uint64_t aggregate_clamps = 0;  // negative aggregates floored at zero
  Micros busy_time = 0;                // sum of executed task durations
  Micros makespan = 0;                 // last task completion
  // Busy time clipped to [window_start, window_end], the span between the
  // first and last job arrival. Excludes the warm-up and drain phases.
  Micros window_start = 0;
  Micros window_end = 0;
  Micros window_busy_time = 0;
  std::uint32_t workers = 0;

  std::uint64_t messages_total() const;
  bool operator==(const Counters&) const = default;
};

struct RunResult {
  std::vector<JobRecord> jobs;  // ordered by job id
  Counters counters;
};

inline constexpr std::array<int, 4> kReportPercentiles = {50, 70, 90, 99};
inline constexpr const char* kReportSchema = "peacock-report";
inline constexpr int kReportVersion = 1;

struct Report {
  bool empty = true;
  std::size_t jobs = 0;
  double ajct_s = 0;
  std::map<int, double> percentiles_s;                  // nearest rank
  std::vector<std::pair<double, double>> cdf;           // (jct seconds, fraction <= jct)
  double rotations_per_probe = 0;
  double rotations_per_task = 0;
  double utilization = 0;         // busy / (W * makespan)
  double steady_utilization = 0;  // busy within the arrival window / (W * window)
  std::uint64_t messages_total = 0;
  std::map<std::string, std::uint64_t> messages;
  Counters counters;
};

// Default CDF grid: 1-2-5 decades in seconds, extended until it covers the
// longest JCT so the last sample reaches 1.
std::vector<double> default_cdf_grid(double max_jct_s);

Report summarize(std::span<const JobRecord> records, const Counters& counters,
                 std::span<const double> cdf_grid = {});

struct FractionFaster {
  double a = 0;
  double b = 0;
  double ties = 0;
  std::size_t a_count = 0;
  std::size_t b_count = 0;
  std::size_t tie_count = 0;
};

// Per-job JCT comparison of two runs over the same workload. Throws
// std::invalid_argument when the job sets differ.
FractionFaster fraction_faster(std::span<const JobRecord> a, std::span<const JobRecord> b);

nlohmann::ordered_json report_json(const Report& report);
nlohmann::ordered_json records_json(std::span<const JobRecord> records);
std::string report_csv_header();
std::string report_csv_row(const std::string& label, const Report& report);
std::string records_csv(std::span<const JobRecord> records);

}  // namespace peacock
