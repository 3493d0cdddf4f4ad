#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "peacock/elastic_queue.hpp"
#include "peacock/time.hpp"

namespace peacock {

enum class Role : std::uint8_t { kWorker, kScheduler, kCentral };

struct Address {
  Role role = Role::kWorker;
  std::uint32_t index = 0;

  auto operator<=>(const Address&) const = default;
};

inline Address worker_addr(std::uint32_t i) { return {Role::kWorker, i}; }
inline Address scheduler_addr(std::uint32_t i) { return {Role::kScheduler, i}; }
inline Address central_addr() { return {Role::kCentral, 0}; }

// Probes of one (job, stage) share arrival, threshold and estimate, so a
// rotation batch carries that header once per group.
struct RotatedTask {
  std::uint64_t uid = 0;
  std::uint32_t task_id = kUnboundTask;
  std::uint32_t rotation_count = 0;
  bool operator==(const RotatedTask&) const = default;
};

struct RotationGroup {
  std::uint32_t job_id = 0;
  std::uint32_t stage = 0;
  std::uint32_t scheduler = 0;
  Micros job_arrival = 0;
  Micros threshold = 0;
  Micros runtime_estimate = 0;
  std::vector<RotatedTask> tasks;
  bool operator==(const RotationGroup&) const = default;
};

struct RotationMessage {
  std::uint32_t sender = 0;
  std::vector<RotationGroup> groups;
  SharedState state;

  // Groups keep the first-appearance order of their (job, stage); tasks keep
  // buffer order within a group.
  static RotationMessage pack(std::uint32_t sender, std::span<const Probe> probes,
                              const SharedState& state);
  // Expands back to probes; probe_arrival is set to `received_at`.
  std::vector<Probe> unpack(Micros received_at) const;
  std::size_t probe_count() const;
};

struct JobArrival {
  std::uint32_t job = 0;
};
struct ProbeSubmit {
  Probe probe;
  SharedState state;
};
// Baseline probe: Sparrow/Eagle batch sampling. `long_task` probes are
// bound to a task by Eagle's central scheduler.
struct SampleProbe {
  Probe probe;
  bool long_task = false;
  std::uint8_t resamples = 0;
};
struct StageSubmit {
  std::uint32_t job = 0;
  std::uint32_t stage = 0;
  std::uint32_t owner = 0;
};
struct RotationBatch {
  RotationMessage message;
};
struct TaskRequest {
  std::uint32_t worker = 0;
  std::uint64_t probe_uid = 0;
  TaskKey task;
  std::uint32_t rotations = 0;
};
struct TaskAssign {
  std::uint64_t probe_uid = 0;
  TaskKey task;
  Micros duration = 0;
  SharedState state;
};
struct TaskCancel {
  std::uint64_t probe_uid = 0;
};
struct TaskFinishNotify {
  TaskKey task;
  std::uint32_t worker = 0;
  Micros finish = 0;
  std::uint32_t rotations = 0;
  Micros estimate = 0;
};
struct PeerUpdate {
  int sign = +1;
  std::int64_t count = 0;
  Micros load = 0;
  bool operator==(const PeerUpdate&) const = default;
};
struct RotationTick {};
struct TaskComplete {};

using Payload = std::variant<JobArrival, ProbeSubmit, SampleProbe, StageSubmit, RotationBatch,
                             TaskRequest, TaskAssign, TaskCancel, TaskFinishNotify, PeerUpdate,
                             RotationTick, TaskComplete>;

inline constexpr std::size_t kPayloadKinds = std::variant_size_v<Payload>;

inline constexpr std::array<std::string_view, kPayloadKinds> kPayloadNames = {
    "job_arrival", "probe_submit", "sample_probe",  "stage_submit", "rotation_batch",
    "task_request", "task_assign", "task_cancel",   "task_finish",  "peer_update",
    "rotation_tick", "task_complete"};

struct Event {
  Micros time = 0;
  std::uint64_t seq = 0;
  Address target;
  Payload payload;
};

}  // namespace peacock
