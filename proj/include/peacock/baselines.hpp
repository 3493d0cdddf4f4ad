#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_set>
#include <vector>

#include "peacock/engine.hpp"
#include "peacock/job_tracker.hpp"
#include "peacock/random.hpp"
#include "peacock/scheduler.hpp"

namespace peacock {

// Sparrow and Eagle models. Both use batch sampling with late binding: a
// probe reaching the head of a worker queue asks its scheduler for a task and
// receives either the next unlaunched task of its stage or a cancel.

enum class QueueOrder { kFifo, kSrpt };

struct SampledEntry {
  SampleProbe probe;
  Micros enqueued = 0;
};

// Worker-side probe queue. SRPT picks the smallest estimate, except that a
// probe which has waited at least `starvation_bound` is served first (oldest
// such probe), so shorter arrivals cannot bypass it any longer.
class SampledQueue {
 public:
  SampledQueue(QueueOrder order, Micros starvation_bound)
      : order_(order), bound_(starvation_bound) {}

  void push(const SampleProbe& p, Micros now);
  std::optional<SampledEntry> pop(Micros now);
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t long_count() const { return long_count_; }
  const std::vector<SampledEntry>& entries() const { return entries_; }

 private:
  QueueOrder order_;
  Micros bound_;
  std::vector<SampledEntry> entries_;  // arrival order
  std::size_t long_count_ = 0;
};

struct ResamplePolicy {
  std::uint32_t short_partition = 0;  // workers [0, short_partition) take only short tasks
  std::uint32_t limit = 0;            // relocations allowed per short probe
};

class SamplingWorker {
 public:
  SamplingWorker(std::uint32_t id, QueueOrder order, Micros starvation_bound,
                 ResamplePolicy resample, Rng rng);

  void on_probe(Outbox& out, const SampleProbe& probe);
  void on_task_assign(Outbox& out, const TaskAssign& assign);
  void on_task_cancel(Outbox& out, const TaskCancel& cancel);
  void on_task_complete(Outbox& out);

  std::uint32_t id() const { return id_; }
  SlotState slot() const { return slot_; }
  const SampledQueue& queue() const { return queue_; }
  bool running_long() const { return slot_ != SlotState::kIdle && current_ && current_->long_task; }
  Micros busy_time() const { return busy_time_; }
  std::uint64_t resamples() const { return resamples_; }
  // Long tasks ever executed here (partition audit).
  std::uint64_t long_tasks_run() const { return long_tasks_run_; }

 private:
  void pull(Outbox& out);
  Address self() const { return worker_addr(id_); }

  std::uint32_t id_;
  SampledQueue queue_;
  ResamplePolicy resample_;
  Rng rng_;
  SlotState slot_ = SlotState::kIdle;
  std::optional<SampleProbe> current_;
  TaskKey running_task_;
  std::unordered_set<std::uint64_t> held_;
  Micros busy_time_ = 0;
  std::uint64_t resamples_ = 0;
  std::uint64_t long_tasks_run_ = 0;
};

struct SamplingSchedulerConfig {
  std::uint32_t probe_ratio = 2;
  // Eagle only: stages whose estimate exceeds the cutoff go to the central
  // scheduler.
  std::optional<Micros> long_job_cutoff;
};

class SamplingScheduler {
 public:
  SamplingScheduler(std::uint32_t id, std::uint32_t workers, std::shared_ptr<const Workload> workload,
                    SamplingSchedulerConfig config, PlacementPolicy placement, Rng rng);

  void on_job_arrival(Outbox& out, std::uint32_t job);
  void on_task_request(Outbox& out, const TaskRequest& req);
  void on_task_finish(Outbox& out, const TaskFinishNotify& note);

  std::uint32_t id() const { return id_; }
  std::vector<JobRecord>& records() { return records_; }
  const JobTracker& tracker() const { return tracker_; }
  std::uint64_t probes_created() const { return probes_; }
  std::uint64_t cancels() const { return cancels_; }

 private:
  void submit_stage(Outbox& out, std::uint32_t job, std::uint32_t stage);

  std::uint32_t id_;
  JobTracker tracker_;
  SamplingSchedulerConfig config_;
  WorkerSampler sampler_;
  std::uint64_t next_uid_ = 0;
  std::uint64_t probes_ = 0;
  std::uint64_t cancels_ = 0;
  std::vector<JobRecord> records_;
};

// Eagle's centralized long-job scheduler: places each task of a long stage on
// the general-partition worker with the least outstanding long work it knows
// of. Finish notifications reduce that estimate.
class EagleCentral {
 public:
  EagleCentral(std::uint32_t workers, std::uint32_t short_partition,
               std::shared_ptr<const Workload> workload);

  void on_stage_submit(Outbox& out, const StageSubmit& submit);
  void on_task_finish(const TaskFinishNotify& note);

  const std::vector<Micros>& known_load() const { return load_; }
  std::uint64_t probes_created() const { return probes_; }

 private:
  std::uint32_t short_partition_;
  std::shared_ptr<const Workload> workload_;
  std::vector<Micros> load_;
  std::uint64_t next_uid_ = 0;
  std::uint64_t probes_ = 0;
};

std::uint32_t short_partition_size(std::uint32_t workers, double fraction);

}  // namespace peacock
