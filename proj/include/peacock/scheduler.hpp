#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "peacock/engine.hpp"
#include "peacock/job_tracker.hpp"
#include "peacock/random.hpp"

namespace peacock {

// The cluster-wide (probe count, total estimated load) as seen by one
// scheduler.
struct Aggregate {
  std::int64_t probe_count = 0;
  Micros total_load = 0;

  bool operator==(const Aggregate&) const = default;
};

// Chooses `n` target workers: distinct while n <= W; beyond that every
// complete batch of W covers each worker once.
class WorkerSampler {
 public:
  WorkerSampler(std::uint32_t workers, PlacementPolicy policy, Rng rng);
  std::vector<std::uint32_t> pick(std::size_t n);
  std::uint32_t pick_one();
  std::uint32_t workers() const { return static_cast<std::uint32_t>(perm_.size()); }

 private:
  PlacementPolicy policy_;
  Rng rng_;
  std::vector<std::uint32_t> perm_;
  std::uint32_t cursor_ = 0;
};

// Probe count -> per-worker quota, rounded half up.
std::int64_t probe_quota(std::int64_t probe_count, std::uint32_t workers);

class PeacockScheduler {
 public:
  PeacockScheduler(std::uint32_t id, std::uint32_t schedulers, std::uint32_t workers,
                   std::shared_ptr<const Workload> workload, PlacementPolicy placement, Rng rng);

  // Admits the job, submits probes for its root stages and broadcasts
  // <+, n, n*estimate> per stage.
  void on_job_arrival(Outbox& out, std::uint32_t job);
  void on_task_request(Outbox& out, const TaskRequest& req);
  void on_task_finish(Outbox& out, const TaskFinishNotify& note);
  void on_peer_update(const PeerUpdate& update);

  SharedState current_shared_state(Micros now) const;

  const Aggregate& aggregate() const { return aggregate_; }
  std::uint32_t id() const { return id_; }
  std::vector<JobRecord>& records() { return records_; }
  const JobTracker& tracker() const { return tracker_; }
  std::uint64_t probes_created() const { return probes_; }
  std::uint64_t clamps() const { return clamps_; }

 private:
  void submit_stage(Outbox& out, std::uint32_t job, std::uint32_t stage);
  void apply(int sign, std::int64_t count, Micros load);
  void broadcast(Outbox& out, const PeerUpdate& update);

  std::uint32_t id_;
  std::uint32_t schedulers_;
  std::uint32_t workers_;
  JobTracker tracker_;
  WorkerSampler sampler_;
  Aggregate aggregate_;
  std::uint64_t mutations_ = 0;
  std::uint64_t next_uid_ = 0;
  std::uint64_t probes_ = 0;
  std::uint64_t clamps_ = 0;
  std::vector<JobRecord> records_;
};

}  // namespace peacock
