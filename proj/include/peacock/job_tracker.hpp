#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "peacock/elastic_queue.hpp"
#include "peacock/metrics.hpp"
#include "peacock/workload.hpp"

namespace peacock {

// Per-scheduler bookkeeping of admitted jobs: which stages are ready, which
// tasks were launched and finished, and the JobRecord once the last task
// finishes. Shared by Peacock and the baselines.
class JobTracker {
 public:
  JobTracker(std::shared_ptr<const Workload> workload, std::uint32_t scheduler_id);

  // Registers the job and returns its root stages. Throws
  // std::invalid_argument for an unusable job.
  std::vector<std::uint32_t> admit(std::uint32_t job, Micros now);

  const Job& job(std::uint32_t job) const { return (*workload_)[job]; }
  Micros estimate(std::uint32_t job, std::uint32_t stage) const;
  std::size_t task_count(std::uint32_t job, std::uint32_t stage) const;

  // Marks the task launched and returns its actual duration. Unknown or
  // already-launched tasks are protocol violations.
  Micros launch(const TaskKey& task);
  bool launched(const TaskKey& task) const;
  // Lowest-index unlaunched task of the stage, for late binding.
  std::optional<std::uint32_t> next_unlaunched(std::uint32_t job, std::uint32_t stage) const;

  struct Finish {
    std::vector<std::uint32_t> ready_stages;
    std::optional<JobRecord> record;
  };
  Finish finish(const TaskKey& task, Micros finish_time, std::uint32_t rotations);

  std::size_t active_jobs() const { return active_.size(); }
  std::uint64_t launches() const { return launches_; }

 private:
  struct StageState {
    Micros estimate = 0;
    std::uint32_t pending_deps = 0;
    std::uint32_t unfinished = 0;
    std::uint32_t next_unlaunched = 0;
    std::vector<bool> launched;
    std::vector<bool> finished;
    std::vector<std::uint32_t> dependents;
  };
  struct JobState {
    Micros arrival = 0;
    Micros last_finish = 0;
    std::uint32_t stages_left = 0;
    std::vector<StageState> stages;
    std::vector<std::uint32_t> rotations;
  };

  StageState& stage_state(const TaskKey& task, const char* op);
  const StageState* find_stage(std::uint32_t job, std::uint32_t stage) const;

  std::shared_ptr<const Workload> workload_;
  std::uint32_t scheduler_id_;
  std::unordered_map<std::uint32_t, JobState> active_;
  std::uint64_t launches_ = 0;
};

}  // namespace peacock
