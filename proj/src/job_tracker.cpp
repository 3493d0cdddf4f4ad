#include "peacock/job_tracker.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "peacock/errors.hpp"

namespace peacock {

namespace {

std::string describe(const TaskKey& t) {
  return "job " + std::to_string(t.job) + " stage " + std::to_string(t.stage) + " task " +
         std::to_string(t.task);
}

}  // namespace

JobTracker::JobTracker(std::shared_ptr<const Workload> workload, std::uint32_t scheduler_id)
    : workload_(std::move(workload)), scheduler_id_(scheduler_id) {}

std::vector<std::uint32_t> JobTracker::admit(std::uint32_t job, Micros now) {
  if (job >= workload_->size()) throw std::invalid_argument("unknown job index");
  const Job& spec = (*workload_)[job];
  if (auto why = validate_job(spec))
    throw std::invalid_argument("job " + std::to_string(spec.id) + " rejected: " + *why);
  if (active_.contains(job)) throw ProtocolViolation("job admitted twice");

  JobState st;
  st.arrival = now;
  st.stages_left = static_cast<std::uint32_t>(spec.stages.size());
  st.stages.resize(spec.stages.size());
  std::vector<std::uint32_t> roots;
  for (std::uint32_t s = 0; s < spec.stages.size(); ++s) {
    const Stage& stage = spec.stages[s];
    StageState& ss = st.stages[s];
    ss.estimate = stage_estimate(stage);
    ss.pending_deps = static_cast<std::uint32_t>(stage.deps.size());
    ss.unfinished = static_cast<std::uint32_t>(stage.durations.size());
    ss.launched.assign(stage.durations.size(), false);
    ss.finished.assign(stage.durations.size(), false);
    for (std::uint32_t d : stage.deps) st.stages[d].dependents.push_back(s);
    if (stage.deps.empty()) roots.push_back(s);
  }
  active_.emplace(job, std::move(st));
  return roots;
}

const JobTracker::StageState* JobTracker::find_stage(std::uint32_t job, std::uint32_t stage) const {
  auto it = active_.find(job);
  if (it == active_.end() || stage >= it->second.stages.size()) return nullptr;
  return &it->second.stages[stage];
}

JobTracker::StageState& JobTracker::stage_state(const TaskKey& task, const char* op) {
  auto it = active_.find(task.job);
  if (it == active_.end() || task.stage >= it->second.stages.size())
    throw ProtocolViolation(std::string(op) + " for unknown " + describe(task));
  StageState& ss = it->second.stages[task.stage];
  if (task.task >= ss.launched.size())
    throw ProtocolViolation(std::string(op) + " for unknown " + describe(task));
  return ss;
}

Micros JobTracker::estimate(std::uint32_t job, std::uint32_t stage) const {
  if (job >= workload_->size() || stage >= (*workload_)[job].stages.size())
    throw ProtocolViolation("estimate for unknown job/stage");
  return stage_estimate((*workload_)[job].stages[stage]);
}

std::size_t JobTracker::task_count(std::uint32_t job, std::uint32_t stage) const {
  return (*workload_)[job].stages[stage].durations.size();
}

Micros JobTracker::launch(const TaskKey& task) {
  StageState& ss = stage_state(task, "launch");
  if (ss.pending_deps != 0) throw ProtocolViolation("launch before dependencies: " + describe(task));
  if (ss.launched[task.task]) throw ProtocolViolation("task launched twice: " + describe(task));
  ss.launched[task.task] = true;
  while (ss.next_unlaunched < ss.launched.size() && ss.launched[ss.next_unlaunched])
    ++ss.next_unlaunched;
  ++launches_;
  return (*workload_)[task.job].stages[task.stage].durations[task.task];
}

bool JobTracker::launched(const TaskKey& task) const {
  const StageState* ss = find_stage(task.job, task.stage);
  return ss != nullptr && task.task < ss->launched.size() && ss->launched[task.task];
}

std::optional<std::uint32_t> JobTracker::next_unlaunched(std::uint32_t job,
                                                         std::uint32_t stage) const {
  const StageState* ss = find_stage(job, stage);
  if (ss == nullptr || ss->next_unlaunched >= ss->launched.size()) return std::nullopt;
  return ss->next_unlaunched;
}

JobTracker::Finish JobTracker::finish(const TaskKey& task, Micros finish_time,
                                      std::uint32_t rotations) {
  StageState& ss = stage_state(task, "finish");
  if (!ss.launched[task.task]) throw ProtocolViolation("finish before launch: " + describe(task));
  if (ss.finished[task.task]) throw ProtocolViolation("task finished twice: " + describe(task));
  ss.finished[task.task] = true;
  JobState& js = active_.at(task.job);
  js.last_finish = std::max(js.last_finish, finish_time);
  js.rotations.push_back(rotations);

  Finish out;
  if (--ss.unfinished != 0) return out;
  for (std::uint32_t dep : ss.dependents)
    if (--js.stages[dep].pending_deps == 0) out.ready_stages.push_back(dep);
  if (--js.stages_left == 0) {
    out.record = JobRecord{(*workload_)[task.job].id, js.arrival, js.last_finish, scheduler_id_,
                           std::move(js.rotations)};
    active_.erase(task.job);
  }
  return out;
}

}  // namespace peacock
