#include "peacock/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "peacock/errors.hpp"

namespace peacock {

// ---- SampledQueue -----------------------------------------------------------

void SampledQueue::push(const SampleProbe& p, Micros now) {
  entries_.push_back({p, now});
  if (p.long_task) ++long_count_;
}

std::optional<SampledEntry> SampledQueue::pop(Micros now) {
  if (entries_.empty()) return std::nullopt;
  std::size_t pick = 0;
  if (order_ == QueueOrder::kSrpt && now - entries_.front().enqueued < bound_) {
    for (std::size_t i = 1; i < entries_.size(); ++i) {
      if (entries_[i].probe.probe.runtime_estimate < entries_[pick].probe.probe.runtime_estimate)
        pick = i;
    }
  }
  SampledEntry e = entries_[pick];
  entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(pick));
  if (e.probe.long_task) --long_count_;
  return e;
}

// ---- SamplingWorker ---------------------------------------------------------

SamplingWorker::SamplingWorker(std::uint32_t id, QueueOrder order, Micros starvation_bound,
                               ResamplePolicy resample, Rng rng)
    : id_(id), queue_(order, starvation_bound), resample_(resample), rng_(std::move(rng)) {}

void SamplingWorker::on_probe(Outbox& out, const SampleProbe& sp) {
  const bool in_general = id_ >= resample_.short_partition;
  const bool long_here = running_long() || queue_.long_count() > 0;
  if (!sp.long_task && in_general && long_here && resample_.short_partition > 0 &&
      sp.resamples < resample_.limit) {
    std::uniform_int_distribution<std::uint32_t> pick(0, resample_.short_partition - 1);
    SampleProbe moved = sp;
    ++moved.resamples;
    ++resamples_;
    out.send(self(), worker_addr(pick(rng_)), moved);
    return;
  }
  if (!held_.insert(sp.probe.uid).second)
    throw ProtocolViolation("worker " + std::to_string(id_) + " received probe twice");
  queue_.push(sp, out.now());
  if (slot_ == SlotState::kIdle) pull(out);
}

void SamplingWorker::pull(Outbox& out) {
  auto next = queue_.pop(out.now());
  if (!next) {
    slot_ = SlotState::kIdle;
    current_.reset();
    return;
  }
  slot_ = SlotState::kReserved;
  current_ = next->probe;
  const Probe& p = current_->probe;
  out.send(self(), scheduler_addr(p.scheduler), TaskRequest{id_, p.uid, p.task(), p.rotation_count});
}

void SamplingWorker::on_task_assign(Outbox& out, const TaskAssign& assign) {
  if (slot_ != SlotState::kReserved || !current_ || current_->probe.uid != assign.probe_uid)
    throw ProtocolViolation("worker " + std::to_string(id_) + " got an assignment it did not request");
  slot_ = SlotState::kRunning;
  running_task_ = assign.task;
  busy_time_ += assign.duration;
  if (current_->long_task) ++long_tasks_run_;
  out.schedule(self(), out.now() + assign.duration, TaskComplete{});
}

void SamplingWorker::on_task_cancel(Outbox& out, const TaskCancel& cancel) {
  if (slot_ != SlotState::kReserved || !current_ || current_->probe.uid != cancel.probe_uid)
    throw ProtocolViolation("worker " + std::to_string(id_) + " got an unexpected cancel");
  held_.erase(cancel.probe_uid);
  pull(out);
}

void SamplingWorker::on_task_complete(Outbox& out) {
  if (slot_ != SlotState::kRunning || !current_)
    throw ProtocolViolation("worker " + std::to_string(id_) + " completed without a running task");
  const Probe& p = current_->probe;
  TaskFinishNotify note{running_task_, id_, out.now(), p.rotation_count, p.runtime_estimate};
  out.send(self(), scheduler_addr(p.scheduler), note);
  if (current_->long_task) out.send(self(), central_addr(), note);
  held_.erase(p.uid);
  pull(out);
}

// ---- SamplingScheduler ------------------------------------------------------

SamplingScheduler::SamplingScheduler(std::uint32_t id, std::uint32_t workers,
                                     std::shared_ptr<const Workload> workload,
                                     SamplingSchedulerConfig config, PlacementPolicy placement,
                                     Rng rng)
    : id_(id),
      tracker_(std::move(workload), id),
      config_(config),
      sampler_(workers, placement, std::move(rng)) {
  if (config_.probe_ratio == 0) throw ConfigError("probe ratio must be at least 1");
}

void SamplingScheduler::on_job_arrival(Outbox& out, std::uint32_t job) {
  for (std::uint32_t stage : tracker_.admit(job, out.now())) submit_stage(out, job, stage);
}

void SamplingScheduler::submit_stage(Outbox& out, std::uint32_t job, std::uint32_t stage) {
  const Micros estimate = tracker_.estimate(job, stage);
  if (config_.long_job_cutoff && estimate > *config_.long_job_cutoff) {
    out.send(scheduler_addr(id_), central_addr(), StageSubmit{job, stage, id_});
    return;
  }
  const std::size_t n = tracker_.task_count(job, stage) * config_.probe_ratio;
  for (std::uint32_t w : sampler_.pick(n)) {
    Probe p;
    p.uid = (static_cast<std::uint64_t>(id_) << 40) | next_uid_++;
    p.job_id = job;
    p.stage = stage;
    p.scheduler = id_;
    p.job_arrival = out.now();
    p.runtime_estimate = estimate;
    p.probe_arrival = out.now();
    out.send(scheduler_addr(id_), worker_addr(w), SampleProbe{p, false, 0});
  }
  probes_ += n;
}

void SamplingScheduler::on_task_request(Outbox& out, const TaskRequest& req) {
  TaskKey task = req.task;
  if (task.task == kUnboundTask) {
    auto next = tracker_.next_unlaunched(task.job, task.stage);
    if (!next) {
      ++cancels_;
      out.send(scheduler_addr(id_), worker_addr(req.worker), TaskCancel{req.probe_uid});
      return;
    }
    task.task = *next;
  }
  const Micros duration = tracker_.launch(task);
  out.send(scheduler_addr(id_), worker_addr(req.worker),
           TaskAssign{req.probe_uid, task, duration, SharedState{}});
}

void SamplingScheduler::on_task_finish(Outbox& out, const TaskFinishNotify& note) {
  auto result = tracker_.finish(note.task, note.finish, note.rotations);
  for (std::uint32_t stage : result.ready_stages) submit_stage(out, note.task.job, stage);
  if (result.record) records_.push_back(std::move(*result.record));
}

// ---- EagleCentral -----------------------------------------------------------

std::uint32_t short_partition_size(std::uint32_t workers, double fraction) {
  if (workers < 2 || fraction <= 0) return 0;
  auto k = static_cast<std::uint32_t>(std::lround(fraction * workers));
  return std::clamp<std::uint32_t>(k, 1, workers - 1);
}

EagleCentral::EagleCentral(std::uint32_t workers, std::uint32_t short_partition,
                           std::shared_ptr<const Workload> workload)
    : short_partition_(short_partition), workload_(std::move(workload)), load_(workers, 0) {}

void EagleCentral::on_stage_submit(Outbox& out, const StageSubmit& submit) {
  const Stage& stage = (*workload_).at(submit.job).stages.at(submit.stage);
  const Micros estimate = stage_estimate(stage);
  for (std::uint32_t t = 0; t < stage.durations.size(); ++t) {
    auto best = std::min_element(load_.begin() + short_partition_, load_.end());
    const auto w = static_cast<std::uint32_t>(best - load_.begin());
    *best += estimate;
    Probe p;
    p.uid = (0xffffffULL << 40) | next_uid_++;
    p.job_id = submit.job;
    p.stage = submit.stage;
    p.task_id = t;
    p.scheduler = submit.owner;
    p.job_arrival = out.now();
    p.runtime_estimate = estimate;
    p.probe_arrival = out.now();
    out.send(central_addr(), worker_addr(w), SampleProbe{p, true, 0});
    ++probes_;
  }
}

void EagleCentral::on_task_finish(const TaskFinishNotify& note) {
  load_.at(note.worker) -= note.estimate;
}

}  // namespace peacock
