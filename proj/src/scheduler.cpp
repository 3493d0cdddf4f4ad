#include "peacock/scheduler.hpp"

#include <iostream>
#include <numeric>

#include "peacock/errors.hpp"

namespace peacock {

WorkerSampler::WorkerSampler(std::uint32_t workers, PlacementPolicy policy, Rng rng)
    : policy_(policy), rng_(std::move(rng)), perm_(workers) {
  std::iota(perm_.begin(), perm_.end(), 0u);
}

std::vector<std::uint32_t> WorkerSampler::pick(std::size_t n) {
  std::vector<std::uint32_t> out;
  out.reserve(n);
  const std::size_t w = perm_.size();
  if (policy_ == PlacementPolicy::kRoundRobin) {
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(cursor_);
      cursor_ = static_cast<std::uint32_t>((cursor_ + 1) % w);
    }
    return out;
  }
  while (out.size() < n) {
    const std::size_t take = std::min(n - out.size(), w);
    // Partial Fisher-Yates over the persistent permutation.
    for (std::size_t i = 0; i < take; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, w - 1);
      std::swap(perm_[i], perm_[pick(rng_)]);
      out.push_back(perm_[i]);
    }
  }
  return out;
}

std::uint32_t WorkerSampler::pick_one() { return pick(1).front(); }

std::int64_t probe_quota(std::int64_t probe_count, std::uint32_t workers) {
  const std::int64_t w = workers;
  return (2 * probe_count + w) / (2 * w);
}

PeacockScheduler::PeacockScheduler(std::uint32_t id, std::uint32_t schedulers,
                                   std::uint32_t workers, std::shared_ptr<const Workload> workload,
                                   PlacementPolicy placement, Rng rng)
    : id_(id),
      schedulers_(schedulers),
      workers_(workers),
      tracker_(std::move(workload), id),
      sampler_(workers, placement, std::move(rng)) {}

SharedState PeacockScheduler::current_shared_state(Micros now) const {
  return {probe_quota(aggregate_.probe_count, workers_),
          aggregate_.total_load / static_cast<Micros>(workers_),
          {now, id_, mutations_}};
}

void PeacockScheduler::apply(int sign, std::int64_t count, Micros load) {
  aggregate_.probe_count += sign * count;
  aggregate_.total_load += sign * load;
  if (aggregate_.probe_count < 0 || aggregate_.total_load < 0) {
    ++clamps_;
    std::cerr << "scheduler " << id_ << ": aggregate went negative (" << aggregate_.probe_count
              << ", " << aggregate_.total_load << "us), clamping\n";
    aggregate_.probe_count = std::max<std::int64_t>(aggregate_.probe_count, 0);
    aggregate_.total_load = std::max<Micros>(aggregate_.total_load, 0);
  }
  ++mutations_;
}

void PeacockScheduler::broadcast(Outbox& out, const PeerUpdate& update) {
  for (std::uint32_t s = 0; s < schedulers_; ++s)
    if (s != id_) out.send(scheduler_addr(id_), scheduler_addr(s), update);
}

void PeacockScheduler::on_job_arrival(Outbox& out, std::uint32_t job) {
  for (std::uint32_t stage : tracker_.admit(job, out.now())) submit_stage(out, job, stage);
}

void PeacockScheduler::submit_stage(Outbox& out, std::uint32_t job, std::uint32_t stage) {
  const Micros now = out.now();
  const std::size_t n = tracker_.task_count(job, stage);
  const Micros estimate = tracker_.estimate(job, stage);
  // The threshold is the load quota in force before this stage is counted.
  const Micros threshold = current_shared_state(now).load_quota;
  const auto count = static_cast<std::int64_t>(n);
  apply(+1, count, count * estimate);
  broadcast(out, PeerUpdate{+1, count, count * estimate});

  const SharedState state = current_shared_state(now);
  const std::vector<std::uint32_t> targets = sampler_.pick(n);
  for (std::size_t i = 0; i < n; ++i) {
    Probe p;
    p.uid = (static_cast<std::uint64_t>(id_) << 40) | next_uid_++;
    p.job_id = job;
    p.stage = stage;
    p.task_id = static_cast<std::uint32_t>(i);
    p.scheduler = id_;
    p.job_arrival = now;
    p.runtime_estimate = estimate;
    p.threshold = threshold;
    p.probe_arrival = now;
    out.send(scheduler_addr(id_), worker_addr(targets[i]), ProbeSubmit{p, state});
  }
  probes_ += n;
}

void PeacockScheduler::on_task_request(Outbox& out, const TaskRequest& req) {
  if (req.task.task == kUnboundTask) throw ProtocolViolation("unbound probe sent to a Peacock scheduler");
  const Micros duration = tracker_.launch(req.task);
  out.send(scheduler_addr(id_), worker_addr(req.worker),
           TaskAssign{req.probe_uid, req.task, duration, current_shared_state(out.now())});
}

void PeacockScheduler::on_task_finish(Outbox& out, const TaskFinishNotify& note) {
  const Micros estimate = tracker_.estimate(note.task.job, note.task.stage);
  auto result = tracker_.finish(note.task, note.finish, note.rotations);
  apply(-1, 1, estimate);
  broadcast(out, PeerUpdate{-1, 1, estimate});
  for (std::uint32_t stage : result.ready_stages) submit_stage(out, note.task.job, stage);
  if (result.record) records_.push_back(std::move(*result.record));
}

void PeacockScheduler::on_peer_update(const PeerUpdate& update) {
  apply(update.sign, update.count, update.load);
}

}  // namespace peacock
