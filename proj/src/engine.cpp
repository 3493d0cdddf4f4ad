#include "peacock/engine.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "peacock/baselines.hpp"
#include "peacock/errors.hpp"
#include "peacock/random.hpp"
#include "peacock/scheduler.hpp"
#include "peacock/worker.hpp"

namespace peacock {

// ---- EventQueue -------------------------------------------------------------

namespace {

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    return a.time != b.time ? a.time > b.time : a.seq > b.seq;
  }
};

}  // namespace

void EventQueue::push(Event e) {
  heap_.push_back(std::move(e));
  std::push_heap(heap_.begin(), heap_.end(), Later{});
}

Event EventQueue::pop() {
  std::pop_heap(heap_.begin(), heap_.end(), Later{});
  Event e = std::move(heap_.back());
  heap_.pop_back();
  return e;
}

// ---- Network ----------------------------------------------------------------

Network::Network(Micros delay, std::uint32_t workers, std::uint32_t schedulers, bool has_central)
    : delay_(delay), workers_(workers), schedulers_(schedulers), has_central_(has_central) {}

void Network::check(Address a) const {
  const bool ok = (a.role == Role::kWorker && a.index < workers_) ||
                  (a.role == Role::kScheduler && a.index < schedulers_) ||
                  (a.role == Role::kCentral && has_central_ && a.index == 0);
  if (!ok) throw ConfigError("message addressed to unknown entity");
}

void Network::send(Address from, Address to, Payload payload) {
  check(from);
  check(to);
  ++sent_[payload.index()];
  queue_.push({clock_ + delay_, seq_++, to, std::move(payload)});
}

void Network::schedule(Address target, Micros at, Payload payload) {
  check(target);
  if (at < clock_) throw SimulationError("timer scheduled in the past");
  queue_.push({at, seq_++, target, std::move(payload)});
}

Event Network::next() {
  Event e = queue_.pop();
  if (e.time < clock_) throw SimulationError("causality violated: event before current clock");
  clock_ = e.time;
  return e;
}

// ---- config -----------------------------------------------------------------

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kPeacock: return "peacock";
    case Algorithm::kSparrow: return "sparrow";
    case Algorithm::kEagle: return "eagle";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "peacock") return Algorithm::kPeacock;
  if (name == "sparrow") return Algorithm::kSparrow;
  if (name == "eagle") return Algorithm::kEagle;
  throw ConfigError("unknown algorithm '" + name + "'");
}

void SimConfig::validate() const {
  if (workers < 1) throw ConfigError("need at least one worker");
  if (schedulers < 1) throw ConfigError("need at least one scheduler");
  if (rotation_interval <= 0) throw ConfigError("rotation interval must be positive");
  if (network_delay < 0) throw ConfigError("network delay must be non-negative");
  if (sparrow.probe_ratio < 1 || eagle.probe_ratio < 1) throw ConfigError("probe ratio must be >= 1");
  if (!(eagle.short_partition_fraction > 0 && eagle.short_partition_fraction < 1))
    throw ConfigError("eagle short partition fraction must be in (0,1)");
  if (eagle.long_job_cutoff <= 0) throw ConfigError("eagle long job cutoff must be positive");
  if (eagle.srpt_starvation_bound < 0) throw ConfigError("eagle starvation bound must be >= 0");
}

// ---- clusters ---------------------------------------------------------------

namespace {

[[noreturn]] void unexpected(const Event& e) {
  std::ostringstream os;
  os << "unexpected " << kPayloadNames[e.payload.index()] << " for entity role "
     << static_cast<int>(e.target.role) << " #" << e.target.index;
  throw ProtocolViolation(os.str());
}

class Cluster {
 public:
  virtual ~Cluster() = default;
  virtual void deliver(Network& net, const Event& e) = 0;
  // Throws SimulationError describing the first broken quiescence invariant.
  virtual void verify_quiescent() const = 0;
  virtual void collect(RunResult& result) = 0;
  // True when some worker sits idle while probes wait in its queue.
  virtual bool idle_with_work() const = 0;
};

class PeacockCluster final : public Cluster {
 public:
  PeacockCluster(const SimConfig& cfg, std::shared_ptr<const Workload> workload) {
    for (std::uint32_t s = 0; s < cfg.schedulers; ++s) {
      schedulers_.emplace_back(s, cfg.schedulers, cfg.workers, workload, cfg.placement,
                               make_stream(cfg.seed, stream::kSchedulerBase + s));
    }
    for (std::uint32_t w = 0; w < cfg.workers; ++w) {
      Micros phase = 0;
      if (cfg.rotation_jitter) {
        Rng rng = make_stream(cfg.seed, stream::kWorkerBase + w);
        phase = std::uniform_int_distribution<Micros>(0, cfg.rotation_interval - 1)(rng);
      }
      workers_.emplace_back(w, (w + 1) % cfg.workers, cfg.rotation_interval, phase, cfg.bypass_rule);
    }
  }

  void deliver(Network& net, const Event& e) override {
    if (e.target.role == Role::kScheduler) {
      PeacockScheduler& s = schedulers_[e.target.index];
      if (auto* a = std::get_if<JobArrival>(&e.payload)) s.on_job_arrival(net, a->job);
      else if (auto* r = std::get_if<TaskRequest>(&e.payload)) s.on_task_request(net, *r);
      else if (auto* f = std::get_if<TaskFinishNotify>(&e.payload)) s.on_task_finish(net, *f);
      else if (auto* u = std::get_if<PeerUpdate>(&e.payload)) s.on_peer_update(*u);
      else unexpected(e);
      return;
    }
    if (e.target.role != Role::kWorker) unexpected(e);
    PeacockWorker& w = workers_[e.target.index];
    if (auto* p = std::get_if<ProbeSubmit>(&e.payload)) {
      w.on_probe_arrival(net, p->probe, p->state, ProbeSource::kScheduler);
    } else if (auto* b = std::get_if<RotationBatch>(&e.payload)) {
      w.on_rotation_batch(net, b->message);
    } else if (std::holds_alternative<RotationTick>(e.payload)) {
      w.on_rotation_tick(net);
    } else if (auto* a = std::get_if<TaskAssign>(&e.payload)) {
      w.on_task_assign(net, *a);
    } else if (std::holds_alternative<TaskComplete>(e.payload)) {
      w.on_task_complete(net);
    } else {
      unexpected(e);
    }
  }

  void verify_quiescent() const override {
    for (const PeacockScheduler& s : schedulers_) {
      if (s.tracker().active_jobs() != 0)
        throw SimulationError("scheduler " + std::to_string(s.id()) + " has unfinished jobs");
      if (s.aggregate() != Aggregate{})
        throw SimulationError("scheduler " + std::to_string(s.id()) + " aggregate not zero at quiescence");
    }
    for (const PeacockWorker& w : workers_) {
      if (w.slot() != SlotState::kIdle || !w.queue().empty() || !w.queue().rotating().empty())
        throw SimulationError("worker " + std::to_string(w.id()) + " still holds work at quiescence");
    }
  }

  void collect(RunResult& result) override {
    Counters& c = result.counters;
    for (PeacockScheduler& s : schedulers_) {
      c.probes += s.probes_created();
      c.tasks += s.tracker().launches();
      c.aggregate_clamps += s.clamps();
      for (JobRecord& r : s.records()) result.jobs.push_back(std::move(r));
    }
    for (const PeacockWorker& w : workers_) {
      c.busy_time += w.busy_time();
      c.rotations += w.rotations_sent();
      c.rotation_messages += w.messages_sent();
    }
  }

  bool idle_with_work() const override {
    return std::any_of(workers_.begin(), workers_.end(), [](const PeacockWorker& w) {
      return w.slot() == SlotState::kIdle && !w.queue().empty();
    });
  }

 private:
  std::vector<PeacockScheduler> schedulers_;
  std::vector<PeacockWorker> workers_;
};

class SamplingCluster final : public Cluster {
 public:
  SamplingCluster(const SimConfig& cfg, std::shared_ptr<const Workload> workload) {
    const bool eagle = cfg.algorithm == Algorithm::kEagle;
    SamplingSchedulerConfig sc;
    ResamplePolicy resample;
    QueueOrder order = QueueOrder::kFifo;
    Micros bound = 0;
    if (eagle) {
      sc.probe_ratio = cfg.eagle.probe_ratio;
      sc.long_job_cutoff = cfg.eagle.long_job_cutoff;
      resample.short_partition = short_partition_size(cfg.workers, cfg.eagle.short_partition_fraction);
      resample.limit = cfg.eagle.resample_limit;
      order = QueueOrder::kSrpt;
      bound = cfg.eagle.srpt_starvation_bound;
      central_.emplace(cfg.workers, resample.short_partition, workload);
    } else {
      sc.probe_ratio = cfg.sparrow.probe_ratio;
    }
    for (std::uint32_t s = 0; s < cfg.schedulers; ++s) {
      schedulers_.emplace_back(s, cfg.workers, workload, sc, cfg.placement,
                               make_stream(cfg.seed, stream::kSchedulerBase + s));
    }
    for (std::uint32_t w = 0; w < cfg.workers; ++w) {
      workers_.emplace_back(w, order, bound, resample, make_stream(cfg.seed, stream::kWorkerBase + w));
    }
  }

  void deliver(Network& net, const Event& e) override {
    switch (e.target.role) {
      case Role::kScheduler: {
        SamplingScheduler& s = schedulers_[e.target.index];
        if (auto* a = std::get_if<JobArrival>(&e.payload)) s.on_job_arrival(net, a->job);
        else if (auto* r = std::get_if<TaskRequest>(&e.payload)) s.on_task_request(net, *r);
        else if (auto* f = std::get_if<TaskFinishNotify>(&e.payload)) s.on_task_finish(net, *f);
        else unexpected(e);
        return;
      }
      case Role::kCentral: {
        if (auto* st = std::get_if<StageSubmit>(&e.payload)) central_->on_stage_submit(net, *st);
        else if (auto* f = std::get_if<TaskFinishNotify>(&e.payload)) central_->on_task_finish(*f);
        else unexpected(e);
        return;
      }
      case Role::kWorker: {
        SamplingWorker& w = workers_[e.target.index];
        if (auto* p = std::get_if<SampleProbe>(&e.payload)) w.on_probe(net, *p);
        else if (auto* a = std::get_if<TaskAssign>(&e.payload)) w.on_task_assign(net, *a);
        else if (auto* c = std::get_if<TaskCancel>(&e.payload)) w.on_task_cancel(net, *c);
        else if (std::holds_alternative<TaskComplete>(e.payload)) w.on_task_complete(net);
        else unexpected(e);
        return;
      }
    }
  }

  void verify_quiescent() const override {
    for (const SamplingScheduler& s : schedulers_) {
      if (s.tracker().active_jobs() != 0)
        throw SimulationError("scheduler " + std::to_string(s.id()) + " has unfinished jobs");
    }
    for (const SamplingWorker& w : workers_) {
      if (w.slot() != SlotState::kIdle || !w.queue().empty())
        throw SimulationError("worker " + std::to_string(w.id()) + " still holds work at quiescence");
    }
    if (central_) {
      for (Micros l : central_->known_load())
        if (l != 0) throw SimulationError("central scheduler load estimate not zero at quiescence");
    }
  }

  void collect(RunResult& result) override {
    Counters& c = result.counters;
    for (SamplingScheduler& s : schedulers_) {
      c.probes += s.probes_created();
      c.tasks += s.tracker().launches();
      c.cancels += s.cancels();
      for (JobRecord& r : s.records()) result.jobs.push_back(std::move(r));
    }
    if (central_) c.probes += central_->probes_created();
    for (const SamplingWorker& w : workers_) {
      c.busy_time += w.busy_time();
      c.resamples += w.resamples();
    }
  }

  bool idle_with_work() const override {
    return std::any_of(workers_.begin(), workers_.end(), [](const SamplingWorker& w) {
      return w.slot() == SlotState::kIdle && !w.queue().empty();
    });
  }

 private:
  std::vector<SamplingScheduler> schedulers_;
  std::vector<SamplingWorker> workers_;
  std::optional<EagleCentral> central_;
};

}  // namespace

RunResult run(const SimConfig& config, const Workload& workload) {
  config.validate();
  for (std::size_t i = 1; i < workload.size(); ++i) {
    if (workload[i].arrival < workload[i - 1].arrival)
      throw ConfigError("workload must be sorted by arrival");
  }
  auto shared = std::make_shared<const Workload>(workload);

  std::unique_ptr<Cluster> cluster;
  if (config.algorithm == Algorithm::kPeacock) cluster = std::make_unique<PeacockCluster>(config, shared);
  else cluster = std::make_unique<SamplingCluster>(config, shared);

  Network net(config.network_delay, config.workers, config.schedulers,
              config.algorithm == Algorithm::kEagle);
  Rng assign = make_stream(config.seed, stream::kJobAssignment);
  std::uniform_int_distribution<std::uint32_t> pick(0, config.schedulers - 1);
  for (std::uint32_t j = 0; j < workload.size(); ++j) {
    const std::uint32_t owner = config.job_assignment == JobAssignment::kRoundRobin
                                    ? j % config.schedulers
                                    : pick(assign);
    net.schedule(scheduler_addr(owner), workload[j].arrival, JobArrival{j});
  }

  RunResult result;
  const Micros window_start = workload.empty() ? 0 : workload.front().arrival;
  const Micros window_end = workload.empty() ? 0 : workload.back().arrival;
  Micros window_busy = 0;
  std::uint64_t events = 0;
  while (!net.idle()) {
    if (++events > config.max_events) {
      std::ostringstream os;
      os << "event budget of " << config.max_events << " exhausted at t=" << to_seconds(net.now())
         << "s with " << net.pending() << " pending events";
      throw SimulationError(os.str());
    }
    const Event e = net.next();
    cluster->deliver(net, e);
    if (const auto* a = std::get_if<TaskAssign>(&e.payload)) {
      const Micros lo = std::max(e.time, window_start);
      const Micros hi = std::min(e.time + a->duration, window_end);
      if (hi > lo) window_busy += hi - lo;
    }
    if (config.audit && (net.idle() || net.peek_time() > e.time) && cluster->idle_with_work()) {
      throw SimulationError("idle worker with queued probes at t=" + std::to_string(e.time) + "us");
    }
  }
  cluster->verify_quiescent();
  cluster->collect(result);

  Counters& c = result.counters;
  c.events = events;
  c.messages = net.sent();
  c.workers = config.workers;
  c.window_start = window_start;
  c.window_end = window_end;
  c.window_busy_time = window_busy;
  std::sort(result.jobs.begin(), result.jobs.end(),
            [](const JobRecord& a, const JobRecord& b) { return a.job_id < b.job_id; });
  for (const JobRecord& r : result.jobs) c.makespan = std::max(c.makespan, r.completion);
  if (result.jobs.size() != workload.size())
    throw SimulationError("not every job produced a record");
  if (c.tasks != 0) {
    std::uint64_t expected = 0;
    for (const Job& j : workload)
      for (const Stage& s : j.stages) expected += s.durations.size();
    if (c.tasks != expected) throw SimulationError("launched task count differs from workload");
  }
  return result;
}

}  // namespace peacock
