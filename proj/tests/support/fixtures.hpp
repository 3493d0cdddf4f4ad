#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "peacock/elastic_queue.hpp"
#include "peacock/engine.hpp"
#include "reference_queue.hpp"

namespace fixtures {

using namespace peacock;

// ---- hand-traced end-to-end schedules ---------------------------------------

struct HandTrace {
  Workload workload;
  SimConfig config;
  std::vector<Micros> jct;                     // by job index
  std::vector<std::uint32_t> rotations;        // total per job
};

inline Job single_task_job(std::uint64_t id, Micros at, Micros duration) {
  Job j;
  j.id = id;
  j.arrival = at;
  j.stages = {Stage{{duration}, {}}};
  return j;
}

inline SimConfig hand_trace_config(std::uint32_t workers) {
  SimConfig c;
  c.workers = workers;
  c.schedulers = 1;
  c.network_delay = millis(5);
  c.rotation_interval = seconds(1);
  c.placement = PlacementPolicy::kRoundRobin;
  c.audit = true;
  return c;
}

// Three 10 s jobs at t=0 on two workers. Job 2 lands behind job 0 on w0
// (quotas phi=2, omega=15 s leave room for it) and starts when job 0 ends:
//   5 ms probe arrival, 10 ms request, 15 ms assign, 10.015 s finish
//   job 2: request 10.020, assign 10.025, finish 20.025
inline HandTrace two_workers_three_jobs() {
  HandTrace t;
  for (std::uint64_t j = 0; j < 3; ++j) t.workload.push_back(single_task_job(j, 0, seconds(10)));
  t.config = hand_trace_config(2);
  t.jct = {10'015'000, 10'015'000, 20'025'000};
  t.rotations = {0, 0, 0};
  return t;
}

// Five jobs on three workers (estimates equal durations):
//   J0 0 s/30 s, J1 0 s/30 s, J2 0 s/6 s, J3 1 s/20 s, J4 2 s/4 s.
// J3 (mu=22 s) is queued at w0 at 1.005 and trimmed at once (phi=1); it hops
// to w1 at 2.005 and, being older, passes J4 (mu=28.67 s), which phi=2 then
// evicts. J4 hops to w2, runs 6.025-10.025. A fresher state with phi=1
// evicts J3 from w1 at 8.005; it hops w2 -> w0 -> w1 -> w2 and is reserved
// by the idle w2 at 12.005, running 12.015-32.015 after five hops.
inline HandTrace three_workers_five_jobs() {
  HandTrace t;
  t.workload = {single_task_job(0, 0, seconds(30)), single_task_job(1, 0, seconds(30)),
                single_task_job(2, 0, seconds(6)), single_task_job(3, seconds(1), seconds(20)),
                single_task_job(4, seconds(2), seconds(4))};
  t.config = hand_trace_config(3);
  t.jct = {30'015'000, 30'015'000, 6'015'000, 31'015'000, 8'025'000};
  t.rotations = {0, 0, 0, 5, 1};
  return t;
}

// ---- randomized small queues -------------------------------------------------

struct QueueCase {
  std::vector<Probe> entries;
  Probe incoming;
  Micros now = 0;
  Micros delta = 0;
  SharedState state;
};

inline Probe random_probe(std::mt19937_64& rng, std::uint64_t uid) {
  // Whole seconds so that equalities (ties on theta, deadlines hit exactly)
  // show up often.
  auto sec = [&](int lo, int hi) { return seconds(std::uniform_int_distribution<int>(lo, hi)(rng)); };
  Probe p;
  p.uid = uid;
  p.job_id = static_cast<std::uint32_t>(uid);
  p.task_id = 0;
  p.job_arrival = sec(0, 40);
  p.runtime_estimate = sec(1, 20);
  p.threshold = sec(0, 60);
  return p;
}

inline QueueCase random_queue_case(std::mt19937_64& rng) {
  QueueCase c;
  const int n = std::uniform_int_distribution<int>(0, 8)(rng);
  for (int i = 0; i < n; ++i) c.entries.push_back(random_probe(rng, static_cast<std::uint64_t>(i)));
  c.incoming = random_probe(rng, 100);
  c.now = seconds(std::uniform_int_distribution<int>(0, 90)(rng));
  c.delta = seconds(std::uniform_int_distribution<int>(0, 30)(rng));
  c.state.probe_quota = std::uniform_int_distribution<int>(0, 11)(rng);
  c.state.load_quota = seconds(std::uniform_int_distribution<int>(0, 200)(rng));
  return c;
}

// Builds a WaitingQueue holding exactly `entries` in that order.
inline WaitingQueue load_queue(const std::vector<Probe>& entries, BypassRule rule) {
  WaitingQueue q(rule);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Probe p = entries[i];
    // A zero wait is always tolerable, so this always inserts.
    q.place_or_rotate(p, i, 0, 0);
  }
  return q;
}

// Returns an empty string when the implementation agrees with the reference.
inline std::string compare_with_reference(const QueueCase& c, BypassRule rule) {
  WaitingQueue q = load_queue(c.entries, rule);
  const EnqueueResult got = q.enqueue_probe(c.incoming, c.now, c.delta, c.state);
  const ref::Outcome want =
      ref::enqueue(c.entries, c.incoming, c.now, c.delta, c.state.probe_quota, c.state.load_quota, rule);

  const bool got_rotated = std::holds_alternative<Rotated>(got.placement);
  if (got_rotated != want.rotated) return "placement kind differs";
  if (!got_rotated && std::get<Inserted>(got.placement).position != want.position)
    return "insert position differs";
  if (std::vector<Probe>(q.entries().begin(), q.entries().end()) != want.order) return "final order differs";
  if (got.evicted != want.evicted) return "evictions differ";
  if (q.rotating() != want.rotating) return "rotating buffer differs";
  if (q.total_load() != want.alpha) return "alpha differs";
  return {};
}

// ---- starvation -------------------------------------------------------------

struct StarvationTrial {
  bool ok = true;
  std::string failure;
  Micros expiry = 0;
  Micros started = -1;
  Micros bound = 0;
};

// One worker, one long probe L, then a stream of shorter probes with mixed
// ages aimed at passing it. Quotas are unbounded so nothing is trimmed.
// Estimates equal actual runtimes.
inline StarvationTrial starvation_trial(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto ms = [&](int lo, int hi) { return millis(std::uniform_int_distribution<int>(lo, hi)(rng)); };
  const SharedState unbounded{1'000'000, seconds(1'000'000'000), {}};

  StarvationTrial r;
  WaitingQueue queue;
  Micros running_until = ms(40'000, 120'000);  // task occupying the slot at t=0

  Probe long_probe;
  long_probe.uid = 1;
  long_probe.job_id = 1;
  long_probe.task_id = 0;
  long_probe.job_arrival = ms(0, 5'000);
  long_probe.runtime_estimate = ms(30'000, 90'000);
  long_probe.threshold = ms(0, 20'000);
  r.expiry = long_probe.deadline();

  Micros now = long_probe.job_arrival;
  queue.enqueue_probe(long_probe, now, running_until - now, unbounded);

  auto position_of_long = [&]() -> std::ptrdiff_t {
    for (std::size_t i = 0; i < queue.size(); ++i)
      if (queue.entries()[i].uid == 1) return static_cast<std::ptrdiff_t>(i);
    return -1;
  };
  bool bound_set = false;
  auto set_bound = [&](Micros at) {
    // Work ahead of L at its expiry: rest of the running task plus the
    // probes queued in front of it.
    Micros ahead = std::max<Micros>(0, running_until - at);
    for (std::ptrdiff_t i = 0; i < position_of_long(); ++i) ahead += queue.entries()[i].runtime_estimate;
    r.bound = at + ahead;
    bound_set = true;
  };

  std::uint64_t uid = 2;
  while (r.started < 0) {
    const Micros next_arrival = now + ms(50, 3'000);
    // Drain completions that happen before the next arrival.
    while (running_until <= next_arrival && r.started < 0) {
      if (!bound_set && r.expiry <= running_until) set_bound(std::max(now, r.expiry));
      now = running_until;
      auto head = queue.pop_head();
      if (!head) {
        running_until = next_arrival;  // idle until the next arrival
        break;
      }
      if (head->uid == 1) {
        r.started = now;
        break;
      }
      running_until = now + head->runtime_estimate;
    }
    if (r.started >= 0) break;
    now = next_arrival;
    if (!bound_set && r.expiry <= now) set_bound(r.expiry);

    Probe p;
    p.uid = uid++;
    p.job_id = static_cast<std::uint32_t>(p.uid);
    p.task_id = 0;
    // Half of the stream is older than L (rotated stragglers), half newer.
    p.job_arrival = std::uniform_int_distribution<int>(0, 1)(rng) == 0
                        ? std::max<Micros>(0, long_probe.job_arrival - ms(1, 5'000))
                        : now;
    p.runtime_estimate = ms(100, 5'000);
    p.threshold = ms(0, 600'000);

    const std::ptrdiff_t before = position_of_long();
    const bool expired_before = long_probe.expired(now);
    const EnqueueResult res =
        queue.enqueue_probe(p, now, std::max<Micros>(0, running_until - now), unbounded);
    if (std::holds_alternative<Rotated>(res.placement)) queue.take_rotating();
    const std::ptrdiff_t after = position_of_long();
    if (expired_before && after > before) {
      r.ok = false;
      r.failure = "expired probe moved from " + std::to_string(before) + " to " + std::to_string(after);
      return r;
    }
  }
  if (!bound_set) set_bound(r.expiry);
  if (r.started > std::max(r.bound, r.expiry)) {
    r.ok = false;
    r.failure = "long probe started at " + std::to_string(r.started) + "us, bound " +
                std::to_string(r.bound) + "us";
  }
  return r;
}

}  // namespace fixtures
