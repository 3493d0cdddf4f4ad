#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <variant>
#include <vector>

#include "peacock/time.hpp"

namespace peacock {

inline constexpr std::uint32_t kUnboundTask = 0xffffffffu;

struct TaskKey {
  std::uint32_t job = 0;
  std::uint32_t stage = 0;
  std::uint32_t task = kUnboundTask;

  auto operator<=>(const TaskKey&) const = default;
};

// Placeholder for one task. Job arrival, estimate and threshold are fixed
// when the scheduler admits the stage; only the hop counter and the local
// arrival stamp change while the probe travels.
struct Probe {
  std::uint64_t uid = 0;
  std::uint32_t job_id = 0;
  std::uint32_t stage = 0;
  std::uint32_t task_id = kUnboundTask;
  std::uint32_t scheduler = 0;
  Micros job_arrival = 0;       // lambda
  Micros runtime_estimate = 0;  // theta
  Micros threshold = 0;         // mu
  Micros probe_arrival = 0;     // beta, bookkeeping only
  std::uint32_t rotation_count = 0;

  Micros deadline() const { return job_arrival + threshold; }
  bool expired(Micros now) const { return now >= deadline(); }
  TaskKey task() const { return {job_id, stage, task_id}; }

  bool operator==(const Probe&) const = default;
};

// Totally ordered freshness stamp: (time, scheduler, per-scheduler mutation
// counter). The counter separates two different states one scheduler derives
// at the same instant.
struct StateVersion {
  Micros time = -1;
  std::uint32_t scheduler = 0;
  std::uint64_t seq = 0;

  auto operator<=>(const StateVersion&) const = default;
};

struct SharedState {
  std::int64_t probe_quota = 0;  // phi
  Micros load_quota = 0;         // omega
  StateVersion version{};

  bool operator==(const SharedState&) const = default;
};

// How an arriving probe that was admitted later than a waiting probe decides
// whether it may pass it.
enum class BypassRule {
  // Pass only if the waiting probe is not past its deadline and the insertion
  // keeps its estimated start within the deadline. Expired probes are never
  // passed, whichever probe is older.
  kGuarded,
  // The inequality exactly as printed in the original pseudo-code:
  // theta_p <= theta_q && lambda_q + mu_q + theta_p <= now.
  kLiteral,
};

struct Inserted {
  std::size_t position = 0;  // index from head at insertion time
  bool operator==(const Inserted&) const = default;
};
struct Rotated {
  bool operator==(const Rotated&) const = default;
};
using Placement = std::variant<Inserted, Rotated>;

struct EnqueueResult {
  Placement placement;
  std::vector<Probe> evicted;  // in removal order, already in the rotating buffer
};

// A worker's elastic waiting queue. Head is the next probe to execute.
// `rotating` holds probes marked for the next rotation round; a probe is in
// exactly one of the two.
class WaitingQueue {
 public:
  explicit WaitingQueue(BypassRule rule = BypassRule::kGuarded) : rule_(rule) {}

  // Priority insertion followed by quota trimming. `remaining` is the relict
  // runtime of the running task (0 when idle or only reserved).
  EnqueueResult enqueue_probe(const Probe& p, Micros now, Micros remaining,
                              const SharedState& state);

  // Inserts p at `position` if it can still start before its deadline, or if
  // the deadline already passed; otherwise marks it for rotation.
  Placement place_or_rotate(const Probe& p, std::size_t position, Micros now, Micros wait);

  // Evicts from the tail while |entries| >= phi or alpha >= omega.
  std::vector<Probe> trim_to_quota(const SharedState& state);

  std::optional<Probe> pop_head();

  void mark_for_rotation(const Probe& p) { rotating_.push_back(p); }
  std::vector<Probe> take_rotating();
  std::optional<Probe> take_first_rotating();

  const std::deque<Probe>& entries() const { return entries_; }
  const std::vector<Probe>& rotating() const { return rotating_; }
  Micros total_load() const { return alpha_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  BypassRule rule() const { return rule_; }

 private:
  bool may_pass(const Probe& p, const Probe& q, Micros now, Micros wait) const;

  BypassRule rule_;
  std::deque<Probe> entries_;
  std::vector<Probe> rotating_;
  Micros alpha_ = 0;
};

}  // namespace peacock
