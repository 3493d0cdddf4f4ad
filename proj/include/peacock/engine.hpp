#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "peacock/elastic_queue.hpp"
#include "peacock/messages.hpp"
#include "peacock/metrics.hpp"
#include "peacock/time.hpp"
#include "peacock/workload.hpp"

namespace peacock {

// What an entity's handlers may do: read the clock, send a message (delivered
// after the network delay) or arm a local timer (no delay).
class Outbox {
 public:
  virtual ~Outbox() = default;
  virtual Micros now() const = 0;
  virtual void send(Address from, Address to, Payload payload) = 0;
  virtual void schedule(Address target, Micros at, Payload payload) = 0;
};

// Min-heap on (time, seq).
class EventQueue {
 public:
  void push(Event e);
  Event pop();
  bool empty() const { return heap_.empty(); }
  Micros top_time() const { return heap_.front().time; }
  std::size_t size() const { return heap_.size(); }

 private:
  std::vector<Event> heap_;
};

class Network final : public Outbox {
 public:
  Network(Micros delay, std::uint32_t workers, std::uint32_t schedulers, bool has_central);

  Micros now() const override { return clock_; }
  void send(Address from, Address to, Payload payload) override;
  void schedule(Address target, Micros at, Payload payload) override;

  bool idle() const { return queue_.empty(); }
  std::size_t pending() const { return queue_.size(); }
  Micros peek_time() const { return queue_.top_time(); }
  // Pops the next event and advances the clock to it.
  Event next();

  const std::array<std::uint64_t, kPayloadKinds>& sent() const { return sent_; }

 private:
  void check(Address a) const;

  Micros delay_;
  std::uint32_t workers_;
  std::uint32_t schedulers_;
  bool has_central_;
  Micros clock_ = 0;
  std::uint64_t seq_ = 0;
  EventQueue queue_;
  std::array<std::uint64_t, kPayloadKinds> sent_{};
};

// Single task slot of a worker: Reserved means a TaskRequest is in flight.
enum class SlotState { kIdle, kReserved, kRunning };

enum class Algorithm { kPeacock, kSparrow, kEagle };
enum class PlacementPolicy { kRandom, kRoundRobin };
enum class JobAssignment { kRoundRobin, kRandom };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct SparrowConfig {
  std::uint32_t probe_ratio = 2;
};

struct EagleConfig {
  Micros long_job_cutoff = seconds(60);
  double short_partition_fraction = 0.15;
  std::uint32_t probe_ratio = 2;
  Micros srpt_starvation_bound = seconds(100);
  std::uint32_t resample_limit = 1;
};

struct SimConfig {
  std::uint32_t workers = 100;
  std::uint32_t schedulers = 10;
  Micros rotation_interval = seconds(1);
  Micros network_delay = millis(5);
  std::uint64_t seed = 1;
  Algorithm algorithm = Algorithm::kPeacock;
  PlacementPolicy placement = PlacementPolicy::kRandom;
  JobAssignment job_assignment = JobAssignment::kRoundRobin;
  BypassRule bypass_rule = BypassRule::kGuarded;
  bool rotation_jitter = false;  // per-worker tick phase in [0, R)
  SparrowConfig sparrow;
  EagleConfig eagle;
  std::uint64_t max_events = 4'000'000'000ULL;
  // Checks after each drained timestamp that no worker idles with queued probes.
  bool audit = false;

  void validate() const;  // throws ConfigError
};

// Drives one algorithm over one workload until no events remain, then checks
// quiescence (all jobs complete, aggregates zero, queues drained). Throws
// SimulationError when a check fails or the event budget runs out.
RunResult run(const SimConfig& config, const Workload& workload);

}  // namespace peacock
