#pragma once

#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "peacock/elastic_queue.hpp"
#include "peacock/engine.hpp"

namespace peacock {

enum class ProbeSource { kScheduler, kRotation };

// One single-slot Peacock worker on the ring.
//
// Slot life cycle: Idle -> Reserved (TaskRequest sent) -> Running (TaskAssign
// received) -> next probe or Idle. While Reserved the relict runtime used for
// enqueueing is 0.
class PeacockWorker {
 public:
  PeacockWorker(std::uint32_t id, std::uint32_t successor, Micros rotation_interval,
                Micros tick_phase = 0, BypassRule rule = BypassRule::kGuarded);

  void on_probe_arrival(Outbox& out, Probe p, const SharedState& piggyback, ProbeSource source);
  void on_rotation_batch(Outbox& out, const RotationMessage& msg);
  // Sends and returns the round's message when there are marked probes or the
  // known state changed since the last send.
  std::optional<RotationMessage> on_rotation_tick(Outbox& out);
  void on_task_assign(Outbox& out, const TaskAssign& assign);
  void on_task_complete(Outbox& out);
  // Adopts `s` if it is newer and trims the queue to the new quotas.
  std::vector<Probe> adopt_shared_state(const SharedState& s);

  std::uint32_t id() const { return id_; }
  std::uint32_t successor() const { return successor_; }
  SlotState slot() const { return slot_; }
  const std::optional<Probe>& current() const { return current_; }
  Micros finish_time() const { return finish_time_; }
  const WaitingQueue& queue() const { return queue_; }
  const SharedState& known_state() const { return known_; }
  const StateVersion& last_sent_version() const { return last_sent_; }
  Micros busy_time() const { return busy_time_; }
  std::uint64_t rotations_sent() const { return rotations_sent_; }
  std::uint64_t messages_sent() const { return messages_sent_; }
  bool tick_armed() const { return tick_armed_; }

 private:
  void accept(Outbox& out, Probe p);
  void reserve(Outbox& out, Probe p);
  void start_next(Outbox& out);
  void arm_tick(Outbox& out);
  Address self() const { return worker_addr(id_); }

  std::uint32_t id_;
  std::uint32_t successor_;
  Micros interval_;
  Micros phase_;
  WaitingQueue queue_;
  SharedState known_;
  StateVersion last_sent_;
  SlotState slot_ = SlotState::kIdle;
  std::optional<Probe> current_;
  Micros finish_time_ = 0;
  Micros duration_ = 0;
  bool tick_armed_ = false;
  std::unordered_set<std::uint64_t> held_;
  Micros busy_time_ = 0;
  std::uint64_t rotations_sent_ = 0;
  std::uint64_t messages_sent_ = 0;
};

}  // namespace peacock
