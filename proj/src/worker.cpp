#include "peacock/worker.hpp"

#include <algorithm>
#include <string>

#include "peacock/errors.hpp"

namespace peacock {

namespace {

Micros floor_div(Micros a, Micros b) {
  Micros q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

PeacockWorker::PeacockWorker(std::uint32_t id, std::uint32_t successor, Micros rotation_interval,
                             Micros tick_phase, BypassRule rule)
    : id_(id), successor_(successor), interval_(rotation_interval), phase_(tick_phase), queue_(rule) {}

std::vector<Probe> PeacockWorker::adopt_shared_state(const SharedState& s) {
  if (s.version <= known_.version) return {};
  known_ = s;
  return queue_.trim_to_quota(known_);
}

void PeacockWorker::on_probe_arrival(Outbox& out, Probe p, const SharedState& piggyback,
                                     ProbeSource /*source*/) {
  adopt_shared_state(piggyback);
  accept(out, std::move(p));
  arm_tick(out);
}

void PeacockWorker::on_rotation_batch(Outbox& out, const RotationMessage& msg) {
  adopt_shared_state(msg.state);
  for (Probe& p : msg.unpack(out.now())) accept(out, std::move(p));
  arm_tick(out);
}

void PeacockWorker::accept(Outbox& out, Probe p) {
  if (!held_.insert(p.uid).second)
    throw ProtocolViolation("worker " + std::to_string(id_) + " received probe " +
                            std::to_string(p.uid) + " twice");
  p.probe_arrival = out.now();
  if (slot_ == SlotState::kIdle && queue_.empty()) {
    reserve(out, std::move(p));
    return;
  }
  const Micros remaining =
      slot_ == SlotState::kRunning ? std::max<Micros>(0, finish_time_ - out.now()) : 0;
  queue_.enqueue_probe(p, out.now(), remaining, known_);
}

void PeacockWorker::reserve(Outbox& out, Probe p) {
  slot_ = SlotState::kReserved;
  out.send(self(), scheduler_addr(p.scheduler),
           TaskRequest{id_, p.uid, p.task(), p.rotation_count});
  current_ = std::move(p);
}

void PeacockWorker::on_task_assign(Outbox& out, const TaskAssign& assign) {
  if (slot_ != SlotState::kReserved || !current_ || current_->uid != assign.probe_uid)
    throw ProtocolViolation("worker " + std::to_string(id_) + " got an assignment it did not request");
  adopt_shared_state(assign.state);
  slot_ = SlotState::kRunning;
  duration_ = assign.duration;
  finish_time_ = out.now() + assign.duration;
  busy_time_ += assign.duration;
  out.schedule(self(), finish_time_, TaskComplete{});
  arm_tick(out);
}

void PeacockWorker::on_task_complete(Outbox& out) {
  if (slot_ != SlotState::kRunning || !current_)
    throw ProtocolViolation("worker " + std::to_string(id_) + " completed without a running task");
  const Probe& p = *current_;
  out.send(self(), scheduler_addr(p.scheduler),
           TaskFinishNotify{p.task(), id_, out.now(), p.rotation_count, p.runtime_estimate});
  held_.erase(p.uid);
  current_.reset();
  start_next(out);
  arm_tick(out);
}

void PeacockWorker::start_next(Outbox& out) {
  if (auto next = queue_.pop_head()) {
    reserve(out, std::move(*next));
  } else if (auto marked = queue_.take_first_rotating()) {
    // Nothing waits locally: run a probe marked for rotation instead of
    // shipping it away while this slot stays free.
    reserve(out, std::move(*marked));
  } else {
    slot_ = SlotState::kIdle;
  }
}

std::optional<RotationMessage> PeacockWorker::on_rotation_tick(Outbox& out) {
  tick_armed_ = false;
  if (queue_.rotating().empty() && !(last_sent_ < known_.version)) return std::nullopt;
  std::vector<Probe> probes = queue_.take_rotating();
  for (Probe& p : probes) {
    ++p.rotation_count;
    held_.erase(p.uid);
  }
  RotationMessage msg = RotationMessage::pack(id_, probes, known_);
  last_sent_ = known_.version;
  rotations_sent_ += probes.size();
  ++messages_sent_;
  out.send(self(), worker_addr(successor_), RotationBatch{msg});
  return msg;
}

void PeacockWorker::arm_tick(Outbox& out) {
  if (tick_armed_) return;
  if (queue_.rotating().empty() && !(last_sent_ < known_.version)) return;
  const Micros next = phase_ + (floor_div(out.now() - phase_, interval_) + 1) * interval_;
  out.schedule(self(), next, RotationTick{});
  tick_armed_ = true;
}

}  // namespace peacock
