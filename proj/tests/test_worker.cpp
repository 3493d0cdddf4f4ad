#include "doctest.h"
#include "peacock/errors.hpp"
#include "peacock/worker.hpp"
#include "support/recording_outbox.hpp"

using namespace peacock;
using testing_support::RecordingOutbox;

namespace {

Probe probe(std::uint64_t uid, std::uint32_t job, std::uint32_t task, double lambda_s, double theta_s,
            double mu_s) {
  Probe p;
  p.uid = uid;
  p.job_id = job;
  p.task_id = task;
  p.scheduler = 3;
  p.job_arrival = from_seconds(lambda_s);
  p.runtime_estimate = from_seconds(theta_s);
  p.threshold = from_seconds(mu_s);
  return p;
}

SharedState state(std::int64_t phi, double omega_s, Micros version_time, std::uint64_t seq = 0) {
  return {phi, from_seconds(omega_s), {version_time, 0, seq}};
}

// Puts the worker in Running with the given duration via request/assign.
void start_running(PeacockWorker& w, RecordingOutbox& out, const Probe& p, Micros duration) {
  w.on_probe_arrival(out, p, state(10, 1000, 0), ProbeSource::kScheduler);
  w.on_task_assign(out, TaskAssign{p.uid, p.task(), duration, SharedState{}});
}

}  // namespace

TEST_CASE("idle worker reserves an arriving probe and requests its task") {
  RecordingOutbox out;
  PeacockWorker w(0, 1, seconds(1));
  w.on_probe_arrival(out, probe(7, 2, 1, 0, 5, 10), state(4, 50, 0), ProbeSource::kScheduler);
  CHECK(w.slot() == SlotState::kReserved);
  auto req = out.sent_of<TaskRequest>();
  REQUIRE(req.size() == 1);
  CHECK(req[0].probe_uid == 7);
  CHECK(req[0].task == TaskKey{2, 0, 1});
  CHECK(out.sent[0].to == scheduler_addr(3));
  CHECK(w.queue().empty());
}

TEST_CASE("busy worker with queue room queues the probe silently") {
  RecordingOutbox out;
  PeacockWorker w(0, 1, seconds(1));
  start_running(w, out, probe(1, 1, 0, 0, 10, 10), seconds(10));
  out.clear();
  w.on_probe_arrival(out, probe(2, 2, 0, 0, 5, 100), state(10, 1000, 1), ProbeSource::kScheduler);
  CHECK(out.sent.empty());
  CHECK(w.queue().size() == 1);
  CHECK(w.queue().rotating().empty());
}

TEST_CASE("busy worker with probe quota 1 marks the arrival for rotation") {
  RecordingOutbox out;
  PeacockWorker w(0, 1, seconds(1));
  start_running(w, out, probe(1, 1, 0, 0, 10, 10), seconds(10));
  out.clear();
  w.on_probe_arrival(out, probe(2, 2, 0, 0, 5, 100), state(1, 1000, 1), ProbeSource::kScheduler);
  CHECK(w.queue().empty());
  REQUIRE(w.queue().rotating().size() == 1);
  CHECK(w.queue().rotating()[0].uid == 2);
  CHECK(out.sent.empty());
  CHECK(w.tick_armed());
}

TEST_CASE("a duplicate probe is a protocol violation") {
  RecordingOutbox out;
  PeacockWorker w(0, 1, seconds(1));
  start_running(w, out, probe(1, 1, 0, 0, 10, 10), seconds(10));
  w.on_probe_arrival(out, probe(2, 2, 0, 0, 5, 100), state(10, 1000, 1), ProbeSource::kScheduler);
  CHECK_THROWS_AS(w.on_probe_arrival(out, probe(2, 2, 0, 0, 5, 100), state(10, 1000, 1),
                                     ProbeSource::kRotation),
                  ProtocolViolation);
}

TEST_CASE("rotation ticks") {
  RecordingOutbox out;
  PeacockWorker w(4, 5, seconds(1));

  SUBCASE("nothing marked and no new state sends nothing") {
    CHECK_FALSE(w.on_rotation_tick(out).has_value());
    CHECK(out.sent.empty());
  }

  SUBCASE("marked probes of one job travel under one header") {
    start_running(w, out, probe(1, 1, 0, 0, 10, 10), seconds(100));
    w.on_rotation_tick(out);  // flush the state adopted on arrival
    out.clear();
    const SharedState s = state(1, 1000, seconds(1));
    for (std::uint32_t t = 0; t < 3; ++t)
      w.on_probe_arrival(out, probe(10 + t, 9, t, 0, 5, 100), s, ProbeSource::kScheduler);
    REQUIRE(w.queue().rotating().size() == 3);
    out.clock = seconds(2);
    auto msg = w.on_rotation_tick(out);
    REQUIRE(msg.has_value());
    REQUIRE(msg->groups.size() == 1);
    CHECK(msg->groups[0].job_id == 9);
    REQUIRE(msg->groups[0].tasks.size() == 3);
    for (std::uint32_t t = 0; t < 3; ++t) {
      CHECK(msg->groups[0].tasks[t].task_id == t);
      CHECK(msg->groups[0].tasks[t].rotation_count == 1);
    }
    CHECK(msg->state == s);
    REQUIRE(out.sent.size() == 1);
    CHECK(out.sent[0].to == worker_addr(5));
    CHECK(w.queue().rotating().empty());
    CHECK(w.rotations_sent() == 3);
  }

  SUBCASE("a newer state alone is forwarded once") {
    const SharedState s = state(3, 30, seconds(5));
    w.adopt_shared_state(s);
    auto msg = w.on_rotation_tick(out);
    REQUIRE(msg.has_value());
    CHECK(msg->groups.empty());
    CHECK(msg->state == s);
    CHECK(w.last_sent_version() == s.version);
    CHECK_FALSE(w.on_rotation_tick(out).has_value());
  }
}

TEST_CASE("ticks are armed at the next multiple of the interval") {
  RecordingOutbox out;
  PeacockWorker w(0, 1, seconds(1));
  out.clock = millis(2'500);
  w.on_probe_arrival(out, probe(1, 1, 0, 0, 10, 10), state(1, 10, 1), ProbeSource::kScheduler);
  auto ticks = out.timers_of<RotationTick>();
  REQUIRE(ticks.size() == 1);
  CHECK(ticks[0].at == seconds(3));

  PeacockWorker phased(1, 2, seconds(1), millis(300));
  out.clear();
  out.clock = seconds(3);
  phased.on_probe_arrival(out, probe(2, 2, 0, 0, 10, 10), state(1, 10, 1), ProbeSource::kScheduler);
  ticks = out.timers_of<RotationTick>();
  REQUIRE(ticks.size() == 1);
  CHECK(ticks[0].at == millis(3'300));
}

TEST_CASE("rotated probes are unpacked with their hop count") {
  RecordingOutbox out;
  PeacockWorker w(1, 2, seconds(1));
  std::vector<Probe> batch = {probe(1, 4, 0, 0, 5, 10), probe(2, 4, 1, 0, 5, 10)};
  for (Probe& p : batch) p.rotation_count = 3;
  const auto msg = RotationMessage::pack(0, batch, state(2, 10, 1));
  out.clock = seconds(1);
  w.on_rotation_batch(out, msg);
  // Idle: the first probe is reserved, the second waits behind it.
  CHECK(w.slot() == SlotState::kReserved);
  REQUIRE(w.current().has_value());
  CHECK(w.current()->rotation_count == 3);
  CHECK(w.current()->probe_arrival == seconds(1));
  CHECK(w.queue().size() == 1);
  auto req = out.sent_of<TaskRequest>();
  REQUIRE(req.size() == 1);
  CHECK(req[0].rotations == 3);
}

TEST_CASE("assignment and completion") {
  RecordingOutbox out;
  PeacockWorker w(0, 1, seconds(1));
  const Probe p = probe(1, 1, 0, 0, 68, 10);
  w.on_probe_arrival(out, p, state(10, 1000, 0), ProbeSource::kScheduler);
  out.clock = seconds(10);
  w.on_task_assign(out, TaskAssign{1, p.task(), seconds(68), SharedState{}});
  CHECK(w.slot() == SlotState::kRunning);
  CHECK(w.finish_time() == seconds(78));
  auto done = out.timers_of<TaskComplete>();
  REQUIRE(done.size() == 1);
  CHECK(done[0].at == seconds(78));

  SUBCASE("empty queue goes idle after the notify") {
    out.clear();
    out.clock = seconds(78);
    w.on_task_complete(out);
    CHECK(w.slot() == SlotState::kIdle);
    REQUIRE(out.sent.size() == 1);
    auto note = out.sent_of<TaskFinishNotify>();
    REQUIRE(note.size() == 1);
    CHECK(note[0].finish == seconds(78));
    CHECK(note[0].estimate == seconds(68));
    CHECK(w.busy_time() == seconds(68));
  }

  SUBCASE("queued probe is requested right away") {
    w.on_probe_arrival(out, probe(2, 2, 0, 10, 5, 1000), state(10, 1000, 1), ProbeSource::kScheduler);
    out.clear();
    out.clock = seconds(78);
    w.on_task_complete(out);
    CHECK(w.slot() == SlotState::kReserved);
    auto req = out.sent_of<TaskRequest>();
    REQUIRE(req.size() == 1);
    CHECK(req[0].probe_uid == 2);
  }

  SUBCASE("a marked probe is reclaimed instead of idling") {
    w.on_probe_arrival(out, probe(2, 2, 0, 10, 5, 1000), state(1, 1000, 1), ProbeSource::kScheduler);
    REQUIRE(w.queue().rotating().size() == 1);
    out.clear();
    out.clock = seconds(78);
    w.on_task_complete(out);
    CHECK(w.slot() == SlotState::kReserved);
    CHECK(w.queue().rotating().empty());
    CHECK(out.sent_of<TaskRequest>().size() == 1);
  }
}

TEST_CASE("assignment without a matching reservation is rejected") {
  RecordingOutbox out;
  PeacockWorker w(0, 1, seconds(1));
  CHECK_THROWS_AS(w.on_task_assign(out, TaskAssign{1, {1, 0, 0}, seconds(1), SharedState{}}),
                  ProtocolViolation);
  w.on_probe_arrival(out, probe(5, 1, 0, 0, 1, 1), state(1, 1, 0), ProbeSource::kScheduler);
  CHECK_THROWS_AS(w.on_task_assign(out, TaskAssign{6, {1, 0, 0}, seconds(1), SharedState{}}),
                  ProtocolViolation);
  CHECK_THROWS_AS(w.on_task_complete(out), ProtocolViolation);
}

TEST_CASE("adopting shared state") {
  RecordingOutbox out;
  PeacockWorker w(0, 1, seconds(1));
  start_running(w, out, probe(1, 1, 0, 0, 10, 10), seconds(100));
  const SharedState roomy = state(10, 1000, seconds(1));
  for (std::uint32_t t = 0; t < 3; ++t)
    w.on_probe_arrival(out, probe(10 + t, 2, t, 0, 5, 1000), roomy, ProbeSource::kScheduler);
  REQUIRE(w.queue().size() == 3);

  SUBCASE("same version is ignored") {
    SharedState same = roomy;
    same.probe_quota = 0;
    CHECK(w.adopt_shared_state(same).empty());
    CHECK(w.known_state() == roomy);
    CHECK(w.queue().size() == 3);
  }
  SUBCASE("smaller probe quota evicts from the tail") {
    auto ev = w.adopt_shared_state(state(2, 1000, seconds(2)));
    // Equal estimates and arrivals: each newcomer went ahead, so the queue
    // reads [12, 11, 10].
    REQUIRE(ev.size() == 2);
    CHECK(ev[0].uid == 10);
    CHECK(ev[1].uid == 11);
    CHECK(w.queue().size() == 1);
    CHECK(w.queue().rotating().size() == 2);
  }
  SUBCASE("larger quotas evict nothing") {
    CHECK(w.adopt_shared_state(state(50, 5000, seconds(2))).empty());
    CHECK(w.queue().size() == 3);
  }
}
