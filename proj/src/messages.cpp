#include "peacock/messages.hpp"

#include <map>
#include <tuple>

namespace peacock {

RotationMessage RotationMessage::pack(std::uint32_t sender, std::span<const Probe> probes,
                                      const SharedState& state) {
  RotationMessage msg{sender, {}, state};
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> index;
  for (const Probe& p : probes) {
    auto [it, fresh] = index.try_emplace({p.job_id, p.stage}, msg.groups.size());
    if (fresh) {
      msg.groups.push_back({p.job_id, p.stage, p.scheduler, p.job_arrival, p.threshold,
                            p.runtime_estimate, {}});
    }
    msg.groups[it->second].tasks.push_back({p.uid, p.task_id, p.rotation_count});
  }
  return msg;
}

std::vector<Probe> RotationMessage::unpack(Micros received_at) const {
  std::vector<Probe> out;
  out.reserve(probe_count());
  for (const RotationGroup& g : groups) {
    for (const RotatedTask& t : g.tasks) {
      out.push_back({t.uid, g.job_id, g.stage, t.task_id, g.scheduler, g.job_arrival,
                     g.runtime_estimate, g.threshold, received_at, t.rotation_count});
    }
  }
  return out;
}

std::size_t RotationMessage::probe_count() const {
  std::size_t n = 0;
  for (const RotationGroup& g : groups) n += g.tasks.size();
  return n;
}

}  // namespace peacock
