#include "peacock/elastic_queue.hpp"

#include <iterator>
#include <stdexcept>

#include "peacock/errors.hpp"

namespace peacock {

bool WaitingQueue::may_pass(const Probe& p, const Probe& q, Micros now, Micros wait) const {
  if (p.job_arrival >= q.job_arrival) {
    if (p.runtime_estimate > q.runtime_estimate) return false;
    if (rule_ == BypassRule::kLiteral) return q.deadline() + p.runtime_estimate <= now;
    // `wait - theta_q` is q's estimated start; p would push it back by theta_p.
    if (q.expired(now)) return false;
    return now + (wait - q.runtime_estimate + p.runtime_estimate) <= q.deadline();
  }
  // p was admitted earlier than q: it stays behind a shorter q as long as its
  // own deadline still holds there.
  if (q.runtime_estimate <= p.runtime_estimate && now + wait <= p.deadline()) return false;
  if (rule_ == BypassRule::kGuarded && q.expired(now)) return false;
  return true;
}

EnqueueResult WaitingQueue::enqueue_probe(const Probe& p, Micros now, Micros remaining,
                                          const SharedState& state) {
  if (p.runtime_estimate <= 0) throw InvalidProbe("probe runtime estimate must be positive");
  if (remaining < 0) throw std::invalid_argument("negative remaining runtime");

  Micros wait = remaining + alpha_;
  std::optional<Placement> placement;
  for (std::size_t i = entries_.size(); i-- > 0;) {
    const Probe& q = entries_[i];
    if (!may_pass(p, q, now, wait)) {
      placement = place_or_rotate(p, i + 1, now, wait);
      break;
    }
    wait -= q.runtime_estimate;
  }
  if (!placement) {
    entries_.push_front(p);
    alpha_ += p.runtime_estimate;
    placement = Inserted{0};
  }
  return {*placement, trim_to_quota(state)};
}

Placement WaitingQueue::place_or_rotate(const Probe& p, std::size_t position, Micros now,
                                        Micros wait) {
  if (now + wait <= p.deadline() || p.deadline() <= now) {
    entries_.insert(entries_.begin() + static_cast<std::ptrdiff_t>(position), p);
    alpha_ += p.runtime_estimate;
    return Inserted{position};
  }
  rotating_.push_back(p);
  return Rotated{};
}

std::vector<Probe> WaitingQueue::trim_to_quota(const SharedState& state) {
  std::vector<Probe> evicted;
  while (!entries_.empty() && (static_cast<std::int64_t>(entries_.size()) >= state.probe_quota ||
                               alpha_ >= state.load_quota)) {
    Probe q = entries_.back();
    entries_.pop_back();
    alpha_ -= q.runtime_estimate;
    rotating_.push_back(q);
    evicted.push_back(std::move(q));
  }
  return evicted;
}

std::optional<Probe> WaitingQueue::pop_head() {
  if (entries_.empty()) return std::nullopt;
  Probe p = entries_.front();
  entries_.pop_front();
  alpha_ -= p.runtime_estimate;
  return p;
}

std::vector<Probe> WaitingQueue::take_rotating() {
  std::vector<Probe> out;
  out.swap(rotating_);
  return out;
}

std::optional<Probe> WaitingQueue::take_first_rotating() {
  if (rotating_.empty()) return std::nullopt;
  Probe p = rotating_.front();
  rotating_.erase(rotating_.begin());
  return p;
}

}  // namespace peacock
