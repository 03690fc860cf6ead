#include "nlheat/trace.hpp"

#include <algorithm>
#include <chrono>

#include <json.hpp>

namespace nlheat {

namespace {

std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::case2_start: return "case2_start";
    case EventKind::case2_end: return "case2_end";
    case EventKind::ghost_sent: return "ghost_sent";
    case EventKind::ghost_recv: return "ghost_recv";
    case EventKind::case1_start: return "case1_start";
    case EventKind::case1_end: return "case1_end";
    case EventKind::counter_reset: return "counter_reset";
    case EventKind::transfer_applied: return "transfer_applied";
  }
  return "unknown";
}

EventTrace::EventTrace() : origin_ns_(now_ns()) {}

void EventTrace::record(int node, EventKind kind, int step, int sd, int peer) {
  if (!enabled_) return;
  std::lock_guard lock(mu_);
  events_.push_back(Event{now_ns() - origin_ns_, node, kind, step, sd, peer});
}

std::vector<Event> EventTrace::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::vector<Event> EventTrace::events_of(int node) const {
  std::lock_guard lock(mu_);
  std::vector<Event> out;
  std::copy_if(events_.begin(), events_.end(), std::back_inserter(out),
               [node](const Event& e) { return e.node == node; });
  return out;
}

void EventTrace::clear() {
  std::lock_guard lock(mu_);
  events_.clear();
}

void EventTrace::write_jsonl(std::ostream& out) const {
  std::lock_guard lock(mu_);
  for (const Event& e : events_) {
    nlohmann::json j{{"t_ns", e.t_ns}, {"node", e.node}, {"kind", to_string(e.kind)},
                     {"step", e.step}};
    if (e.sd >= 0) j["sd"] = e.sd;
    if (e.peer >= 0) j["peer"] = e.peer;
    out << j.dump() << '\n';
  }
}

}  // namespace nlheat
