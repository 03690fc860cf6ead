#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <ostream>
#include <string_view>
#include <vector>

namespace nlheat {

enum class EventKind {
  case2_start,
  case2_end,
  ghost_sent,
  ghost_recv,
  case1_start,
  case1_end,
  counter_reset,
  transfer_applied,
};

std::string_view to_string(EventKind kind);

struct Event {
  std::int64_t t_ns = 0;  // since the trace was created
  int node = -1;          // -1 for cluster-wide events
  EventKind kind = EventKind::case2_start;
  int step = 0;
  int sd = -1;
  int peer = -1;  // other node for ghost and transfer events
};

// Append-only event sink shared by all workers. Timestamps are taken under the
// lock, so the recorded order is also timestamp order.
class EventTrace {
 public:
  EventTrace();

  void record(int node, EventKind kind, int step, int sd = -1, int peer = -1);
  void set_enabled(bool on) { enabled_ = on; }
  bool enabled() const { return enabled_; }

  std::vector<Event> events() const;
  std::vector<Event> events_of(int node) const;
  void clear();

  void write_jsonl(std::ostream& out) const;

 private:
  mutable std::mutex mu_;
  std::vector<Event> events_;
  std::int64_t origin_ns_;
  std::atomic<bool> enabled_{true};
};

}  // namespace nlheat
