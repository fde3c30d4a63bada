#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vdomc/diff.hpp"
#include "vdomc/dom.hpp"
#include "vdomc/error.hpp"
#include "vdomc/vnode.hpp"

namespace vdomc {

// Higher value runs first.
enum class Priority : std::uint8_t { Idle = 0, Render = 1, UserInteraction = 2 };

inline std::string_view to_string(Priority p) {
  switch (p) {
    case Priority::Idle: return "IDLE";
    case Priority::Render: return "RENDER";
    case Priority::UserInteraction: return "USER_INTERACTION";
  }
  return "?";
}

// Monotonic millisecond time source.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now_ms() = 0;
};

class SteadyClock final : public Clock {
 public:
  double now_ms() override {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
  }
};

// Advanced by hand; for tests.
class VirtualClock final : public Clock {
 public:
  double now_ms() override { return now_; }
  void advance(double ms) {
    if (ms < 0) throw std::invalid_argument("virtual clock cannot go backwards");
    now_ += ms;
  }

 private:
  double now_ = 0;
};

using RootId = std::uint64_t;
using Producer = std::function<VNode()>;

struct FlushReport {
  std::vector<RootId> completed;
  bool yielded = false;
};

inline Json to_json(const FlushReport& r) { return Json{{"completed", r.completed}, {"yielded", r.yielded}}; }

inline constexpr double kDefaultBudgetMs = 5.0;

// Coalesces renders per root and runs them by priority between time checks.
// A started task (produce, diff, apply) always runs to completion; the budget
// is only consulted between tasks. Single-threaded; flush is not reentrant,
// schedule may be called from inside a task.
class Scheduler {
 public:
  struct Task {
    RootId root;
    Producer produce;
    Priority priority;
    std::uint64_t seq;
  };

  // The document must outlive the scheduler. `current` must be what the
  // document's root was realized from.
  RootId register_root(Document& doc, VNode current, DiffOptions options = {}) {
    const RootId id = next_root_++;
    roots_.emplace(id, Root{&doc, std::move(current), std::move(options), {}});
    return id;
  }

  // Replaces a pending task for the same root, keeping the higher priority.
  void schedule(RootId root, Producer produce, Priority priority) {
    if (!roots_.count(root)) throw UnknownRoot("unknown root " + std::to_string(root));
    const std::uint64_t seq = next_seq_++;
    auto it = pending_.find(root);
    if (it != pending_.end()) {
      const Task& old = it->second;
      order_.erase(order_key(old));
      priority = std::max(priority, old.priority);
      ++canceled_;
    }
    Task task{root, std::move(produce), priority, seq};
    order_.emplace(order_key(task), root);
    pending_[root] = std::move(task);
  }

  FlushReport flush(Clock& clock, double budget_ms = kDefaultBudgetMs) {
    if (flushing_) throw std::logic_error("Scheduler::flush is not reentrant");
    flushing_ = true;
    struct Reset {
      bool& flag;
      ~Reset() { flag = false; }
    } reset{flushing_};

    FlushReport report;
    const double start = clock.now_ms();
    while (!order_.empty()) {
      auto first = order_.begin();
      const RootId id = first->second;
      order_.erase(first);
      Task task = std::move(pending_.at(id));
      pending_.erase(id);
      run(task);
      report.completed.push_back(id);
      if (!order_.empty() && clock.now_ms() - start >= budget_ms) {
        report.yielded = true;
        break;
      }
    }
    return report;
  }

  std::size_t pending() const noexcept { return pending_.size(); }
  std::optional<Priority> pending_priority(RootId root) const {
    auto it = pending_.find(root);
    if (it == pending_.end()) return std::nullopt;
    return it->second.priority;
  }
  std::uint64_t canceled() const noexcept { return canceled_; }

  const VNode& current(RootId root) const { return roots_.at(root).current; }
  const DiffStats& stats(RootId root) const { return roots_.at(root).stats; }

 private:
  struct Root {
    Document* doc;
    VNode current;
    DiffOptions options;
    DiffStats stats;
  };

  using OrderKey = std::pair<int, std::uint64_t>;  // (-priority, seq)

  static OrderKey order_key(const Task& t) { return {-static_cast<int>(t.priority), t.seq}; }

  void run(Task& task) {
    Root& root = roots_.at(task.root);
    VNode next = task.produce();
    DiffResult result = diff(root.current, next, root.options);
    apply_patch(*root.doc, result.patch);
    root.stats += result.stats;
    root.current = std::move(next);
  }

  std::unordered_map<RootId, Root> roots_;
  std::unordered_map<RootId, Task> pending_;
  std::map<OrderKey, RootId> order_;
  RootId next_root_ = 1;
  std::uint64_t next_seq_ = 1;
  std::uint64_t canceled_ = 0;
  bool flushing_ = false;
};

}  // namespace vdomc
