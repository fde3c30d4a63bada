#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "support/generators.hpp"
#include "vdomc/vdomc.hpp"

namespace vdomc::testing {

// Calls a probe before reporting virtual time. The scheduler reads the clock
// only between tasks, so the probe sees every inter-task state.
class ProbeClock final : public Clock {
 public:
  std::function<void()> probe;
  double now_ms() override {
    if (probe) probe();
    return clock.now_ms();
  }
  VirtualClock clock;
};

struct SchedStep {
  enum class Kind : std::uint8_t { Schedule, Flush } kind = Kind::Schedule;
  std::size_t root = 0;
  Priority priority = Priority::Render;
};

inline int rank(Priority p) { return static_cast<int>(p); }

// Drives a Scheduler through a script and checks it against a reference
// model of the pending queue. run() returns an empty string on success,
// otherwise a description of the first violation.
class SchedulerHarness {
 public:
  SchedulerHarness(std::size_t roots, double task_ms, double budget_ms, std::uint64_t seed = 0)
      : task_ms_(task_ms), budget_ms_(budget_ms), rng_(seed) {
    for (std::size_t r = 0; r < roots; ++r) {
      docs_.push_back(std::make_unique<Document>());
      VNode initial = view(r, 0);
      mount(*docs_.back(), initial);
      ids_.push_back(scheduler_.register_root(*docs_.back(), initial));
      last_state_.push_back(0);
      log_sizes_.push_back(docs_.back()->log().size());
    }
    clock_.probe = [this] { probe(); };
  }

  // Probability that a running task schedules another root from inside.
  double nested_schedule_p = 0.0;

  static VNode view(std::size_t root, std::uint64_t state) {
    std::vector<int> keys;
    for (int k = 0; k < 5; ++k) keys.push_back(static_cast<int>((state * 7 + static_cast<std::uint64_t>(k) * 3) % 11));
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    if (state % 2) std::reverse(keys.begin(), keys.end());
    std::vector<VNode> kids;
    for (int k : keys) {
      kids.push_back(make_element("li", {{"s", static_cast<double>(state)}}, {make_text(std::to_string(k))},
                                  std::to_string(k)));
    }
    return make_element("div", {{"root", static_cast<double>(root)}},
                        {make_element("p", {}, {make_text("state " + std::to_string(state))}),
                         make_element("ul", {}, std::move(kids))});
  }

  std::string run(const std::vector<SchedStep>& steps) {
    for (const SchedStep& s : steps) {
      if (s.kind == SchedStep::Kind::Schedule) {
        schedule(s.root, s.priority);
      } else {
        flush();
      }
      if (!error_.empty()) return error_;
    }
    for (int guard = 0; !model_.empty() && error_.empty(); ++guard) {
      if (guard > 10000) return "queue never drained";
      flush();
    }
    if (!error_.empty()) return error_;
    if (scheduler_.pending() != 0) return "scheduler still has pending tasks";
    for (std::size_t r = 0; r < docs_.size(); ++r) {
      if (serialize(*docs_[r]) != rendered(view(r, last_state_[r]))) {
        return "root " + std::to_string(r) + " does not show its last submitted state";
      }
    }
    return {};
  }

  std::size_t produced() const { return produced_; }

 private:
  struct Pending {
    int priority;
    std::uint64_t seq;
    std::uint64_t state;
  };

  void fail(std::string what) {
    if (error_.empty()) error_ = std::move(what);
  }

  void schedule(std::size_t root, Priority priority) {
    const std::uint64_t state = ++next_state_;
    const std::uint64_t seq = ++next_seq_;
    auto it = model_.find(root);
    int p = rank(priority);
    if (it != model_.end()) p = std::max(p, it->second.priority);
    model_[root] = Pending{p, seq, state};
    scheduler_.schedule(ids_[root], [this, root, state] { return produce(root, state); }, priority);
    last_state_[root] = state;
    if (scheduler_.pending() != model_.size()) fail("pending count differs from the model after schedule");
    auto sp = scheduler_.pending_priority(ids_[root]);
    if (!sp || rank(*sp) != p) fail("pending priority is not the max of coalesced schedules");
  }

  VNode produce(std::size_t root, std::uint64_t state) {
    ++produced_;
    auto it = model_.find(root);
    if (it == model_.end()) {
      fail("task ran for a root with nothing pending");
      return view(root, state);
    }
    for (const auto& [other, p] : model_) {
      if (p.priority > it->second.priority ||
          (p.priority == it->second.priority && p.seq < it->second.seq)) {
        fail("task for root " + std::to_string(root) + " ran before a task that orders first");
      }
    }
    if (it->second.state != state) fail("task did not use the last submitted state");
    model_.erase(it);
    executed_.push_back(root);
    in_task_ = true;
    clock_.clock.advance(task_ms_);
    if (nested_schedule_p > 0 && std::bernoulli_distribution(nested_schedule_p)(rng_)) {
      const std::size_t other = std::uniform_int_distribution<std::size_t>(0, docs_.size() - 1)(rng_);
      schedule(other, static_cast<Priority>(std::uniform_int_distribution<int>(0, 2)(rng_)));
    }
    in_task_ = false;
    return view(root, state);
  }

  void probe() {
    if (in_task_) fail("clock read inside a task");
    std::size_t changed = 0;
    for (std::size_t r = 0; r < docs_.size(); ++r) {
      const std::size_t n = docs_[r]->log().size();
      if (n != log_sizes_[r]) ++changed;
      log_sizes_[r] = n;
      if (serialize(*docs_[r]) != rendered(scheduler_.current(ids_[r]))) {
        fail("root " + std::to_string(r) + " shows a partially applied task");
      }
    }
    if (changed > 1) fail("ops of two tasks between consecutive time checks");
  }

  void flush() {
    const bool had_work = !model_.empty();
    executed_.clear();
    const double start = clock_.clock.now_ms();
    FlushReport report = scheduler_.flush(clock_, budget_ms_);
    std::vector<RootId> expected;
    for (std::size_t r : executed_) expected.push_back(ids_[r]);
    if (report.completed != expected) fail("report does not list completed roots in execution order");
    if (had_work && report.completed.empty()) fail("flush with pending work completed nothing");
    if (report.yielded != !model_.empty()) fail("yielded flag does not match remaining work");
    if (report.yielded && clock_.clock.now_ms() - start < budget_ms_) fail("yielded before the budget was spent");
    if (!report.yielded && !report.completed.empty() && report.completed.size() > 1) {
      // Every task but the last must have finished inside the budget.
      const double before_last = static_cast<double>(report.completed.size() - 1) * task_ms_;
      if (before_last >= budget_ms_ && task_ms_ > 0) fail("ran past the budget");
    }
  }

  double task_ms_;
  double budget_ms_;
  std::mt19937_64 rng_;
  Scheduler scheduler_;
  ProbeClock clock_;
  std::vector<std::unique_ptr<Document>> docs_;
  std::vector<RootId> ids_;
  std::vector<std::uint64_t> last_state_;
  std::vector<std::size_t> log_sizes_;
  std::map<std::size_t, Pending> model_;
  std::vector<std::size_t> executed_;
  std::uint64_t next_state_ = 0;
  std::uint64_t next_seq_ = 0;
  std::size_t produced_ = 0;
  bool in_task_ = false;
  std::string error_;
};

// Every schedule script of `n` tasks over the given roots and priorities,
// followed by one flush, in lexicographic order.
template <class F>
void for_each_script(std::size_t n, std::size_t roots, const std::vector<Priority>& priorities, F&& f) {
  const std::size_t alphabet = roots * priorities.size();
  std::vector<std::size_t> digits(n, 0);
  for (;;) {
    std::vector<SchedStep> steps;
    for (std::size_t d : digits) {
      steps.push_back({SchedStep::Kind::Schedule, d / priorities.size(), priorities[d % priorities.size()]});
    }
    steps.push_back({SchedStep::Kind::Flush, 0, Priority::Render});
    f(steps);
    std::size_t i = 0;
    while (i < n && ++digits[i] == alphabet) digits[i++] = 0;
    if (i == n) return;
  }
}

inline std::vector<SchedStep> random_script(std::mt19937_64& rng, std::size_t roots, std::size_t max_steps) {
  std::vector<SchedStep> steps;
  const std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_steps)(rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::bernoulli_distribution(0.2)(rng)) {
      steps.push_back({SchedStep::Kind::Flush, 0, Priority::Render});
    } else {
      steps.push_back({SchedStep::Kind::Schedule, std::uniform_int_distribution<std::size_t>(0, roots - 1)(rng),
                       static_cast<Priority>(std::uniform_int_distribution<int>(0, 2)(rng))});
    }
  }
  return steps;
}

}  // namespace vdomc::testing
