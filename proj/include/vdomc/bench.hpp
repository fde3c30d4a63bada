#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "vdomc/compiler.hpp"
#include "vdomc/diff.hpp"
#include "vdomc/dom.hpp"
#include "vdomc/runtime.hpp"
#include "vdomc/scheduler.hpp"
#include "vdomc/template.hpp"

namespace vdomc::bench {

enum class ImplKind : std::uint8_t { Engine, Naive, Dom };

inline constexpr std::array<ImplKind, 3> kAllImpls{ImplKind::Engine, ImplKind::Naive, ImplKind::Dom};

inline std::string_view to_string(ImplKind k) {
  switch (k) {
    case ImplKind::Engine: return "engine";
    case ImplKind::Naive: return "naive";
    case ImplKind::Dom: return "dom";
  }
  return "?";
}

inline std::optional<ImplKind> impl_from_string(std::string_view s) {
  for (ImplKind k : kAllImpls) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

// Case labels, in report order.
inline constexpr std::array<std::string_view, 9> kCaseNames{
    "Append 1,000 rows to a table of 10,000 rows",
    "Clear a table with 1,000 rows",
    "Create 10,000 rows",
    "Create 1,000 rows",
    "Update every 10th row for 1,000 rows",
    "Remove a random row from 1,000 rows",
    "Update 1000 rows",
    "Select a random row from 1,000 rows",
    "Swap 2 rows for table with 1,000 rows",
};

enum CaseId : std::size_t {
  kAppendRows,
  kClearRows,
  kCreateManyRows,
  kCreateRows,
  kUpdateEvery10th,
  kRemoveRow,
  kUpdateAllRows,
  kSelectRow,
  kSwapRows,
};

inline constexpr std::array<std::string_view, 25> kAdjectives{
    "pretty", "large", "big", "small", "tall", "short", "long", "handsome", "plain",
    "quaint", "clean", "elegant", "easy", "angry", "crazy", "helpful", "mushy", "odd",
    "unsightly", "adorable", "important", "inexpensive", "cheap", "expensive", "fancy"};
inline constexpr std::array<std::string_view, 11> kColors{
    "red", "yellow", "blue", "green", "pink", "brown", "purple", "brown", "white", "black", "orange"};
inline constexpr std::array<std::string_view, 13> kNouns{
    "table", "chair", "house", "bbq", "desk", "car", "pony", "cookie", "sandwich", "burger", "pizza", "mouse",
    "keyboard"};

// Seeded word-triple labels and indices. Modulo reduction keeps the stream
// identical on every standard library.
class Words {
 public:
  explicit Words(std::seed_seq& seq) : rng_(seq) {}
  explicit Words(std::uint64_t seed) : rng_(seed) {}

  std::string label() {
    std::string out(kAdjectives[rng_() % kAdjectives.size()]);
    out += ' ';
    out += kColors[rng_() % kColors.size()];
    out += ' ';
    out += kNouns[rng_() % kNouns.size()];
    return out;
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

 private:
  std::mt19937_64 rng_;
};

struct Row {
  std::uint64_t id;
  std::string label;
};

namespace action {
struct Append {
  std::vector<Row> rows;
};
struct Clear {};
struct UpdateEvery {
  std::size_t step;
  std::string suffix;
};
struct Relabel {
  std::vector<std::string> labels;
};
struct Remove {
  std::size_t index;
};
struct Select {
  std::size_t index;
};
struct Swap {
  std::size_t a;
  std::size_t b;
};
}  // namespace action

using Action = std::variant<action::Append, action::Clear, action::UpdateEvery, action::Relabel, action::Remove,
                            action::Select, action::Swap>;

struct Workload {
  std::vector<Action> setup;  // untimed
  Action action;              // timed
};

inline constexpr std::size_t kMinRows = 4;

inline Workload make_workload(std::size_t case_id, std::size_t rows, std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(case_id)};
  Words words(seq);
  std::uint64_t next_id = 1;
  auto make_rows = [&](std::size_t n) {
    action::Append a;
    a.rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) a.rows.push_back({next_id++, words.label()});
    return a;
  };
  Workload w{{}, action::Clear{}};
  switch (case_id) {
    case kAppendRows:
      w.setup.push_back(make_rows(rows * 10));
      w.action = make_rows(rows);
      break;
    case kClearRows:
      w.setup.push_back(make_rows(rows));
      w.action = action::Clear{};
      break;
    case kCreateManyRows: w.action = make_rows(rows * 10); break;
    case kCreateRows: w.action = make_rows(rows); break;
    case kUpdateEvery10th:
      w.setup.push_back(make_rows(rows));
      w.action = action::UpdateEvery{10, " !!!"};
      break;
    case kRemoveRow:
      w.setup.push_back(make_rows(rows));
      w.action = action::Remove{words.index(rows)};
      break;
    case kUpdateAllRows: {
      w.setup.push_back(make_rows(rows));
      action::Relabel r;
      for (std::size_t i = 0; i < rows; ++i) r.labels.push_back(words.label());
      w.action = std::move(r);
      break;
    }
    case kSelectRow: {
      w.setup.push_back(make_rows(rows));
      const std::size_t first = words.index(rows);
      std::size_t second = words.index(rows - 1);
      if (second >= first) ++second;
      w.setup.push_back(action::Select{first});
      w.action = action::Select{second};
      break;
    }
    case kSwapRows:
      w.setup.push_back(make_rows(rows));
      w.action = action::Swap{1, rows - 2};
      break;
  }
  return w;
}

inline constexpr std::string_view kRowsTemplate =
    "<table class=\"table table-hover table-striped test-data\"><tbody>"
    "{#each rows as row key=row.id}"
    "<tr class={row.cls}>"
    "<td class=\"col-md-1\">{row.id}</td>"
    "<td class=\"col-md-4\"><a>{row.label}</a></td>"
    "<td class=\"col-md-1\"><a><span class=\"glyphicon glyphicon-remove\" aria-hidden=\"true\"></span></a></td>"
    "<td class=\"col-md-6\"></td>"
    "</tr>"
    "{/each}"
    "</tbody></table>";

// One benchmark implementation: owns a document and applies actions to it.
class Impl {
 public:
  virtual ~Impl() = default;
  virtual void perform(const Action& a) = 0;
  virtual const Document& document() const = 0;
  virtual DiffStats diff_stats() const { return {}; }
};

namespace detail {

inline Json row_json(const Row& r) { return Json{{"id", r.id}, {"label", r.label}, {"cls", ""}}; }

// Applies an action to the {"rows": [...]} state shared by the template impls.
inline void apply_action(Json& state, std::optional<std::uint64_t>& selected, const Action& a) {
  Json& rows = state["rows"];
  std::visit(
      [&](const auto& act) {
        using T = std::decay_t<decltype(act)>;
        if constexpr (std::is_same_v<T, action::Append>) {
          for (const Row& r : act.rows) rows.push_back(row_json(r));
        } else if constexpr (std::is_same_v<T, action::Clear>) {
          rows = Json::array();
          selected.reset();
        } else if constexpr (std::is_same_v<T, action::UpdateEvery>) {
          for (std::size_t i = 0; i < rows.size(); i += act.step) {
            rows[i]["label"] = rows[i]["label"].template get<std::string>() + act.suffix;
          }
        } else if constexpr (std::is_same_v<T, action::Relabel>) {
          for (std::size_t i = 0; i < rows.size(); ++i) rows[i]["label"] = act.labels[i];
        } else if constexpr (std::is_same_v<T, action::Remove>) {
          if (selected && rows[act.index]["id"].template get<std::uint64_t>() == *selected) selected.reset();
          rows.erase(act.index);
        } else if constexpr (std::is_same_v<T, action::Select>) {
          if (selected) {
            for (Json& r : rows) {
              if (r["id"].template get<std::uint64_t>() == *selected) {
                r["cls"] = "";
                break;
              }
            }
          }
          rows[act.index]["cls"] = "danger";
          selected = rows[act.index]["id"].template get<std::uint64_t>();
        } else {
          std::swap(rows[act.a], rows[act.b]);
        }
      },
      a);
}

inline Json empty_state() { return Json{{"rows", Json::array()}}; }

}  // namespace detail

// Compiled template, hoisting, flags and keyed diff; every action is one
// scheduled render followed by one flush.
class EngineImpl final : public Impl {
 public:
  explicit EngineImpl(std::shared_ptr<const CompiledModule> module)
      : renderer_(std::move(module)), state_(detail::empty_state()) {
    VNode first = renderer_.render(state_);
    mount(doc_, first);
    root_ = scheduler_.register_root(doc_, first);
  }

  void perform(const Action& a) override {
    detail::apply_action(state_, selected_, a);
    scheduler_.schedule(root_, [this] { return renderer_.render(state_); }, Priority::Render);
    scheduler_.flush(clock_);
  }

  const Document& document() const override { return doc_; }
  DiffStats diff_stats() const override { return scheduler_.stats(root_); }

 private:
  Renderer renderer_;
  Json state_;
  std::optional<std::uint64_t> selected_;
  Document doc_;
  Scheduler scheduler_;
  SteadyClock clock_;
  RootId root_ = 0;
};

// Unhoisted module, full re-render and a diff with every fast path off.
class NaiveImpl final : public Impl {
 public:
  explicit NaiveImpl(std::shared_ptr<const CompiledModule> module)
      : module_(std::move(module)), state_(detail::empty_state()), current_(instantiate(*module_, state_)) {
    mount(doc_, current_);
    options_.fast_paths = false;
  }

  void perform(const Action& a) override {
    detail::apply_action(state_, selected_, a);
    VNode next = instantiate(*module_, state_);
    DiffResult r = diff(current_, next, options_);
    apply_patch(doc_, r.patch);
    stats_ += r.stats;
    current_ = std::move(next);
  }

  const Document& document() const override { return doc_; }
  DiffStats diff_stats() const override { return stats_; }

 private:
  std::shared_ptr<const CompiledModule> module_;
  Json state_;
  std::optional<std::uint64_t> selected_;
  VNode current_;
  Document doc_;
  DiffOptions options_;
  DiffStats stats_;
};

// Handwritten minimal-mutation oracle: touches exactly the nodes an action
// changes, with no virtual tree.
class DomImpl final : public Impl {
 public:
  DomImpl() {
    auto table = doc_.create_element("table");
    doc_.set_attribute(*table, "class", std::string("table table-hover table-striped test-data"));
    auto tbody = doc_.create_element("tbody");
    tbody_ = tbody.get();
    doc_.insert_before(*table, 0, std::move(tbody));
    doc_.mount(std::move(table));
  }

  void perform(const Action& a) override {
    std::visit(
        [&](const auto& act) {
          using T = std::decay_t<decltype(act)>;
          if constexpr (std::is_same_v<T, action::Append>) {
            for (const Row& r : act.rows) {
              rows_.push_back(r);
              doc_.insert_before(*tbody_, tbody_->child_count(), make_row(r));
            }
          } else if constexpr (std::is_same_v<T, action::Clear>) {
            for (std::size_t i = tbody_->child_count(); i-- > 0;) doc_.remove_child(*tbody_, i);
            rows_.clear();
            selected_.reset();
          } else if constexpr (std::is_same_v<T, action::UpdateEvery>) {
            for (std::size_t i = 0; i < rows_.size(); i += act.step) {
              rows_[i].label += act.suffix;
              doc_.set_text(label_cell(i), rows_[i].label);
            }
          } else if constexpr (std::is_same_v<T, action::Relabel>) {
            for (std::size_t i = 0; i < rows_.size(); ++i) {
              if (rows_[i].label == act.labels[i]) continue;
              rows_[i].label = act.labels[i];
              doc_.set_text(label_cell(i), rows_[i].label);
            }
          } else if constexpr (std::is_same_v<T, action::Remove>) {
            if (selected_ == rows_[act.index].id) selected_.reset();
            rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(act.index));
            doc_.remove_child(*tbody_, act.index);
          } else if constexpr (std::is_same_v<T, action::Select>) {
            if (selected_) {
              for (std::size_t i = 0; i < rows_.size(); ++i) {
                if (rows_[i].id == *selected_) {
                  doc_.set_attribute(tbody_->child(i), "class", std::string());
                  break;
                }
              }
            }
            doc_.set_attribute(tbody_->child(act.index), "class", std::string("danger"));
            selected_ = rows_[act.index].id;
          } else {
            const std::size_t lo = std::min(act.a, act.b);
            const std::size_t hi = std::max(act.a, act.b);
            if (lo == hi) return;
            std::swap(rows_[lo], rows_[hi]);
            doc_.move_child(*tbody_, hi, lo);
            doc_.move_child(*tbody_, lo + 1, hi);
          }
        },
        a);
  }

  const Document& document() const override { return doc_; }

 private:
  std::unique_ptr<DomNode> cell(std::string_view cls) {
    auto td = doc_.create_element("td");
    doc_.set_attribute(*td, "class", std::string(cls));
    return td;
  }

  std::unique_ptr<DomNode> make_row(const Row& r) {
    auto tr = doc_.create_element("tr");
    doc_.set_attribute(*tr, "class", std::string());
    auto id = cell("col-md-1");
    doc_.set_text(*id, std::to_string(r.id));
    doc_.insert_before(*tr, 0, std::move(id));
    auto label = cell("col-md-4");
    auto a = doc_.create_element("a");
    doc_.set_text(*a, r.label);
    doc_.insert_before(*label, 0, std::move(a));
    doc_.insert_before(*tr, 1, std::move(label));
    auto remove = cell("col-md-1");
    auto link = doc_.create_element("a");
    auto icon = doc_.create_element("span");
    doc_.set_attribute(*icon, "class", std::string("glyphicon glyphicon-remove"));
    doc_.set_attribute(*icon, "aria-hidden", std::string("true"));
    doc_.insert_before(*link, 0, std::move(icon));
    doc_.insert_before(*remove, 0, std::move(link));
    doc_.insert_before(*tr, 2, std::move(remove));
    doc_.insert_before(*tr, 3, cell("col-md-6"));
    return tr;
  }

  DomNode& label_cell(std::size_t row) { return tbody_->child(row).child(1).child(0); }

  Document doc_;
  DomNode* tbody_ = nullptr;
  std::vector<Row> rows_;
  std::optional<std::uint64_t> selected_;
};

// Hoisted and unhoisted builds of the rows template, shared by all samples.
struct RowModules {
  std::shared_ptr<const CompiledModule> hoisted;
  std::shared_ptr<const CompiledModule> plain;

  static RowModules build() {
    return {std::make_shared<const CompiledModule>(compile_source(kRowsTemplate)),
            std::make_shared<const CompiledModule>(compile_source(kRowsTemplate, CompileOptions{false}))};
  }
};

inline std::unique_ptr<Impl> make_impl(ImplKind kind, const RowModules& modules) {
  switch (kind) {
    case ImplKind::Engine: return std::make_unique<EngineImpl>(modules.hoisted);
    case ImplKind::Naive: return std::make_unique<NaiveImpl>(modules.plain);
    case ImplKind::Dom: return std::make_unique<DomImpl>();
  }
  return nullptr;
}

struct Protocol {
  std::size_t warmup = 1;
  std::size_t samples = 5;
};

struct BenchResult {
  std::string name;
  ImplKind impl = ImplKind::Engine;
  std::size_t rows = 0;
  DomCounters dom_ops;   // of the timed action
  DiffStats diff_stats;  // of the timed action
  std::string dom_hash;  // FNV-1a of the serialized final DOM
  std::vector<double> samples_ms;
  double mean_ms = 0;
  double ops_per_sec = 0;
  double rel_stdev_pct = 0;
};

struct SampleStats {
  double mean = 0;
  double rel_stdev_pct = 0;
};

// Sample mean and relative (n-1) standard deviation in percent.
inline SampleStats sample_stats(const std::vector<double>& xs) {
  SampleStats s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2 || s.mean == 0) return s;
  double var = 0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  var /= static_cast<double>(xs.size() - 1);
  s.rel_stdev_pct = 100.0 * std::sqrt(var) / s.mean;
  return s;
}

inline double geometric_mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0;
  double log_sum = 0;
  for (double x : xs) log_sum += std::log(x);
  return std::exp(log_sum / static_cast<double>(xs.size()));
}

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// Runs one case on one impl: warm-up runs, then timed samples, each on a fresh
// impl with an untimed setup.
inline BenchResult run_case(std::size_t case_id, ImplKind kind, std::size_t rows, std::uint64_t seed,
                            const RowModules& modules, Protocol protocol = {}) {
  if (rows < kMinRows) throw std::invalid_argument("benchmark needs at least " + std::to_string(kMinRows) + " rows");
  const Workload w = make_workload(case_id, rows, seed);
  BenchResult result;
  result.name = std::string(kCaseNames.at(case_id));
  result.impl = kind;
  result.rows = rows;
  std::vector<double> ops;
  for (std::size_t run = 0; run < protocol.warmup + protocol.samples; ++run) {
    auto impl = make_impl(kind, modules);
    for (const Action& a : w.setup) impl->perform(a);
    const DomCounters before = impl->document().counters();
    const DiffStats stats_before = impl->diff_stats();
    const auto start = std::chrono::steady_clock::now();
    impl->perform(w.action);
    const double ms = elapsed_ms(start);
    if (run < protocol.warmup) continue;
    result.samples_ms.push_back(ms);
    ops.push_back(1000.0 / std::max(ms, 1e-6));
    if (run + 1 == protocol.warmup + protocol.samples) {
      result.dom_ops = impl->document().counters() - before;
      result.diff_stats = impl->diff_stats() - stats_before;
      result.dom_hash = source_hash(serialize(impl->document()));
    }
  }
  result.mean_ms = sample_stats(result.samples_ms).mean;
  const SampleStats s = sample_stats(ops);
  result.ops_per_sec = s.mean;
  result.rel_stdev_pct = s.rel_stdev_pct;
  return result;
}

struct JsfbReport {
  std::uint64_t seed = 0;
  std::size_t rows = 0;
  Protocol protocol;
  std::vector<ImplKind> impls;
  std::vector<BenchResult> results;

  double geomean_ops(ImplKind k) const {
    std::vector<double> xs;
    for (const BenchResult& r : results) {
      if (r.impl == k) xs.push_back(r.ops_per_sec);
    }
    return geometric_mean(xs);
  }

  double geomean_dom_ops(ImplKind k) const {
    std::vector<double> xs;
    for (const BenchResult& r : results) {
      if (r.impl == k) xs.push_back(static_cast<double>(std::max<std::uint64_t>(r.dom_ops.total(), 1)));
    }
    return geometric_mean(xs);
  }

  const BenchResult* find(std::size_t case_id, ImplKind k) const {
    for (const BenchResult& r : results) {
      if (r.impl == k && r.name == kCaseNames.at(case_id)) return &r;
    }
    return nullptr;
  }
};

inline JsfbReport run_jsfb_suite(std::size_t rows, const std::vector<ImplKind>& impls, std::uint64_t seed,
                                 Protocol protocol = {}) {
  const RowModules modules = RowModules::build();
  JsfbReport report;
  report.seed = seed;
  report.rows = rows;
  report.protocol = protocol;
  report.impls = impls;
  for (std::size_t c = 0; c < kCaseNames.size(); ++c) {
    for (ImplKind k : impls) report.results.push_back(run_case(c, k, rows, seed, modules, protocol));
  }
  return report;
}

// Timing fields are included only on request so that seeded reports are
// byte-reproducible.
inline Json to_json(const BenchResult& r, bool timing) {
  Json j{{"name", r.name},
         {"impl", std::string(to_string(r.impl))},
         {"rows", r.rows},
         {"dom_ops", vdomc::to_json(r.dom_ops)},
         {"diff_stats", vdomc::to_json(r.diff_stats)},
         {"dom_hash", r.dom_hash}};
  if (timing) {
    j["ops_per_sec"] = r.ops_per_sec;
    j["rel_stdev_pct"] = r.rel_stdev_pct;
    j["mean_ms"] = r.mean_ms;
  }
  return j;
}

inline Json to_json(const JsfbReport& report, bool timing) {
  Json results = Json::array();
  for (const BenchResult& r : report.results) results.push_back(to_json(r, timing));
  Json geomean = Json::object();
  for (ImplKind k : report.impls) {
    Json g{{"dom_ops", report.geomean_dom_ops(k)}};
    if (timing) g["ops_per_sec"] = report.geomean_ops(k);
    geomean[std::string(to_string(k))] = std::move(g);
  }
  return Json{{"suite", "jsfb"},
              {"seed", report.seed},
              {"rows", report.rows},
              {"protocol", {{"warmup", report.protocol.warmup}, {"samples", report.protocol.samples}}},
              {"results", std::move(results)},
              {"geomean", std::move(geomean)}};
}

// ---------------------------------------------------------------------------
// Append scaling suite: one node appended and rendered per step.

enum class AppendMode : std::uint8_t { Dom, Delta, Keyed, Vdom };

inline constexpr std::array<AppendMode, 4> kAllAppendModes{AppendMode::Dom, AppendMode::Delta, AppendMode::Keyed,
                                                           AppendMode::Vdom};
inline constexpr std::array<std::size_t, 4> kAppendSweep{500, 1000, 2000, 4000};
inline constexpr std::size_t kAppendHeadline = 5000;

inline std::string_view to_string(AppendMode m) {
  switch (m) {
    case AppendMode::Dom: return "dom";
    case AppendMode::Delta: return "delta";
    case AppendMode::Keyed: return "keyed";
    case AppendMode::Vdom: return "vdom";
  }
  return "?";
}

inline std::optional<AppendMode> append_mode_from_string(std::string_view s) {
  for (AppendMode m : kAllAppendModes) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

inline constexpr std::string_view kListTemplate = "<ul>{#each items as item key=item.id}<li>{item.text}</li>{/each}</ul>";

struct AppendRun {
  std::size_t n = 0;
  std::uint64_t visits = 0;
  double total_ms = 0;
  DomCounters dom_ops;
  std::string dom_hash;
};

inline AppendRun run_append(AppendMode mode, std::size_t n, std::uint64_t seed) {
  Words words(seed);
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back(words.label());
  auto item = [&](std::size_t i) { return Json{{"id", i + 1}, {"text", labels[i]}}; };

  AppendRun run;
  run.n = n;
  Document doc;
  const auto start = std::chrono::steady_clock::now();
  switch (mode) {
    case AppendMode::Dom: {
      auto ul = doc.create_element("ul");
      DomNode* list = ul.get();
      doc.mount(std::move(ul));
      for (std::size_t i = 0; i < n; ++i) {
        auto li = doc.create_element("li");
        doc.set_text(*li, labels[i]);
        doc.insert_before(*list, i, std::move(li));
      }
      break;
    }
    case AppendMode::Delta: {
      auto module = std::make_shared<const CompiledModule>(compile_source(kListTemplate));
      ReactiveList list(module, StatePath::parse("items"));
      ElementInit init;
      init.tag = "ul";
      init.flag = Flag::OnlyKeyedChildren;
      VNode current = make_element(std::move(init));
      mount(doc, current);
      for (std::size_t i = 0; i < n; ++i) {
        list.push_back(item(i));
        VNode next = list.snapshot("ul");
        DiffResult r = diff(current, next);
        apply_patch(doc, r.patch);
        run.visits += r.stats.nodes_visited;
        current = std::move(next);
      }
      break;
    }
    case AppendMode::Keyed:
    case AppendMode::Vdom: {
      const bool fast = mode == AppendMode::Keyed;
      const CompiledModule module = compile_source(kListTemplate, CompileOptions{fast});
      DiffOptions options;
      options.fast_paths = fast;
      Json state{{"items", Json::array()}};
      VNode current = instantiate(module, state);
      mount(doc, current);
      for (std::size_t i = 0; i < n; ++i) {
        state["items"].push_back(item(i));
        VNode next = instantiate(module, state);
        DiffResult r = diff(current, next, options);
        apply_patch(doc, r.patch);
        run.visits += r.stats.nodes_visited;
        current = std::move(next);
      }
      break;
    }
  }
  run.total_ms = elapsed_ms(start);
  run.dom_ops = doc.counters();
  run.dom_hash = source_hash(serialize(doc));
  return run;
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n < 2 || ys.size() != n) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxy += dx * (std::log(ys[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

struct AppendModeReport {
  AppendMode mode = AppendMode::Dom;
  std::vector<AppendRun> sweep;
  AppendRun headline;
  double visit_slope = 0;  // NaN when the mode does no diffing
};

struct AppendReport {
  std::uint64_t seed = 0;
  std::size_t nodes = 0;
  std::vector<AppendModeReport> modes;

  const AppendModeReport* find(AppendMode m) const {
    for (const AppendModeReport& r : modes) {
      if (r.mode == m) return &r;
    }
    return nullptr;
  }
};

inline AppendReport run_append_suite(std::size_t n_nodes, const std::vector<AppendMode>& modes, std::uint64_t seed) {
  AppendReport report;
  report.seed = seed;
  report.nodes = n_nodes;
  for (AppendMode m : modes) {
    AppendModeReport mr;
    mr.mode = m;
    std::vector<double> xs, ys;
    for (std::size_t n : kAppendSweep) {
      mr.sweep.push_back(run_append(m, n, seed));
      xs.push_back(static_cast<double>(n));
      ys.push_back(static_cast<double>(mr.sweep.back().visits));
    }
    mr.visit_slope = m == AppendMode::Dom ? std::numeric_limits<double>::quiet_NaN() : loglog_slope(xs, ys);
    mr.headline = run_append(m, n_nodes, seed);
    report.modes.push_back(std::move(mr));
  }
  return report;
}

inline Json to_json(const AppendRun& r, bool timing) {
  Json j{{"n", r.n}, {"visits", r.visits}, {"dom_ops", vdomc::to_json(r.dom_ops)}, {"dom_hash", r.dom_hash}};
  if (timing) j["total_ms"] = r.total_ms;
  return j;
}

inline Json to_json(const AppendReport& report, bool timing) {
  Json modes = Json::array();
  for (const AppendModeReport& m : report.modes) {
    Json sweep = Json::array();
    for (const AppendRun& r : m.sweep) sweep.push_back(to_json(r, timing));
    Json jm{{"mode", std::string(to_string(m.mode))},
            {"sweep", std::move(sweep)},
            {"headline", to_json(m.headline, timing)}};
    jm["visit_slope"] = std::isnan(m.visit_slope) ? Json(nullptr) : Json(m.visit_slope);
    modes.push_back(std::move(jm));
  }
  Json summary = Json::object();
  const AppendModeReport* vdom = report.find(AppendMode::Vdom);
  const AppendModeReport* delta = report.find(AppendMode::Delta);
  if (vdom && delta) {
    summary["vdom_over_delta_visits"] =
        static_cast<double>(vdom->headline.visits) / static_cast<double>(std::max<std::uint64_t>(delta->headline.visits, 1));
    if (timing) summary["vdom_over_delta_time"] = vdom->headline.total_ms / std::max(delta->headline.total_ms, 1e-9);
  }
  return Json{{"suite", "append"},
              {"seed", report.seed},
              {"nodes", report.nodes},
              {"sweep", kAppendSweep},
              {"results", std::move(modes)},
              {"summary", std::move(summary)}};
}

}  // namespace vdomc::bench
