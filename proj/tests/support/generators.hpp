#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "vdomc/vdomc.hpp"

namespace vdomc::testing {

// Seeded random VNode trees and related (old, new) pairs.
class TreeGen {
 public:
  explicit TreeGen(std::uint64_t seed) : rng_(seed) {}

  std::size_t max_depth = 5;
  std::size_t max_fanout = 8;
  bool allow_deltas = true;
  bool allow_statics = true;

  std::size_t uniform(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  template <class C>
  const auto& pick(const C& c) {
    return c[uniform(0, c.size() - 1)];
  }

  std::string word() {
    static const std::vector<std::string> words{"a", "b", "hello", "world", "x y", "", "<&>", "\"q\"", "ü", "42"};
    return pick(words);
  }

  PropValue prop_value(const std::string& name) {
    if (name == "onclick" || name == "oninput") return EventRef{uniform(0, 3)};
    if (name == "hidden") return chance(0.5);
    if (name == "n") return static_cast<double>(uniform(0, 4)) / 2.0;
    return word();
  }

  Props props() {
    static const std::vector<std::string> names{"id", "class", "title", "hidden", "n", "onclick", "oninput"};
    Props p;
    const std::size_t count = uniform(0, 3);
    for (std::size_t i = 0; i < count; ++i) {
      const std::string& name = pick(names);
      p.set(name, prop_value(name));
    }
    return p;
  }

  std::string tag() {
    static const std::vector<std::string> tags{"div", "span", "p", "li", "b", "ul"};
    return pick(tags);
  }

  VNode text() { return make_text(word()); }

  VNode element(std::size_t depth, std::optional<std::string> key = std::nullopt) {
    if (allow_statics && !key && chance(0.05)) return static_node(depth);
    ElementInit init;
    init.tag = tag();
    init.props = props();
    init.key = std::move(key);
    init.children = children(depth);
    // Forcing a positional diff would pair delta nodes with the wrong siblings.
    if (chance(0.1) && !any_delta(init.children)) init.flag = Flag::AnyChildren;
    return make_element(std::move(init));
  }

  VNode node(std::size_t depth) { return (depth == 0 || chance(0.3)) ? text() : element(depth); }

  // A shared constant, reused across calls so pairs can hit the identity skip.
  VNode static_node(std::size_t depth) {
    if (!statics_.empty() && chance(0.7)) return pick(statics_);
    const bool saved = allow_statics;
    allow_statics = false;
    ElementInit init = to_init(element(std::min<std::size_t>(depth, 2)));
    allow_statics = saved;
    init.flag = Flag::Static;
    init.hoist_id = statics_.size();
    init.key.reset();
    statics_.push_back(make_element(std::move(init)));
    return statics_.back();
  }

  std::vector<VNode> keyed_list(std::size_t depth, std::size_t n) {
    std::vector<std::string> keys;
    while (keys.size() < n) {
      std::string k = "k" + std::to_string(uniform(0, 15));
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(std::move(k));
    }
    std::vector<VNode> out;
    for (auto& k : keys) out.push_back(element(depth, k));
    return out;
  }

  std::vector<VNode> children(std::size_t depth) {
    if (depth == 0) return {};
    const std::size_t child_depth = depth - 1;
    const std::size_t n = uniform(0, max_fanout);
    std::vector<VNode> out;
    switch (uniform(0, 4)) {
      case 0: return {};
      case 1:
        for (std::size_t i = 0; i < std::min<std::size_t>(n, 3); ++i) out.push_back(text());
        return out;
      case 2: return keyed_list(child_depth, n);
      default:
        for (std::size_t i = 0; i < n; ++i) {
          if (chance(0.6)) {
            out.push_back(chance(0.5) ? text() : make_element(tag(), props()));
          } else {
            out.push_back(node(child_depth));
          }
        }
        return out;
    }
  }

  VNode tree() { return element(max_depth); }

  // A tree derived from `old` by random edits, sharing unchanged subtrees.
  VNode mutate(const VNode& old, std::size_t depth) {
    if (chance(0.05)) return node(depth);
    if (old.is_text()) {
      if (chance(0.5)) return old;
      return chance(0.8) ? text() : make_element(tag(), props());
    }
    if (old.flag() == Flag::Static) return chance(0.8) ? old : static_node(depth);
    if (chance(0.15)) return old;
    ElementInit init = to_init(old);
    init.delta.reset();
    init.elided = false;
    init.flag.reset();
    if (chance(0.08)) init.tag = tag();
    init.props = mutate_props(old.props());
    const std::size_t child_depth = depth == 0 ? 0 : depth - 1;
    std::vector<VNode> kids(old.children().begin(), old.children().end());
    if (allow_deltas && depth > 0 && chance(0.15) && delta_ready(kids)) {
      DeltaList ops = random_delta(kids, child_depth);
      init.children = std::move(kids);
      init.delta = std::move(ops);
      return make_element(std::move(init));
    }
    if (old.shape() == Flag::OnlyKeyedChildren && !kids.empty() && chance(0.8)) {
      init.children = mutate_keyed(kids, child_depth);
    } else if (chance(0.1)) {
      init.children = children(depth);
    } else {
      init.children = mutate_positional(kids, child_depth);
    }
    // Forcing a positional diff would pair delta nodes with the wrong siblings.
    if (chance(0.1) && !any_delta(init.children)) init.flag = Flag::AnyChildren;
    return make_element(std::move(init));
  }

  std::pair<VNode, VNode> pair() {
    VNode a = tree();
    VNode b = chance(0.1) ? tree() : mutate(a, max_depth);
    return {a, b};
  }

 private:
  Props mutate_props(const Props& old) {
    if (chance(0.4)) return old;
    std::vector<Props::Entry> entries(old.begin(), old.end());
    for (auto& e : entries) {
      if (chance(0.3)) e.second = prop_value(e.first);
    }
    if (!entries.empty() && chance(0.3)) entries.erase(entries.begin() + static_cast<std::ptrdiff_t>(uniform(0, entries.size() - 1)));
    if (entries.size() > 1 && chance(0.2)) std::shuffle(entries.begin(), entries.end(), rng_);
    Props out;
    for (auto& e : entries) out.set(e.first, e.second);
    if (chance(0.3)) {
      Props extra = props();
      for (const auto& [name, value] : extra) {
        if (!out.contains(name)) out.set(name, value);
      }
    }
    return out;
  }

  static bool delta_ready(const std::vector<VNode>& kids) {
    return std::all_of(kids.begin(), kids.end(), [](const VNode& c) { return c.is_element(); });
  }

  DeltaList random_delta(std::vector<VNode>& kids, std::size_t depth) {
    DeltaList ops;
    const std::size_t count = uniform(0, 4);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t kind = uniform(0, 2);
      if (kind == 0 || kids.empty()) {
        const std::size_t at = uniform(0, kids.size());
        VNode n = element(std::min<std::size_t>(depth, 2));
        kids.insert(kids.begin() + static_cast<std::ptrdiff_t>(at), n);
        ops.push_back(DeltaOp::insert(at, n));
      } else if (kind == 1) {
        const std::size_t at = uniform(0, kids.size() - 1);
        VNode n = element(std::min<std::size_t>(depth, 2));
        kids[at] = n;
        ops.push_back(DeltaOp::update(at, n));
      } else {
        const std::size_t at = uniform(0, kids.size() - 1);
        kids.erase(kids.begin() + static_cast<std::ptrdiff_t>(at));
        ops.push_back(DeltaOp::remove(at));
      }
    }
    return ops;
  }

  std::vector<VNode> mutate_keyed(const std::vector<VNode>& kids, std::size_t depth) {
    std::vector<VNode> out;
    for (const VNode& c : kids) {
      if (chance(0.15)) continue;
      if (chance(0.5)) {
        out.push_back(c);
      } else {
        VNode m = mutate(c, depth);
        if (m.is_element() && m.key() == c.key()) {
          out.push_back(m);
        } else {
          out.push_back(c);
        }
      }
    }
    if (chance(0.6)) std::shuffle(out.begin(), out.end(), rng_);
    const std::size_t adds = chance(0.5) ? uniform(0, 3) : 0;
    for (std::size_t i = 0; i < adds && out.size() < max_fanout + 2; ++i) {
      std::string k = "k" + std::to_string(uniform(0, 23));
      if (std::any_of(out.begin(), out.end(), [&](const VNode& c) { return *c.key() == k; })) continue;
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(uniform(0, out.size())), element(depth, k));
    }
    return out;
  }

  static bool any_delta(const std::vector<VNode>& kids) {
    return std::any_of(kids.begin(), kids.end(), [](const VNode& c) { return c.subtree_has_delta(); });
  }

  // A delta is relative to its own node's previous children, so once any
  // child carries one the positions must not shift.
  std::vector<VNode> mutate_positional(const std::vector<VNode>& kids, std::size_t depth) {
    std::vector<VNode> mutated;
    std::vector<bool> dropped;
    for (const VNode& c : kids) {
      mutated.push_back(mutate(c, depth));
      dropped.push_back(chance(0.1));
    }
    const bool pinned = any_delta(mutated);
    std::vector<VNode> out;
    for (std::size_t i = 0; i < mutated.size(); ++i) {
      if (!pinned && dropped[i]) continue;
      out.push_back(mutated[i]);
    }
    if (!pinned && chance(0.3)) out.insert(out.begin() + static_cast<std::ptrdiff_t>(uniform(0, out.size())), node(depth));
    // Keys must stay unique when every child is keyed.
    std::vector<std::string> seen;
    std::vector<VNode> unique;
    for (VNode& c : out) {
      if (c.is_element() && c.key()) {
        if (std::find(seen.begin(), seen.end(), *c.key()) != seen.end()) {
          if (pinned) return kids;
          continue;
        }
        seen.push_back(*c.key());
      }
      unique.push_back(std::move(c));
    }
    return unique;
  }

  std::mt19937_64 rng_;
  std::vector<VNode> statics_;
};

// Serialized DOM after realizing `old` and applying diff(old, new).
inline std::string patched(const VNode& old_tree, const VNode& new_tree, const DiffOptions& options = {},
                           DiffStats* stats = nullptr) {
  Document doc;
  mount(doc, old_tree);
  DiffResult r = diff(old_tree, new_tree, options);
  apply_patch(doc, r.patch);
  if (stats) *stats = r.stats;
  return serialize(doc);
}

inline std::string rendered(const VNode& v) {
  Document doc;
  mount(doc, v);
  return serialize(doc);
}

// Minimal number of single-element moves turning `from` into `to`, by
// breadth-first search over all arrangements. Exponential; n <= 7.
inline std::size_t brute_force_min_moves(const std::vector<int>& from, const std::vector<int>& to) {
  std::map<std::vector<int>, std::size_t> dist{{from, 0}};
  std::deque<std::vector<int>> queue{from};
  while (!queue.empty()) {
    std::vector<int> cur = queue.front();
    queue.pop_front();
    const std::size_t d = dist[cur];
    if (cur == to) return d;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      for (std::size_t j = 0; j < cur.size(); ++j) {
        if (i == j) continue;
        std::vector<int> next = cur;
        const int v = next[i];
        next.erase(next.begin() + static_cast<std::ptrdiff_t>(i));
        next.insert(next.begin() + static_cast<std::ptrdiff_t>(j), v);
        if (dist.emplace(next, d + 1).second) queue.push_back(std::move(next));
      }
    }
  }
  return SIZE_MAX;
}

// Minimal single-element move counts from 0..n-1 to every arrangement, by
// one breadth-first search.
inline std::map<std::vector<int>, std::size_t> min_move_table(int n) {
  std::vector<int> start(static_cast<std::size_t>(n));
  std::iota(start.begin(), start.end(), 0);
  std::map<std::vector<int>, std::size_t> dist{{start, 0}};
  std::deque<std::vector<int>> queue{start};
  while (!queue.empty()) {
    std::vector<int> cur = queue.front();
    queue.pop_front();
    const std::size_t d = dist[cur];
    for (std::size_t i = 0; i < cur.size(); ++i) {
      for (std::size_t j = 0; j < cur.size(); ++j) {
        if (i == j) continue;
        std::vector<int> next = cur;
        const int v = next[i];
        next.erase(next.begin() + static_cast<std::ptrdiff_t>(i));
        next.insert(next.begin() + static_cast<std::ptrdiff_t>(j), v);
        if (dist.emplace(next, d + 1).second) queue.push_back(std::move(next));
      }
    }
  }
  return dist;
}

inline std::size_t count_moves(const Patch& patch) {
  return static_cast<std::size_t>(
      std::count_if(patch.begin(), patch.end(), [](const PatchOp& p) { return std::holds_alternative<op::MoveChild>(p); }));
}

// Keyed list of <li> elements with the given integer keys.
inline VNode keyed_list(const std::vector<int>& keys, const std::string& tag = "ul") {
  std::vector<VNode> kids;
  for (int k : keys) {
    kids.push_back(make_element("li", {}, {make_text("item " + std::to_string(k))}, std::to_string(k)));
  }
  return make_element(tag, {}, std::move(kids));
}

// Random template source over a fixed state vocabulary, plus matching states.
class TemplateGen {
 public:
  explicit TemplateGen(std::uint64_t seed) : rng_(seed) {}

  std::size_t uniform(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

  std::string source() {
    std::string out;
    element(out, 4, {});
    return out;
  }

  // Each template reads: title, count, flag, other (scalars), items and
  // more (arrays of {id, text, n, on, sub:[{k, v}]}).
  Json state() {
    Json s = Json::object();
    s["title"] = pick_text();
    s["count"] = static_cast<int>(uniform(0, 9));
    s["flag"] = scalar_any();
    s["other"] = scalar_any();
    s["items"] = list("i");
    s["more"] = list("m");
    return s;
  }

 private:
  std::string pick_text() {
    static const std::vector<std::string> words{"alpha", "beta", "", "x<y", "gamma delta", "7"};
    return words[uniform(0, words.size() - 1)];
  }

  Json scalar_any() {
    switch (uniform(0, 5)) {
      case 0: return nullptr;
      case 1: return chance(0.5);
      case 2: return static_cast<int>(uniform(0, 2));
      case 3: return pick_text();
      case 4: return 1.5;
      default: return "z";
    }
  }

  Json list(const std::string& prefix) {
    Json arr = Json::array();
    const std::size_t n = uniform(0, 6);
    std::vector<std::size_t> ids;
    while (ids.size() < n) {
      std::size_t id = uniform(0, 12);
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
    for (std::size_t id : ids) {
      Json item{{"id", prefix + std::to_string(id)}, {"text", pick_text()}, {"n", static_cast<int>(uniform(0, 3))},
                {"on", chance(0.5)}};
      Json sub = Json::array();
      const std::size_t m = uniform(0, 3);
      for (std::size_t k = 0; k < m; ++k) sub.push_back(Json{{"k", "s" + std::to_string(k)}, {"v", pick_text()}});
      item["sub"] = std::move(sub);
      arr.push_back(std::move(item));
    }
    return arr;
  }

  struct Scope {
    std::vector<std::string> items;  // bound item names, innermost last
  };

  std::string tag() {
    static const std::vector<std::string> tags{"div", "span", "p", "section", "b", "i"};
    return tags[uniform(0, tags.size() - 1)];
  }

  std::string scalar_path(const Scope& scope) {
    if (!scope.items.empty() && chance(0.6)) {
      const std::string& item = scope.items[uniform(0, scope.items.size() - 1)];
      static const std::vector<std::string> fields{"text", "n", "on", "id", "v", "k", "missing"};
      return item + "." + fields[uniform(0, fields.size() - 1)];
    }
    static const std::vector<std::string> top{"title", "count", "flag", "other", "nothing.here"};
    return top[uniform(0, top.size() - 1)];
  }

  void attrs(std::string& out, const Scope& scope) {
    const std::size_t n = uniform(0, 2);
    static const std::vector<std::string> names{"id", "class", "title", "data-x"};
    std::vector<std::string> used;
    for (std::size_t i = 0; i < n; ++i) {
      std::string name = names[uniform(0, names.size() - 1)];
      if (std::find(used.begin(), used.end(), name) != used.end()) continue;
      used.push_back(name);
      if (chance(0.5)) {
        out += " " + name + "=\"lit" + std::to_string(uniform(0, 3)) + "\"";
      } else {
        out += " " + name + "={" + scalar_path(scope) + "}";
      }
    }
  }

  void element(std::string& out, std::size_t depth, const Scope& scope) {
    const std::string t = tag();
    out += "<" + t;
    attrs(out, scope);
    if (depth == 0 || chance(0.15)) {
      if (chance(0.5)) {
        out += " />";
        return;
      }
      out += ">";
      if (chance(0.5)) out += "leaf";
      out += "</" + t + ">";
      return;
    }
    out += ">";
    std::vector<std::string> lists;
    content(out, depth - 1, scope, lists);
    out += "</" + t + ">";
  }

  // `lists` holds the lists already looped over under the current element;
  // two loops over one list would give the element duplicate child keys.
  void content(std::string& out, std::size_t depth, const Scope& scope, std::vector<std::string>& lists) {
    const std::size_t n = uniform(0, 4);
    for (std::size_t i = 0; i < n; ++i) {
      switch (uniform(0, 6)) {
        case 0: out += "text" + std::to_string(uniform(0, 9)); break;
        case 1: out += "{" + scalar_path(scope) + "}"; break;
        case 2:
        case 3: element(out, depth, scope); break;
        case 4: each(out, depth, scope, lists); break;
        case 5: branch(out, depth, scope, lists); break;
        default: out += " "; break;
      }
    }
  }

  void each(std::string& out, std::size_t depth, const Scope& scope, std::vector<std::string>& lists) {
    const std::string item = "it" + std::to_string(scope.items.size());
    std::string list;
    std::string key;
    if (!scope.items.empty() && chance(0.5)) {
      list = scope.items.back() + ".sub";
      key = item + ".k";
    } else {
      list = chance(0.5) ? "items" : "more";
      key = item + ".id";
    }
    if (depth == 0 || scope.items.size() >= 2 || std::find(lists.begin(), lists.end(), list) != lists.end()) {
      out += "{" + scalar_path(scope) + "}";
      return;
    }
    lists.push_back(list);
    Scope inner = scope;
    inner.items.push_back(item);
    out += "{#each " + list + " as " + item + " key=" + key + "}";
    element(out, depth - 1, inner);
    out += "{/each}";
  }

  void branch(std::string& out, std::size_t depth, const Scope& scope, std::vector<std::string>& lists) {
    static const std::vector<std::string> conds{"flag", "other", "count", "title"};
    std::string cond = conds[uniform(0, conds.size() - 1)];
    if (!scope.items.empty() && chance(0.5)) cond = scope.items.back() + ".on";
    out += "{#if " + cond + "}";
    content(out, depth == 0 ? 0 : depth - 1, scope, lists);
    if (chance(0.5)) {
      out += "{:else}";
      content(out, depth == 0 ? 0 : depth - 1, scope, lists);
    }
    out += "{/if}";
  }

  std::mt19937_64 rng_;
};

}  // namespace vdomc::testing
