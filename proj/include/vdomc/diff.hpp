#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vdomc/patch.hpp"
#include "vdomc/vnode.hpp"

namespace vdomc {

// Positions (into `seq`) of one longest strictly increasing subsequence.
// Patience sorting with back-pointers, O(n log n).
inline std::vector<std::size_t> longest_increasing_subsequence(std::span<const std::size_t> seq) {
  std::vector<std::size_t> tails;  // positions of the smallest tail per length
  std::vector<std::ptrdiff_t> prev(seq.size(), -1);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    auto it = std::lower_bound(tails.begin(), tails.end(), seq[i],
                               [&](std::size_t pos, std::size_t value) { return seq[pos] < value; });
    if (it != tails.begin()) prev[i] = static_cast<std::ptrdiff_t>(*(it - 1));
    if (it == tails.end()) {
      tails.push_back(i);
    } else {
      *it = i;
    }
  }
  std::vector<std::size_t> out(tails.size());
  std::ptrdiff_t cur = tails.empty() ? -1 : static_cast<std::ptrdiff_t>(tails.back());
  for (std::size_t k = out.size(); k-- > 0;) {
    out[k] = static_cast<std::size_t>(cur);
    cur = prev[static_cast<std::size_t>(cur)];
  }
  return out;
}

namespace detail {

// Fenwick tree over 0/1 slot activity; answers "how many active slots
// precede this one".
class SlotCounter {
 public:
  explicit SlotCounter(std::size_t n) : tree_(n + 1, 0) {}

  void add(std::size_t slot, int delta) {
    for (std::size_t i = slot + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }

  std::size_t count_before(std::size_t slot) const {
    int sum = 0;
    for (std::size_t i = slot; i > 0; i -= i & (~i + 1)) sum += tree_[i];
    return static_cast<std::size_t>(sum);
  }

 private:
  std::vector<int> tree_;
};

class Differ {
 public:
  Differ(const DiffOptions& options, Patch& out, DiffStats& stats)
      : fast_(options.fast_paths), on_visit_(options.on_visit), out_(out), stats_(stats) {}

  void node(const VNode& old_node, const VNode& new_node, Path& path) {
    ++stats_.nodes_visited;
    if (on_visit_) on_visit_(new_node);
    if (fast_ && old_node.same_node(new_node)) {
      ++stats_.identity_skips;
      return;
    }
    if (old_node.is_text() && new_node.is_text()) {
      if (old_node.text() != new_node.text()) out_.push_back(op::SetText{path, new_node.text()});
      return;
    }
    if (old_node.is_text() != new_node.is_text() || old_node.tag() != new_node.tag() ||
        old_node.key() != new_node.key()) {
      out_.push_back(op::Replace{path, new_node});
      stats_.nodes_visited += new_node.dom_size() - 1;
      return;
    }
    props(old_node.props(), new_node.props(), path);
    children(old_node, new_node, path);
  }

  // Sets for added/changed names in new order, removes for absent names in old
  // order. Retained names that appear out of their old relative order are
  // removed and re-set so the live attribute order ends up equal to the new
  // map's order.
  void props(const Props& old_props, const Props& new_props, const Path& path) {
    if (old_props.empty() && new_props.empty()) return;
    auto old_pos = [&](std::string_view name) -> std::ptrdiff_t {
      for (std::size_t i = 0; i < old_props.size(); ++i) {
        if (old_props[i].first == name) return static_cast<std::ptrdiff_t>(i);
      }
      return -1;
    };
    std::size_t in_place = 0;
    std::ptrdiff_t last = -1;
    while (in_place < new_props.size()) {
      std::ptrdiff_t pos = old_pos(new_props[in_place].first);
      if (pos < 0 || pos < last) break;
      last = pos;
      ++in_place;
    }
    for (const auto& [name, value] : old_props) {
      bool keep = false;
      for (std::size_t i = 0; i < in_place; ++i) {
        if (new_props[i].first == name) {
          keep = true;
          break;
        }
      }
      if (!keep) {
        out_.push_back(op::RemoveProp{path, name});
      }
    }
    for (std::size_t i = 0; i < new_props.size(); ++i) {
      const auto& [name, value] = new_props[i];
      if (i < in_place && prop_equal(*old_props.find(name), value)) continue;
      out_.push_back(op::SetProp{path, name, value});
    }
  }

  void children(const VNode& old_node, const VNode& new_node, Path& path) {
    const bool elided = old_node.children_elided() || new_node.children_elided();
    if (elided && (!fast_ || !new_node.delta())) {
      throw PatchPathError("an elided child list can only be diffed through a delta");
    }
    const bool old_slot = uses_text_slot(old_node);
    const bool new_slot = uses_text_slot(new_node);
    if (old_slot || new_slot) {
      text_slot(old_node, new_node, old_slot, new_slot, path);
      return;
    }
    // A delta is taken unless it would create more nodes than diffing the
    // materialized child list could ever visit.
    if (fast_ && new_node.delta() && (elided || new_node.delta_cost() < new_node.dom_size())) {
      delta(*new_node.delta(), path);
      return;
    }
    auto old_children = old_node.children();
    auto new_children = new_node.children();
    if (fast_ && new_node.shape() == Flag::NoChildren) {
      if (old_children.empty()) {
        ++stats_.flag_skips;
        return;
      }
      remove_range(0, old_children.size(), path);
      return;
    }
    if (fast_ && new_node.shape() == Flag::OnlyKeyedChildren && old_node.shape() == Flag::OnlyKeyedChildren) {
      keyed(old_children, new_children, path);
      return;
    }
    positional(old_children, new_children, path);
  }

  void positional(std::span<const VNode> old_children, std::span<const VNode> new_children, Path& path) {
    const std::size_t common = std::min(old_children.size(), new_children.size());
    for (std::size_t i = 0; i < common; ++i) child(old_children[i], new_children[i], i, path);
    for (std::size_t i = common; i < new_children.size(); ++i) insert(i, new_children[i], path);
    if (old_children.size() > common) remove_range(common, old_children.size(), path);
  }

  void keyed(std::span<const VNode> old_children, std::span<const VNode> new_children, Path& path) {
    ++stats_.keyed_fast_path_hits;
    std::size_t start = 0;
    std::size_t old_end = old_children.size();
    std::size_t new_end = new_children.size();

    while (start < old_end && start < new_end && *old_children[start].key() == *new_children[start].key()) {
      child(old_children[start], new_children[start], start, path);
      ++start;
    }
    while (old_end > start && new_end > start &&
           *old_children[old_end - 1].key() == *new_children[new_end - 1].key()) {
      child(old_children[old_end - 1], new_children[new_end - 1], old_end - 1, path);
      --old_end;
      --new_end;
    }
    if (start == old_end) {
      for (std::size_t j = start; j < new_end; ++j) insert(j, new_children[j], path);
      return;
    }
    if (start == new_end) {
      remove_range(start, old_end, path);
      return;
    }

    // Middle window: key map over the new side.
    const std::size_t width = new_end - start;
    std::unordered_map<std::string_view, std::size_t> new_index;
    new_index.reserve(width);
    for (std::size_t j = start; j < new_end; ++j) new_index.emplace(*new_children[j].key(), j - start);

    constexpr std::size_t kNew = static_cast<std::size_t>(-1);
    std::vector<std::size_t> source(width, kNew);  // window-relative old index per new slot
    std::vector<std::size_t> removed;
    for (std::size_t k = start; k < old_end; ++k) {
      auto it = new_index.find(*old_children[k].key());
      if (it == new_index.end()) {
        removed.push_back(k);
      } else {
        source[it->second] = k - start;
      }
    }
    for (auto it = removed.rbegin(); it != removed.rend(); ++it) out_.push_back(op::RemoveChild{path, *it});

    const std::size_t survivors = (old_end - start) - removed.size();
    if (survivors == 0) {
      for (std::size_t j = start; j < new_end; ++j) insert(j, new_children[j], path);
      return;
    }

    std::vector<std::size_t> seq;
    std::vector<std::size_t> seq_pos;  // window-relative new index of each seq entry
    seq.reserve(survivors);
    seq_pos.reserve(survivors);
    for (std::size_t w = 0; w < width; ++w) {
      if (source[w] != kNew) {  // survivor
        seq.push_back(source[w]);
        seq_pos.push_back(w);
      }
    }
    std::vector<char> stable(width, 0);
    for (std::size_t p : longest_increasing_subsequence(seq)) stable[seq_pos[p]] = 1;

    // Static slot order consistent with every intermediate child list: moved
    // and inserted nodes sit just before the next stable node (or the end),
    // unplaced survivors sit at their old positions.
    std::vector<std::size_t> anchor_of(width, width);
    for (std::size_t w = width, next = width; w-- > 0;) {
      if (stable[w]) {
        next = w;
      } else {
        anchor_of[w] = next;
      }
    }
    std::vector<std::vector<std::size_t>> group(width + 1);
    for (std::size_t w = 0; w < width; ++w) {
      if (!stable[w]) group[anchor_of[w]].push_back(w);
    }
    std::vector<std::size_t> old_slot(width, kNew);
    std::vector<std::size_t> new_slot(width, kNew);
    std::vector<std::size_t> new_of_old(old_end - start, kNew);
    for (std::size_t w = 0; w < width; ++w) {
      if (source[w] != kNew) new_of_old[source[w]] = w;
    }
    std::size_t slots = 0;
    for (std::size_t k = 0; k < old_end - start; ++k) {
      const std::size_t w = new_of_old[k];
      if (w == kNew) continue;
      if (stable[w]) {
        for (std::size_t g : group[w]) new_slot[g] = slots++;
      }
      old_slot[w] = slots++;
    }
    for (std::size_t g : group[width]) new_slot[g] = slots++;

    SlotCounter active(slots);
    for (std::size_t w = 0; w < width; ++w) {
      if (source[w] != kNew) active.add(old_slot[w], 1);
    }

    for (std::size_t w = width; w-- > 0;) {
      const VNode& target = new_children[start + w];
      if (source[w] == kNew) {
        active.add(new_slot[w], 1);
        insert(start + active.count_before(new_slot[w]), target, path);
        continue;
      }
      const VNode& previous = old_children[start + source[w]];
      if (stable[w]) {
        child(previous, target, start + active.count_before(old_slot[w]), path);
        continue;
      }
      const std::size_t from = start + active.count_before(old_slot[w]);
      active.add(old_slot[w], -1);
      const std::size_t to = start + active.count_before(new_slot[w]);
      active.add(new_slot[w], 1);
      if (from != to) out_.push_back(op::MoveChild{path, from, to});
      child(previous, target, to, path);
    }
  }

 private:
  void child(const VNode& old_node, const VNode& new_node, std::size_t index, Path& path) {
    path.push_back(index);
    node(old_node, new_node, path);
    path.pop_back();
  }

  void insert(std::size_t index, const VNode& node, const Path& path) {
    out_.push_back(op::InsertChild{path, index, node});
    stats_.nodes_visited += node.dom_size();
  }

  void remove_range(std::size_t first, std::size_t last, const Path& path) {
    for (std::size_t k = last; k-- > first;) out_.push_back(op::RemoveChild{path, k});
  }

  void text_slot(const VNode& old_node, const VNode& new_node, bool old_slot, bool new_slot, const Path& path) {
    if (old_slot && new_slot) {
      if (fast_) ++stats_.flag_skips;
      auto a = old_node.children();
      auto b = new_node.children();
      const bool same = (a.size() == 1 && b.size() == 1) ? a[0].text() == b[0].text()
                                                          : joined_text(old_node) == joined_text(new_node);
      if (!same) out_.push_back(op::SetText{path, joined_text(new_node)});
      return;
    }
    if (old_slot) {
      if (!joined_text(old_node).empty()) out_.push_back(op::SetText{path, std::string()});
      std::size_t i = 0;
      for (const VNode& c : new_node.children()) insert(i++, c, path);
      return;
    }
    std::string text = joined_text(new_node);
    if (old_node.children().empty() && text.empty()) return;
    out_.push_back(op::SetText{path, std::move(text)});
  }

  void delta(const DeltaList& ops, Path& path) {
    ++stats_.delta_bypasses;
    for (const DeltaOp& d : ops) {
      switch (d.kind) {
        case DeltaOp::Kind::Insert: insert(d.index, *d.node, path); break;
        case DeltaOp::Kind::Update: {
          path.push_back(d.index);
          out_.push_back(op::Replace{path, *d.node});
          path.pop_back();
          stats_.nodes_visited += d.node->dom_size();
          break;
        }
        case DeltaOp::Kind::Remove: out_.push_back(op::RemoveChild{path, d.index}); break;
      }
    }
  }

  bool fast_;
  const std::function<void(const VNode&)>& on_visit_;
  Patch& out_;
  DiffStats& stats_;
};

}  // namespace detail

struct DiffResult {
  Patch patch;
  DiffStats stats;
};

// First pass: computes the patch turning the DOM realized from `old_tree`
// into one equal to realize(new_tree). Pure; never touches a DOM.
//
// Visit accounting: every compared pair counts once and every DOM node that
// the patch will create (inserted or replacing subtrees) counts once, so the
// naive mode always reports exactly new_tree.dom_size() and no mode exceeds it.
inline DiffResult diff(const VNode& old_tree, const VNode& new_tree, const DiffOptions& options = {}) {
  DiffResult result;
  Path path;
  detail::Differ(options, result.patch, result.stats).node(old_tree, new_tree, path);
  return result;
}

inline Patch diff_props(const Props& old_props, const Props& new_props, const Path& path) {
  Patch out;
  DiffStats stats;
  DiffOptions options;
  detail::Differ(options, out, stats).props(old_props, new_props, path);
  return out;
}

inline Patch diff_children(const VNode& old_node, const VNode& new_node, const Path& path, DiffStats& stats,
                           const DiffOptions& options = {}) {
  Patch out;
  Path scratch = path;
  detail::Differ(options, out, stats).children(old_node, new_node, scratch);
  return out;
}

inline Patch diff_keyed(std::span<const VNode> old_children, std::span<const VNode> new_children,
                        const Path& path, DiffStats& stats, const DiffOptions& options = {}) {
  Patch out;
  Path scratch = path;
  detail::Differ(options, out, stats).keyed(old_children, new_children, scratch);
  return out;
}

}  // namespace vdomc
