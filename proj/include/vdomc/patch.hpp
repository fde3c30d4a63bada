#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "vdomc/vnode.hpp"
#include "vdomc/vnode_json.hpp"

namespace vdomc {

// Child indices from the render root; empty addresses the root itself.
using Path = std::vector<std::size_t>;

namespace op {

struct Replace {
  Path path;
  VNode node;
};

// On a text node: replace its content. On an element: replace all children
// with a single text slot (textContent semantics).
struct SetText {
  Path path;
  std::string text;
};

struct SetProp {
  Path path;
  std::string name;
  PropValue value;
};

struct RemoveProp {
  Path path;
  std::string name;
};

struct InsertChild {
  Path path;
  std::size_t index;
  VNode node;
};

struct RemoveChild {
  Path path;
  std::size_t index;
};

// Detach the child at `from`, then insert it at `to` in the shortened list.
struct MoveChild {
  Path path;
  std::size_t from;
  std::size_t to;
};

}  // namespace op

using PatchOp = std::variant<op::Replace, op::SetText, op::SetProp, op::RemoveProp, op::InsertChild,
                             op::RemoveChild, op::MoveChild>;
using Patch = std::vector<PatchOp>;

struct DiffStats {
  std::uint64_t nodes_visited = 0;
  std::uint64_t keyed_fast_path_hits = 0;
  std::uint64_t flag_skips = 0;
  std::uint64_t delta_bypasses = 0;
  std::uint64_t identity_skips = 0;

  DiffStats& operator+=(const DiffStats& o) {
    nodes_visited += o.nodes_visited;
    keyed_fast_path_hits += o.keyed_fast_path_hits;
    flag_skips += o.flag_skips;
    delta_bypasses += o.delta_bypasses;
    identity_skips += o.identity_skips;
    return *this;
  }
  DiffStats operator-(const DiffStats& o) const {
    return {nodes_visited - o.nodes_visited, keyed_fast_path_hits - o.keyed_fast_path_hits,
            flag_skips - o.flag_skips, delta_bypasses - o.delta_bypasses, identity_skips - o.identity_skips};
  }
  bool operator==(const DiffStats&) const = default;
};

struct DiffOptions {
  // Off: flags read as ANY_CHILDREN, deltas ignored, no identity
  // short-circuit. This is the naive baseline.
  bool fast_paths = true;
  // Test hook, called with the new-side node of every compared pair.
  std::function<void(const VNode&)> on_visit;
};

// Elements whose children are all text live in the DOM as a single text slot
// instead of text child nodes. Decided by content, not by flag, so both diff
// modes and realize agree on it.
inline bool uses_text_slot(const VNode& v) {
  return v.is_element() && v.content_shape() == Flag::OnlyTextChildren;
}

inline std::string joined_text(const VNode& el) {
  std::string out;
  for (const VNode& c : el.children()) out += c.text();
  return out;
}

inline Json to_json(const PatchOp& patch_op) {
  return std::visit(
      [](const auto& o) -> Json {
        using T = std::decay_t<decltype(o)>;
        Json j;
        if constexpr (std::is_same_v<T, op::Replace>) {
          j["op"] = "replace";
          j["path"] = o.path;
          j["node"] = to_json(o.node);
        } else if constexpr (std::is_same_v<T, op::SetText>) {
          j["op"] = "set_text";
          j["path"] = o.path;
          j["text"] = o.text;
        } else if constexpr (std::is_same_v<T, op::SetProp>) {
          j["op"] = "set_prop";
          j["path"] = o.path;
          j["name"] = o.name;
          j["value"] = prop_to_json(o.value);
        } else if constexpr (std::is_same_v<T, op::RemoveProp>) {
          j["op"] = "remove_prop";
          j["path"] = o.path;
          j["name"] = o.name;
        } else if constexpr (std::is_same_v<T, op::InsertChild>) {
          j["op"] = "insert_child";
          j["path"] = o.path;
          j["index"] = o.index;
          j["node"] = to_json(o.node);
        } else if constexpr (std::is_same_v<T, op::RemoveChild>) {
          j["op"] = "remove_child";
          j["path"] = o.path;
          j["index"] = o.index;
        } else {
          j["op"] = "move_child";
          j["path"] = o.path;
          j["from"] = o.from;
          j["to"] = o.to;
        }
        return j;
      },
      patch_op);
}

inline Json to_json(const Patch& patch) {
  Json j = Json::array();
  for (const PatchOp& o : patch) j.push_back(to_json(o));
  return j;
}

inline Json to_json(const DiffStats& s) {
  return Json{{"nodes_visited", s.nodes_visited},
              {"keyed_fast_path_hits", s.keyed_fast_path_hits},
              {"flag_skips", s.flag_skips},
              {"delta_bypasses", s.delta_bypasses},
              {"identity_skips", s.identity_skips}};
}

}  // namespace vdomc
