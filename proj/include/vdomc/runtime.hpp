#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "vdomc/compiler.hpp"
#include "vdomc/error.hpp"
#include "vdomc/vnode.hpp"
#include "vdomc/vnode_json.hpp"

namespace vdomc {

// JSON-like state value. Objects keep insertion order.
using StateValue = Json;

namespace detail {

struct Binding {
  std::string_view name;
  const StateValue* value;
};

// Per each-block cache of rendered items, keyed by item key.
struct EachMemo {
  struct Entry {
    StateValue item;
    VNode node;
    std::uint64_t generation;
  };
  std::unordered_map<const instr::ForEach*, std::unordered_map<std::string, Entry>> blocks;
  std::unordered_set<const instr::ForEach*> cacheable;
  std::uint64_t generation = 0;
  std::uint64_t hits = 0;
};

class Instantiator {
 public:
  Instantiator(const CompiledModule& module, const StateValue& state, EachMemo* memo = nullptr)
      : module_(module), state_(state), memo_(memo) {}

  void bind(std::string_view name, const StateValue& value) { scope_.push_back({name, &value}); }

  // Appends the nodes produced by `in` to `out`.
  void run(const Instr& in, std::vector<VNode>& out) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, instr::MakeEl>) {
            out.push_back(element(n, std::nullopt));
          } else if constexpr (std::is_same_v<T, instr::MakeText>) {
            out.push_back(make_text(n.text));
          } else if constexpr (std::is_same_v<T, instr::ReadText>) {
            out.push_back(make_text(text_of(n.path)));
          } else if constexpr (std::is_same_v<T, instr::UseHoisted>) {
            out.push_back(module_.hoisted[n.id]);
          } else if constexpr (std::is_same_v<T, instr::ForEach>) {
            const StateValue* list = resolve(n.list_path);
            if (list == nullptr || !list->is_array()) {
              throw PathTypeError("each path '" + n.list_path.str() + "' is not an array");
            }
            out.reserve(out.size() + list->size());
            if (memo_ && memo_->cacheable.count(&n)) {
              auto& block = memo_->blocks[&n];
              for (const StateValue& item : *list) out.push_back(cached_item(n, item, block));
            } else {
              for (const StateValue& item : *list) out.push_back(each_item(n, item));
            }
          } else {
            const StateValue* cond = resolve(n.cond_path);
            if (cond == nullptr) throw PathTypeError("if path '" + n.cond_path.str() + "' is missing");
            for (const Instr& c : truthy(*cond) ? n.then_body : n.else_body) run(c, out);
          }
        },
        in.v);
  }

  VNode each_item(const instr::ForEach& each, const StateValue& item) {
    std::string key = item_key(each, item);
    scope_.push_back({each.item_name, &item});
    VNode node = element(std::get<instr::MakeEl>(each.body.front().v), std::move(key));
    scope_.pop_back();
    return node;
  }

  VNode cached_item(const instr::ForEach& each, const StateValue& item,
                    std::unordered_map<std::string, EachMemo::Entry>& block) {
    std::string key = item_key(each, item);
    auto it = block.find(key);
    if (it != block.end() && it->second.item == item) {
      it->second.generation = memo_->generation;
      ++memo_->hits;
      return it->second.node;
    }
    VNode node = each_item(each, item);
    block.insert_or_assign(std::move(key), EachMemo::Entry{item, node, memo_->generation});
    return node;
  }

  static std::string item_key(const instr::ForEach& each, const StateValue& item) {
    const StateValue* key = &item;
    for (const std::string& seg : each.key_path.segments) {
      if (!key->is_object()) {
        key = nullptr;
        break;
      }
      auto it = key->find(seg);
      key = it == key->end() ? nullptr : &*it;
    }
    if (key == nullptr || key->is_null() || key->is_structured()) {
      throw PathTypeError("each key '" + each.item_name + "." + each.key_path.str() + "' is not a scalar");
    }
    return scalar_text(*key);
  }

  const StateValue* resolve(const StatePath& path) const {
    const StateValue* cur = &state_;
    std::size_t first = 0;
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
      if (it->name == path.segments.front()) {
        cur = it->value;
        first = 1;
        break;
      }
    }
    for (std::size_t i = first; i < path.segments.size(); ++i) {
      if (!cur->is_object()) return nullptr;
      auto found = cur->find(path.segments[i]);
      if (found == cur->end()) return nullptr;
      cur = &*found;
    }
    return cur;
  }

  static bool truthy(const StateValue& v) {
    if (v.is_null()) return false;
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number()) return v.get<double>() != 0.0;
    if (v.is_string()) return !v.get_ref<const std::string&>().empty();
    return true;
  }

 private:
  static std::string scalar_text(const StateValue& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number()) return format_number(v.get<double>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return std::string();
  }

  // Missing paths and null render as empty text.
  std::string text_of(const StatePath& path) const {
    const StateValue* v = resolve(path);
    if (v == nullptr) return std::string();
    if (v->is_structured()) throw PathTypeError("text hole '" + path.str() + "' is not a scalar");
    return scalar_text(*v);
  }

  VNode element(const instr::MakeEl& m, std::optional<std::string> key) {
    ElementInit init;
    init.tag = m.tag;
    init.props = m.static_props;
    for (const auto& [name, path] : m.dyn_props) {
      const StateValue* v = resolve(path);
      if (v == nullptr || v->is_null()) continue;
      if (v->is_string()) {
        init.props.set(name, v->get<std::string>());
      } else if (v->is_boolean()) {
        init.props.set(name, v->get<bool>());
      } else if (v->is_number()) {
        init.props.set(name, v->get<double>());
      } else {
        throw PathTypeError("attribute '" + name + "' path '" + path.str() + "' is not a scalar");
      }
    }
    if (key) {
      init.key = std::move(key);
    } else if (m.static_key) {
      init.key = m.static_key;
    } else if (m.key_path) {
      const StateValue* v = resolve(*m.key_path);
      if (v == nullptr || v->is_null() || v->is_structured()) {
        throw PathTypeError("key path '" + m.key_path->str() + "' is not a scalar");
      }
      init.key = scalar_text(*v);
    }
    init.children.reserve(m.children.size());
    for (const Instr& c : m.children) run(c, init.children);
    init.flag = m.flag;
    return make_element(std::move(init));
  }

  const CompiledModule& module_;
  const StateValue& state_;
  EachMemo* memo_;
  std::vector<Binding> scope_;
};

}  // namespace detail

// Evaluates the program against `state`. Hoisted constants come back as the
// module's shared nodes, so identity() is stable across calls.
inline VNode instantiate(const CompiledModule& module, const StateValue& state) {
  std::vector<VNode> out;
  detail::Instantiator(module, state).run(module.program, out);
  if (out.size() != 1) throw PathTypeError("template root must produce exactly one node");
  return std::move(out.front());
}

namespace detail {

inline const instr::ForEach* find_each(const Instr& in, const StatePath& path) {
  if (const auto* each = std::get_if<instr::ForEach>(&in.v)) {
    if (each->list_path == path) return each;
    return find_each(each->body.front(), path);
  }
  const InstrList* lists[2] = {nullptr, nullptr};
  if (const auto* el = std::get_if<instr::MakeEl>(&in.v)) lists[0] = &el->children;
  if (const auto* br = std::get_if<instr::Branch>(&in.v)) {
    lists[0] = &br->then_body;
    lists[1] = &br->else_body;
  }
  for (const InstrList* list : lists) {
    if (!list) continue;
    for (const Instr& c : *list) {
      if (const auto* found = find_each(c, path)) return found;
    }
  }
  return nullptr;
}

// Whether every state path under `in` starts with a name in `bound`.
inline bool item_local(const Instr& in, std::vector<std::string_view>& bound) {
  auto ok = [&](const StatePath& p) {
    return std::find(bound.begin(), bound.end(), p.segments.front()) != bound.end();
  };
  auto all = [&](const InstrList& list) {
    return std::all_of(list.begin(), list.end(), [&](const Instr& c) { return item_local(c, bound); });
  };
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, instr::MakeEl>) {
          for (const auto& [name, path] : n.dyn_props) {
            if (!ok(path)) return false;
          }
          if (n.key_path && !ok(*n.key_path)) return false;
          return all(n.children);
        } else if constexpr (std::is_same_v<T, instr::ReadText>) {
          return ok(n.path);
        } else if constexpr (std::is_same_v<T, instr::ForEach>) {
          if (!ok(n.list_path)) return false;
          bound.push_back(n.item_name);
          const bool local = item_local(n.body.front(), bound);
          bound.pop_back();
          return local;
        } else if constexpr (std::is_same_v<T, instr::Branch>) {
          return ok(n.cond_path) && all(n.then_body) && all(n.else_body);
        } else {
          return true;
        }
      },
      in.v);
}

inline void collect_cacheable(const Instr& in, std::unordered_set<const instr::ForEach*>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, instr::MakeEl>) {
          for (const Instr& c : n.children) collect_cacheable(c, out);
        } else if constexpr (std::is_same_v<T, instr::ForEach>) {
          std::vector<std::string_view> bound{n.item_name};
          if (item_local(n.body.front(), bound)) out.insert(&n);
          collect_cacheable(n.body.front(), out);
        } else if constexpr (std::is_same_v<T, instr::Branch>) {
          for (const Instr& c : n.then_body) collect_cacheable(c, out);
          for (const Instr& c : n.else_body) collect_cacheable(c, out);
        }
      },
      in.v);
}

}  // namespace detail

// Stateful instantiate. Items of an each block whose body reads nothing but
// the item itself are cached by key and value, so an unchanged item renders
// to the very same node and the diff skips it by identity.
class Renderer {
 public:
  explicit Renderer(std::shared_ptr<const CompiledModule> module) : module_(std::move(module)) {
    detail::collect_cacheable(module_->program, memo_.cacheable);
  }

  VNode render(const StateValue& state) {
    ++memo_.generation;
    std::vector<VNode> out;
    detail::Instantiator(*module_, state, &memo_).run(module_->program, out);
    if (out.size() != 1) throw PathTypeError("template root must produce exactly one node");
    for (auto& [each, block] : memo_.blocks) {
      std::erase_if(block, [&](const auto& kv) { return kv.second.generation != memo_.generation; });
    }
    return std::move(out.front());
  }

  const CompiledModule& module() const noexcept { return *module_; }
  std::uint64_t cache_hits() const noexcept { return memo_.hits; }
  std::size_t cacheable_blocks() const noexcept { return memo_.cacheable.size(); }

 private:
  std::shared_ptr<const CompiledModule> module_;
  detail::EachMemo memo_;
};

// Explicit-mutation list whose snapshots carry the recorded edits as a delta,
// so rendering a change costs time proportional to the edits, not the list.
// Single owner; a snapshot consumes the pending edits.
class ReactiveList {
 public:
  struct Options {
    // Also keep the full child list in each snapshot. Costs O(n) per
    // snapshot; meant for oracle checks.
    bool realize_children = false;
  };

  ReactiveList(std::shared_ptr<const CompiledModule> module, const StatePath& list_path)
      : ReactiveList(std::move(module), list_path, Options{}) {}

  ReactiveList(std::shared_ptr<const CompiledModule> module, const StatePath& list_path, Options options,
               StateValue context = {})
      : module_(std::move(module)), options_(options), context_(std::move(context)) {
    each_ = detail::find_each(module_->program, list_path);
    if (each_ == nullptr) throw PathTypeError("module has no each block over '" + list_path.str() + "'");
  }

  void insert(std::size_t index, StateValue item) {
    if (index > items_.size()) throw IndexOutOfBounds(bounds("insert", index));
    VNode node = render(item);
    items_.insert(items_.begin() + static_cast<std::ptrdiff_t>(index), std::move(item));
    if (options_.realize_children) nodes_.insert(nodes_.begin() + static_cast<std::ptrdiff_t>(index), node);
    pending_.push_back(DeltaOp::insert(index, std::move(node)));
  }

  void push_back(StateValue item) { insert(items_.size(), std::move(item)); }

  void update(std::size_t index, StateValue item) {
    if (index >= items_.size()) throw IndexOutOfBounds(bounds("update", index));
    VNode node = render(item);
    items_[index] = std::move(item);
    if (options_.realize_children) nodes_[index] = node;
    pending_.push_back(DeltaOp::update(index, std::move(node)));
  }

  void remove(std::size_t index) {
    if (index >= items_.size()) throw IndexOutOfBounds(bounds("remove", index));
    items_.erase(items_.begin() + static_cast<std::ptrdiff_t>(index));
    if (options_.realize_children) nodes_.erase(nodes_.begin() + static_cast<std::ptrdiff_t>(index));
    pending_.push_back(DeltaOp::remove(index));
  }

  std::size_t size() const noexcept { return items_.size(); }
  const std::vector<StateValue>& items() const noexcept { return items_; }
  const DeltaList& pending() const noexcept { return pending_; }

  // Parent element carrying the pending edits as its delta; clears them.
  // Without realize_children the child list is elided and the node is only
  // meaningful as the new side of a diff against the previous snapshot.
  VNode snapshot(std::string tag, Props props = {}) {
    ElementInit init;
    init.tag = std::move(tag);
    init.props = std::move(props);
    init.flag = Flag::OnlyKeyedChildren;
    init.delta = std::move(pending_);
    pending_.clear();
    if (options_.realize_children) {
      init.children = nodes_;
    } else {
      init.elided = true;
    }
    return make_element(std::move(init));
  }

 private:
  VNode render(const StateValue& item) const {
    detail::Instantiator inst(*module_, context_);
    return inst.each_item(*each_, item);
  }

  std::string bounds(const char* what, std::size_t index) const {
    return std::string(what) + " index " + std::to_string(index) + " out of bounds for list of " +
           std::to_string(items_.size());
  }

  std::shared_ptr<const CompiledModule> module_;
  const instr::ForEach* each_ = nullptr;
  Options options_;
  StateValue context_;
  std::vector<StateValue> items_;
  std::vector<VNode> nodes_;
  DeltaList pending_;
};

}  // namespace vdomc
