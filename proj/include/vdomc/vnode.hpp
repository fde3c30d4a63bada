#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "vdomc/error.hpp"

namespace vdomc {

// Shape annotation carried by every element. Selects the children diff path.
enum class Flag : std::uint8_t {
  AnyChildren,
  NoChildren,
  OnlyTextChildren,
  OnlyKeyedChildren,
  Static,  // hoisted constant; only the compiler assigns it
};

inline std::string_view to_string(Flag flag) {
  switch (flag) {
    case Flag::AnyChildren: return "ANY_CHILDREN";
    case Flag::NoChildren: return "NO_CHILDREN";
    case Flag::OnlyTextChildren: return "ONLY_TEXT_CHILDREN";
    case Flag::OnlyKeyedChildren: return "ONLY_KEYED_CHILDREN";
    case Flag::Static: return "STATIC";
  }
  return "ANY_CHILDREN";
}

inline std::optional<Flag> flag_from_string(std::string_view name) {
  for (Flag f : {Flag::AnyChildren, Flag::NoChildren, Flag::OnlyTextChildren,
                 Flag::OnlyKeyedChildren, Flag::Static}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

// Opaque event handler id. The headless DOM only attaches and detaches it.
struct EventRef {
  std::uint64_t handler = 0;
  bool operator==(const EventRef&) const = default;
};

using PropValue = std::variant<std::string, bool, double, EventRef>;

// NaN compares equal to itself so structural equality stays an equivalence.
inline bool prop_equal(const PropValue& a, const PropValue& b) {
  if (a.index() != b.index()) return false;
  if (const double* x = std::get_if<double>(&a)) {
    const double y = std::get<double>(b);
    return *x == y || (std::isnan(*x) && std::isnan(y));
  }
  return a == b;
}

inline bool is_event(const PropValue& v) { return std::holds_alternative<EventRef>(v); }

// Attribute map that iterates in insertion order. Setting an existing name
// keeps its position.
class Props {
 public:
  using Entry = std::pair<std::string, PropValue>;
  using const_iterator = std::vector<Entry>::const_iterator;

  Props() = default;
  Props(std::initializer_list<Entry> init) {
    for (const auto& [name, value] : init) set(name, value);
  }

  void set(std::string name, PropValue value) {
    for (auto& entry : entries_) {
      if (entry.first == name) {
        entry.second = std::move(value);
        return;
      }
    }
    entries_.emplace_back(std::move(name), std::move(value));
  }

  bool erase(std::string_view name) {
    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [&](const Entry& e) { return e.first == name; });
    if (it == entries_.end()) return false;
    entries_.erase(it);
    return true;
  }

  const PropValue* find(std::string_view name) const {
    for (const auto& entry : entries_) {
      if (entry.first == name) return &entry.second;
    }
    return nullptr;
  }

  bool contains(std::string_view name) const { return find(name) != nullptr; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const_iterator begin() const noexcept { return entries_.begin(); }
  const_iterator end() const noexcept { return entries_.end(); }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }

  friend bool operator==(const Props& a, const Props& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a.entries_[i].first != b.entries_[i].first ||
          !prop_equal(a.entries_[i].second, b.entries_[i].second)) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<Entry> entries_;
};

namespace detail {
struct NodeData;
}

class VNode;
struct DeltaOp;
using DeltaList = std::vector<DeltaOp>;
struct ElementInit;

VNode make_text(std::string content);
VNode make_element(ElementInit init);

// Immutable handle to a virtual node. Copies share the underlying node, so
// identity() distinguishes a shared constant from an equal rebuilt tree.
class VNode {
 public:
  bool is_text() const noexcept;
  bool is_element() const noexcept { return !is_text(); }

  // Text content of a text node.
  const std::string& text() const noexcept;
  const std::string& tag() const noexcept;
  const Props& props() const noexcept;
  std::span<const VNode> children() const noexcept;
  const std::optional<std::string>& key() const noexcept;
  Flag flag() const noexcept;
  // Children shape. Same as flag() except for STATIC nodes, where it is the
  // shape inferred from the children.
  Flag shape() const noexcept;
  const DeltaList* delta() const noexcept;
  std::optional<std::size_t> hoist_id() const noexcept;
  std::size_t subtree_size() const noexcept;
  // Number of DOM nodes realizing this subtree creates (an element whose
  // children are all text holds them as one text slot, not as nodes).
  std::size_t dom_size() const noexcept;
  // Children shape inferred from the actual child list, whatever the flag.
  Flag content_shape() const noexcept;
  // Summed dom_size() of the nodes carried by the delta list.
  std::size_t delta_cost() const noexcept;
  // Snapshot whose child list is not materialized; only its delta is usable.
  bool children_elided() const noexcept;
  bool subtree_has_delta() const noexcept;

  const void* identity() const noexcept { return data_.get(); }
  bool same_node(const VNode& other) const noexcept { return data_ == other.data_; }

 private:
  explicit VNode(std::shared_ptr<const detail::NodeData> data) : data_(std::move(data)) {}

  std::shared_ptr<const detail::NodeData> data_;

  friend VNode make_text(std::string content);
  friend VNode make_element(ElementInit init);
};

// Imperative child edit attached to an element. Indices refer to the child
// list as left by the preceding ops in the same list.
struct DeltaOp {
  enum class Kind : std::uint8_t { Insert, Update, Remove };

  Kind kind = Kind::Insert;
  std::size_t index = 0;
  std::optional<VNode> node;  // absent for Remove

  static DeltaOp insert(std::size_t index, VNode node) { return {Kind::Insert, index, std::move(node)}; }
  static DeltaOp update(std::size_t index, VNode node) { return {Kind::Update, index, std::move(node)}; }
  static DeltaOp remove(std::size_t index) { return {Kind::Remove, index, std::nullopt}; }
};

struct ElementInit {
  std::string tag;
  Props props;
  std::vector<VNode> children;
  std::optional<std::string> key;
  std::optional<Flag> flag;  // inferred when absent
  std::optional<DeltaList> delta;
  std::optional<std::size_t> hoist_id;
  bool elided = false;  // requires a delta and no children
};

namespace detail {

struct NodeData {
  bool text_node = false;
  std::string name;  // tag, or content for text nodes
  Props props;
  std::vector<VNode> children;
  std::optional<std::string> key;
  Flag flag = Flag::AnyChildren;
  Flag shape = Flag::AnyChildren;
  Flag content = Flag::NoChildren;
  std::optional<DeltaList> delta;
  std::optional<std::size_t> hoist_id;
  std::size_t size = 1;
  std::size_t dom_size = 1;
  std::size_t delta_cost = 0;
  bool has_delta = false;
  bool elided = false;
};

inline const Props& empty_props() {
  static const Props props;
  return props;
}

inline const std::optional<std::string>& no_key() {
  static const std::optional<std::string> key;
  return key;
}

inline bool valid_tag(std::string_view tag) {
  if (tag.empty() || tag.front() < 'a' || tag.front() > 'z') return false;
  return std::all_of(tag.begin(), tag.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
  });
}

}  // namespace detail

inline bool VNode::is_text() const noexcept { return data_->text_node; }
inline const std::string& VNode::text() const noexcept { return data_->name; }
inline const std::string& VNode::tag() const noexcept { return data_->name; }
inline const Props& VNode::props() const noexcept { return data_->props; }
inline std::span<const VNode> VNode::children() const noexcept { return data_->children; }
inline const std::optional<std::string>& VNode::key() const noexcept { return data_->key; }
inline Flag VNode::flag() const noexcept { return data_->flag; }
inline Flag VNode::shape() const noexcept { return data_->shape; }
inline const DeltaList* VNode::delta() const noexcept {
  return data_->delta ? &*data_->delta : nullptr;
}
inline std::optional<std::size_t> VNode::hoist_id() const noexcept { return data_->hoist_id; }
inline std::size_t VNode::subtree_size() const noexcept { return data_->size; }
inline std::size_t VNode::dom_size() const noexcept { return data_->dom_size; }
inline Flag VNode::content_shape() const noexcept { return data_->content; }
inline std::size_t VNode::delta_cost() const noexcept { return data_->delta_cost; }
inline bool VNode::children_elided() const noexcept { return data_->elided; }
inline bool VNode::subtree_has_delta() const noexcept { return data_->has_delta; }

inline bool is_keyed_element(const VNode& v) { return v.is_element() && v.key().has_value(); }

// Shape of a child list. Never returns STATIC.
inline Flag infer_flag(std::span<const VNode> children) {
  if (children.empty()) return Flag::NoChildren;
  if (std::all_of(children.begin(), children.end(), [](const VNode& c) { return c.is_text(); })) {
    return Flag::OnlyTextChildren;
  }
  if (std::all_of(children.begin(), children.end(), is_keyed_element)) {
    return Flag::OnlyKeyedChildren;
  }
  return Flag::AnyChildren;
}

// Whether `flag` is a truthful annotation for `children`. ANY_CHILDREN admits
// everything; the specific shapes admit their own lists (vacuously, when empty).
inline bool flag_admits(Flag flag, std::span<const VNode> children) {
  switch (flag) {
    case Flag::AnyChildren: return true;
    case Flag::NoChildren: return children.empty();
    case Flag::OnlyTextChildren:
      return std::all_of(children.begin(), children.end(), [](const VNode& c) { return c.is_text(); });
    case Flag::OnlyKeyedChildren:
      return std::all_of(children.begin(), children.end(), is_keyed_element);
    case Flag::Static: return true;
  }
  return false;
}

inline VNode make_text(std::string content) {
  auto data = std::make_shared<detail::NodeData>();
  data->text_node = true;
  data->name = std::move(content);
  return VNode(std::move(data));
}

inline VNode make_element(ElementInit init) {
  if (!detail::valid_tag(init.tag)) throw InvalidTag("invalid tag name '" + init.tag + "'");

  const Flag shape = infer_flag(init.children);
  if (shape == Flag::OnlyKeyedChildren) {
    std::unordered_set<std::string_view> seen;
    seen.reserve(init.children.size());
    for (const VNode& c : init.children) {
      if (!seen.insert(*c.key()).second) {
        throw DuplicateKey("duplicate sibling key '" + *c.key() + "' under <" + init.tag + ">");
      }
    }
  }

  auto data = std::make_shared<detail::NodeData>();
  data->content = shape;
  data->has_delta = init.delta.has_value();
  for (const VNode& c : init.children) {
    data->size += c.subtree_size();
    data->dom_size += c.dom_size();
    data->has_delta = data->has_delta || c.subtree_has_delta();
  }
  if (shape == Flag::OnlyTextChildren) data->dom_size = 1;
  if (init.delta) {
    for (const DeltaOp& op : *init.delta) {
      if (op.kind == DeltaOp::Kind::Remove) continue;
      if (!op.node || !op.node->is_element()) {
        throw FlagViolation("delta insert/update must carry an element node");
      }
      data->delta_cost += op.node->dom_size();
    }
  }
  if (init.elided && (!init.delta || !init.children.empty())) {
    throw FlagViolation("elided child list needs a delta and no children");
  }

  Flag flag = init.flag.value_or(shape);
  if (flag == Flag::Static) {
    if (!init.hoist_id) throw FlagViolation("STATIC element without hoist id");
    if (data->has_delta) throw FlagViolation("STATIC subtree contains a delta list");
    data->shape = shape;
  } else {
    if (!flag_admits(flag, init.children)) {
      throw FlagViolation(std::string("flag ") + std::string(to_string(flag)) +
                          " does not hold for children of <" + init.tag + ">");
    }
    data->shape = flag;
  }
  data->flag = flag;
  data->name = std::move(init.tag);
  data->props = std::move(init.props);
  data->children = std::move(init.children);
  data->key = std::move(init.key);
  data->delta = std::move(init.delta);
  data->hoist_id = init.hoist_id;
  data->elided = init.elided;
  return VNode(std::move(data));
}

inline VNode make_element(std::string tag, Props props = {}, std::vector<VNode> children = {},
                          std::optional<std::string> key = std::nullopt,
                          std::optional<DeltaList> delta = std::nullopt) {
  ElementInit init;
  init.tag = std::move(tag);
  init.props = std::move(props);
  init.children = std::move(children);
  init.key = std::move(key);
  init.delta = std::move(delta);
  return make_element(std::move(init));
}

inline ElementInit to_init(const VNode& el) {
  ElementInit init;
  init.tag = el.tag();
  init.props = el.props();
  init.children.assign(el.children().begin(), el.children().end());
  init.key = el.key();
  init.flag = el.flag();
  if (el.delta()) init.delta = *el.delta();
  init.hoist_id = el.hoist_id();
  init.elided = el.children_elided();
  return init;
}

// Copy of `el` marked as hoisted constant number `id`.
inline VNode make_static(const VNode& el, std::size_t id) {
  ElementInit init = to_init(el);
  init.flag = Flag::Static;
  init.hoist_id = id;
  return make_element(std::move(init));
}

// Deep copy with every STATIC flag replaced by its shape and hoist ids dropped.
// Lets hoisted and unhoisted renders be compared structurally.
inline VNode strip_hoisting(const VNode& v) {
  if (v.is_text()) return v;
  ElementInit init = to_init(v);
  if (init.flag == Flag::Static) init.flag = v.shape();
  init.hoist_id.reset();
  for (VNode& c : init.children) c = strip_hoisting(c);
  return make_element(std::move(init));
}

inline bool structural_eq(const VNode& a, const VNode& b) {
  if (a.same_node(b)) return true;
  if (a.is_text() != b.is_text()) return false;
  if (a.is_text()) return a.text() == b.text();
  if (a.tag() != b.tag() || a.flag() != b.flag() || a.key() != b.key() ||
      a.hoist_id() != b.hoist_id() || a.children_elided() != b.children_elided() ||
      !(a.props() == b.props())) {
    return false;
  }
  if ((a.delta() == nullptr) != (b.delta() == nullptr)) return false;
  if (a.delta()) {
    const DeltaList& da = *a.delta();
    const DeltaList& db = *b.delta();
    if (da.size() != db.size()) return false;
    for (std::size_t i = 0; i < da.size(); ++i) {
      if (da[i].kind != db[i].kind || da[i].index != db[i].index) return false;
      if (da[i].node.has_value() != db[i].node.has_value()) return false;
      if (da[i].node && !structural_eq(*da[i].node, *db[i].node)) return false;
    }
  }
  auto ca = a.children();
  auto cb = b.children();
  if (ca.size() != cb.size()) return false;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (!structural_eq(ca[i], cb[i])) return false;
  }
  return true;
}

}  // namespace vdomc
