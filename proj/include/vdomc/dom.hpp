#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vdomc/error.hpp"
#include "vdomc/patch.hpp"
#include "vdomc/vnode.hpp"
#include "vdomc/vnode_json.hpp"

namespace vdomc {

using NodeId = std::uint64_t;

// Parent id used when the document itself is the parent (mounting the root).
inline constexpr NodeId kDocumentId = 0;

enum class DomOpKind : std::uint8_t {
  CreateElement,
  CreateText,
  SetAttribute,
  RemoveAttribute,
  SetText,
  InsertBefore,
  RemoveChild,
  ReplaceChild,
  AddListener,
  RemoveListener,
};

enum class OpCategory : std::uint8_t { Structural, Attribute, Text, Listener };

inline OpCategory category_of(DomOpKind kind) {
  switch (kind) {
    case DomOpKind::CreateElement:
    case DomOpKind::CreateText:
    case DomOpKind::InsertBefore:
    case DomOpKind::RemoveChild:
    case DomOpKind::ReplaceChild: return OpCategory::Structural;
    case DomOpKind::SetAttribute:
    case DomOpKind::RemoveAttribute: return OpCategory::Attribute;
    case DomOpKind::SetText: return OpCategory::Text;
    case DomOpKind::AddListener:
    case DomOpKind::RemoveListener: return OpCategory::Listener;
  }
  return OpCategory::Structural;
}

inline std::string_view to_string(DomOpKind kind) {
  switch (kind) {
    case DomOpKind::CreateElement: return "CreateElement";
    case DomOpKind::CreateText: return "CreateText";
    case DomOpKind::SetAttribute: return "SetAttribute";
    case DomOpKind::RemoveAttribute: return "RemoveAttribute";
    case DomOpKind::SetText: return "SetText";
    case DomOpKind::InsertBefore: return "InsertBefore";
    case DomOpKind::RemoveChild: return "RemoveChild";
    case DomOpKind::ReplaceChild: return "ReplaceChild";
    case DomOpKind::AddListener: return "AddListener";
    case DomOpKind::RemoveListener: return "RemoveListener";
  }
  return "?";
}

inline std::string_view to_string(OpCategory c) {
  switch (c) {
    case OpCategory::Structural: return "structural";
    case OpCategory::Attribute: return "attribute";
    case OpCategory::Text: return "text";
    case OpCategory::Listener: return "listener";
  }
  return "?";
}

struct DomOp {
  DomOpKind kind;
  NodeId node = 0;
  NodeId parent = 0;
  std::size_t index = 0;
  std::string name;
  std::string value;
  bool move_half = false;  // one of the two physical ops of a logical move

  OpCategory category() const { return category_of(kind); }
};

struct DomCounters {
  std::uint64_t structural = 0;
  std::uint64_t attribute = 0;
  std::uint64_t text = 0;
  std::uint64_t listener = 0;
  std::uint64_t creates = 0;
  std::uint64_t inserts = 0;   // excluding move halves
  std::uint64_t removes = 0;   // excluding move halves
  std::uint64_t replaces = 0;
  std::uint64_t moves = 0;     // logical moves (remove + insert pairs)

  std::uint64_t total() const { return structural + attribute + text + listener; }

  DomCounters operator-(const DomCounters& o) const {
    return {structural - o.structural, attribute - o.attribute, text - o.text,
            listener - o.listener,     creates - o.creates,     inserts - o.inserts,
            removes - o.removes,       replaces - o.replaces,   moves - o.moves};
  }
  bool operator==(const DomCounters&) const = default;
};

inline Json to_json(const DomCounters& c) {
  return Json{{"structural", c.structural}, {"attribute", c.attribute}, {"text", c.text},
              {"listener", c.listener},     {"creates", c.creates},     {"inserts", c.inserts},
              {"removes", c.removes},       {"replaces", c.replaces},   {"moves", c.moves}};
}

inline Json to_json(const DomOp& op) {
  Json j{{"kind", std::string(to_string(op.kind))},
         {"category", std::string(to_string(op.category()))},
         {"node", op.node}};
  switch (op.kind) {
    case DomOpKind::InsertBefore:
    case DomOpKind::RemoveChild:
    case DomOpKind::ReplaceChild:
      j["parent"] = op.parent;
      j["index"] = op.index;
      break;
    default: break;
  }
  if (!op.name.empty()) j["name"] = op.name;
  if (!op.value.empty()) j["value"] = op.value;
  if (op.move_half) j["move"] = true;
  return j;
}

class Document;

class DomNode {
 public:
  NodeId id() const noexcept { return id_; }
  bool is_text() const noexcept { return text_node_; }
  const std::string& tag() const noexcept { return tag_; }
  // Content of a text node, or the text slot of an element.
  const std::string& text() const noexcept { return text_; }
  const Props& attrs() const noexcept { return attrs_; }
  std::size_t child_count() const noexcept { return children_.size(); }
  const DomNode& child(std::size_t i) const { return *children_.at(i); }
  DomNode& child(std::size_t i) { return *children_.at(i); }
  const DomNode* parent() const noexcept { return parent_; }

  std::vector<std::uint64_t> listeners() const {
    std::vector<std::uint64_t> out;
    for (const auto& [name, value] : attrs_) {
      if (const auto* ev = std::get_if<EventRef>(&value)) out.push_back(ev->handler);
    }
    return out;
  }

 private:
  friend class Document;

  NodeId id_ = 0;
  bool text_node_ = false;
  std::string tag_;
  std::string text_;
  Props attrs_;
  std::vector<std::unique_ptr<DomNode>> children_;
  DomNode* parent_ = nullptr;
};

// Owns one rendered tree and the append-only log of every mutation made to
// it. Single-owner; not thread-safe.
class Document {
 public:
  Document() = default;
  Document(const Document&) = delete;
  Document& operator=(const Document&) = delete;

  std::unique_ptr<DomNode> create_element(std::string tag) {
    auto node = std::make_unique<DomNode>();
    node->id_ = next_id_++;
    node->tag_ = std::move(tag);
    record({DomOpKind::CreateElement, node->id_, 0, 0, node->tag_, {}});
    return node;
  }

  std::unique_ptr<DomNode> create_text(std::string content) {
    auto node = std::make_unique<DomNode>();
    node->id_ = next_id_++;
    node->text_node_ = true;
    node->text_ = std::move(content);
    record({DomOpKind::CreateText, node->id_, 0, 0, {}, node->text_});
    return node;
  }

  // Event values attach a listener; anything else becomes an attribute. A
  // value of the other kind under the same name is detached first.
  void set_attribute(DomNode& node, const std::string& name, const PropValue& value) {
    expect_element(node, "set_attribute");
    if (const PropValue* prev = node.attrs_.find(name)) {
      if (is_event(*prev)) {
        record({DomOpKind::RemoveListener, node.id_, 0, 0, name,
                std::to_string(std::get<EventRef>(*prev).handler)});
      } else if (is_event(value)) {
        record({DomOpKind::RemoveAttribute, node.id_, 0, 0, name, {}});
      }
    }
    if (const auto* ev = std::get_if<EventRef>(&value)) {
      record({DomOpKind::AddListener, node.id_, 0, 0, name, std::to_string(ev->handler)});
    } else {
      record({DomOpKind::SetAttribute, node.id_, 0, 0, name, attribute_text(value)});
    }
    node.attrs_.set(name, value);
  }

  void remove_attribute(DomNode& node, const std::string& name) {
    expect_element(node, "remove_attribute");
    const PropValue* prev = node.attrs_.find(name);
    if (prev == nullptr) throw PatchPathError("remove of absent attribute '" + name + "'");
    if (is_event(*prev)) {
      record({DomOpKind::RemoveListener, node.id_, 0, 0, name,
              std::to_string(std::get<EventRef>(*prev).handler)});
    } else {
      record({DomOpKind::RemoveAttribute, node.id_, 0, 0, name, {}});
    }
    node.attrs_.erase(name);
  }

  void set_text(DomNode& node, std::string content) {
    record({DomOpKind::SetText, node.id_, 0, 0, {}, content});
    if (!node.text_node_) {
      for (auto& c : node.children_) c->parent_ = nullptr;
      node.children_.clear();
    }
    node.text_ = std::move(content);
  }

  void insert_before(DomNode& parent, std::size_t index, std::unique_ptr<DomNode> child,
                     bool move_half = false) {
    expect_element(parent, "insert_before");
    if (index > parent.children_.size()) throw PatchPathError("insert index out of range");
    if (!parent.text_.empty()) throw PatchPathError("insert into an element holding a text slot");
    DomOp op{DomOpKind::InsertBefore, child->id_, parent.id_, index, {}, {}};
    op.move_half = move_half;
    record(std::move(op));
    child->parent_ = &parent;
    parent.children_.insert(parent.children_.begin() + static_cast<std::ptrdiff_t>(index), std::move(child));
  }

  std::unique_ptr<DomNode> remove_child(DomNode& parent, std::size_t index, bool move_half = false) {
    expect_element(parent, "remove_child");
    if (index >= parent.children_.size()) throw PatchPathError("remove index out of range");
    auto it = parent.children_.begin() + static_cast<std::ptrdiff_t>(index);
    std::unique_ptr<DomNode> child = std::move(*it);
    parent.children_.erase(it);
    child->parent_ = nullptr;
    DomOp op{DomOpKind::RemoveChild, child->id_, parent.id_, index, {}, {}};
    op.move_half = move_half;
    record(std::move(op));
    return child;
  }

  void move_child(DomNode& parent, std::size_t from, std::size_t to) {
    auto child = remove_child(parent, from, true);
    insert_before(parent, to, std::move(child), true);
    ++counters_.moves;
  }

  std::unique_ptr<DomNode> replace_child(DomNode& parent, std::size_t index, std::unique_ptr<DomNode> child) {
    expect_element(parent, "replace_child");
    if (index >= parent.children_.size()) throw PatchPathError("replace index out of range");
    record({DomOpKind::ReplaceChild, child->id_, parent.id_, index, {}, {}});
    child->parent_ = &parent;
    std::swap(parent.children_[index], child);
    child->parent_ = nullptr;
    return child;
  }

  // Attaches `node` as the document root, detaching any previous root.
  std::unique_ptr<DomNode> mount(std::unique_ptr<DomNode> node) {
    DomOpKind kind = root_ ? DomOpKind::ReplaceChild : DomOpKind::InsertBefore;
    record({kind, node->id_, kDocumentId, 0, {}, {}});
    std::swap(root_, node);
    return node;
  }

  DomNode* root() noexcept { return root_.get(); }
  const DomNode* root() const noexcept { return root_.get(); }

  const std::vector<DomOp>& log() const noexcept { return log_; }
  const DomCounters& counters() const noexcept { return counters_; }

  static std::string attribute_text(const PropValue& value) {
    if (const auto* s = std::get_if<std::string>(&value)) return *s;
    if (const auto* b = std::get_if<bool>(&value)) return *b ? "true" : "false";
    if (const auto* d = std::get_if<double>(&value)) return format_number(*d);
    return std::to_string(std::get<EventRef>(value).handler);
  }

 private:
  static void expect_element(const DomNode& node, const char* what) {
    if (node.text_node_) throw PatchPathError(std::string(what) + " on a text node");
  }

  void record(DomOp op) {
    switch (op.category()) {
      case OpCategory::Structural: ++counters_.structural; break;
      case OpCategory::Attribute: ++counters_.attribute; break;
      case OpCategory::Text: ++counters_.text; break;
      case OpCategory::Listener: ++counters_.listener; break;
    }
    switch (op.kind) {
      case DomOpKind::CreateElement:
      case DomOpKind::CreateText: ++counters_.creates; break;
      case DomOpKind::InsertBefore:
        if (!op.move_half) ++counters_.inserts;
        break;
      case DomOpKind::RemoveChild:
        if (!op.move_half) ++counters_.removes;
        break;
      case DomOpKind::ReplaceChild: ++counters_.replaces; break;
      default: break;
    }
    log_.push_back(std::move(op));
  }

  std::unique_ptr<DomNode> root_;
  std::vector<DomOp> log_;
  DomCounters counters_;
  NodeId next_id_ = 1;
};

// Builds a fresh DOM subtree mirroring `v`. Delta lists are ignored.
inline std::unique_ptr<DomNode> realize(Document& doc, const VNode& v) {
  if (v.is_text()) return doc.create_text(v.text());
  auto el = doc.create_element(v.tag());
  for (const auto& [name, value] : v.props()) doc.set_attribute(*el, name, value);
  if (v.children_elided()) throw PatchPathError("cannot realize an elided child list");
  if (uses_text_slot(v)) {
    doc.set_text(*el, joined_text(v));
    return el;
  }
  std::size_t i = 0;
  for (const VNode& c : v.children()) doc.insert_before(*el, i++, realize(doc, c));
  return el;
}

inline void mount(Document& doc, const VNode& v) {
  doc.mount(realize(doc, v));
}

namespace detail {

inline DomNode& resolve(Document& doc, const Path& path) {
  DomNode* node = doc.root();
  if (node == nullptr) throw PatchPathError("document has no root");
  for (std::size_t index : path) {
    if (node->is_text() || index >= node->child_count()) {
      throw PatchPathError("unresolvable patch path");
    }
    node = &node->child(index);
  }
  return *node;
}

inline DomNode& resolve_parent(Document& doc, const Path& path) {
  DomNode& node = resolve(doc, path);
  if (node.is_text()) throw PatchPathError("patch path names a text node where an element was expected");
  return node;
}

}  // namespace detail

// Second pass: applies a patch strictly in list order. Never reads the log.
inline void apply_patch(Document& doc, std::span<const PatchOp> patch) {
  for (const PatchOp& patch_op : patch) {
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, op::Replace>) {
            auto fresh = realize(doc, o.node);
            if (o.path.empty()) {
              detail::resolve(doc, o.path);
              doc.mount(std::move(fresh));
            } else {
              Path parent_path(o.path.begin(), o.path.end() - 1);
              DomNode& parent = detail::resolve_parent(doc, parent_path);
              if (o.path.back() >= parent.child_count()) throw PatchPathError("replace index out of range");
              doc.replace_child(parent, o.path.back(), std::move(fresh));
            }
          } else if constexpr (std::is_same_v<T, op::SetText>) {
            doc.set_text(detail::resolve(doc, o.path), o.text);
          } else if constexpr (std::is_same_v<T, op::SetProp>) {
            doc.set_attribute(detail::resolve_parent(doc, o.path), o.name, o.value);
          } else if constexpr (std::is_same_v<T, op::RemoveProp>) {
            doc.remove_attribute(detail::resolve_parent(doc, o.path), o.name);
          } else if constexpr (std::is_same_v<T, op::InsertChild>) {
            DomNode& parent = detail::resolve_parent(doc, o.path);
            if (o.index > parent.child_count()) throw PatchPathError("insert index out of range");
            doc.insert_before(parent, o.index, realize(doc, o.node));
          } else if constexpr (std::is_same_v<T, op::RemoveChild>) {
            doc.remove_child(detail::resolve_parent(doc, o.path), o.index);
          } else {
            DomNode& parent = detail::resolve_parent(doc, o.path);
            if (o.from >= parent.child_count() || o.to >= parent.child_count()) {
              throw PatchPathError("move index out of range");
            }
            doc.move_child(parent, o.from, o.to);
          }
        },
        patch_op);
  }
}

namespace detail {

inline void escape_into(std::string& out, std::string_view s, bool attribute) {
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"':
        if (attribute) {
          out += "&quot;";
          break;
        }
        [[fallthrough]];
      default: out += c;
    }
  }
}

inline void serialize_into(std::string& out, const DomNode& node) {
  if (node.is_text()) {
    escape_into(out, node.text(), false);
    return;
  }
  out += '<';
  out += node.tag();
  for (const auto& [name, value] : node.attrs()) {
    out += ' ';
    out += name;
    if (const auto* s = std::get_if<std::string>(&value)) {
      out += "=\"";
      escape_into(out, *s, true);
      out += '"';
    } else if (const auto* ev = std::get_if<EventRef>(&value)) {
      out += "=@";
      out += std::to_string(ev->handler);
    } else {
      out += "={";
      out += Document::attribute_text(value);
      out += '}';
    }
  }
  out += '>';
  escape_into(out, node.text(), false);
  for (std::size_t i = 0; i < node.child_count(); ++i) serialize_into(out, node.child(i));
  out += "</";
  out += node.tag();
  out += '>';
}

}  // namespace detail

// Deterministic HTML-like text: attributes in insertion order, explicit close
// tags everywhere, no inserted whitespace. Non-string attribute values are
// written as {value} and listeners as @handler so distinct props stay distinct.
inline std::string serialize(const DomNode& node) {
  std::string out;
  detail::serialize_into(out, node);
  return out;
}

inline std::string serialize(const Document& doc) {
  return doc.root() ? serialize(*doc.root()) : std::string();
}

}  // namespace vdomc
