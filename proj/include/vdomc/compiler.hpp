#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "vdomc/error.hpp"
#include "vdomc/template.hpp"
#include "vdomc/vnode.hpp"
#include "vdomc/vnode_json.hpp"

namespace vdomc {

struct Instr;
using InstrList = std::vector<Instr>;

namespace instr {

struct MakeEl {
  std::string tag;
  Props static_props;
  std::vector<std::pair<std::string, StatePath>> dyn_props;
  InstrList children;
  Flag flag = Flag::AnyChildren;
  std::optional<std::string> static_key;
  std::optional<StatePath> key_path;
};

struct MakeText {
  std::string text;
};

struct ReadText {
  StatePath path;
};

struct UseHoisted {
  std::size_t id;
};

// Body is a single MakeEl; each instance is keyed by item.key_path.
struct ForEach {
  StatePath list_path;
  std::string item_name;
  StatePath key_path;
  InstrList body;
};

struct Branch {
  StatePath cond_path;
  InstrList then_body;
  InstrList else_body;
};

}  // namespace instr

struct Instr {
  std::variant<instr::MakeEl, instr::MakeText, instr::ReadText, instr::UseHoisted, instr::ForEach, instr::Branch> v;
};

inline constexpr int kModuleVersion = 1;

struct CompiledModule {
  std::vector<VNode> hoisted;  // hoisted[i] is STATIC with hoist_id == i
  Instr program;
  std::string source_hash;
};

struct CompileOptions {
  // Off only for the oracle build that hoisting soundness is checked against.
  bool hoist = true;
};

namespace detail {

class Compiler {
 public:
  Compiler(CompileOptions options, CompiledModule& out) : options_(options), out_(out) {}

  Instr root(const TemplateNode& node) { return emit(node, false); }

 private:
  Instr emit(const TemplateNode& node, bool each_root) {
    return std::visit(
        [&](const auto& n) -> Instr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ElementT>) {
            if (options_.hoist && node.is_static && !each_root) {
              const std::size_t id = out_.hoisted.size();
              out_.hoisted.push_back(make_static(build_static(n), id));
              return Instr{instr::UseHoisted{id}};
            }
            return Instr{make_el(n)};
          } else if constexpr (std::is_same_v<T, TextT>) {
            return Instr{instr::MakeText{n.text}};
          } else if constexpr (std::is_same_v<T, HoleT>) {
            return Instr{instr::ReadText{n.path}};
          } else if constexpr (std::is_same_v<T, EachT>) {
            instr::ForEach each{n.list_path, n.item_name, n.key_path, {}};
            each.body.push_back(emit(n.body.front(), true));
            return Instr{std::move(each)};
          } else {
            instr::Branch branch{n.cond_path, {}, {}};
            for (const TemplateNode& c : n.then_body) branch.then_body.push_back(emit(c, false));
            for (const TemplateNode& c : n.else_body) branch.else_body.push_back(emit(c, false));
            return Instr{std::move(branch)};
          }
        },
        node.node);
  }

  instr::MakeEl make_el(const ElementT& el) {
    check_sibling_keys(el);
    instr::MakeEl m;
    m.tag = el.tag;
    for (const auto& [name, value] : el.static_attrs) {
      if (name == "key") {
        m.static_key = value;
      } else {
        m.static_props.set(name, value);
      }
    }
    for (const auto& [name, path] : el.dynamic_attrs) {
      if (name == "key") {
        m.key_path = path;
      } else {
        m.dyn_props.emplace_back(name, path);
      }
    }
    for (const TemplateNode& c : el.children) m.children.push_back(emit(c, false));
    m.flag = compile_flag(m.children);
    return m;
  }

  VNode build_static(const ElementT& el) {
    check_sibling_keys(el);
    ElementInit init;
    init.tag = el.tag;
    for (const auto& [name, value] : el.static_attrs) {
      if (name == "key") {
        init.key = value;
      } else {
        init.props.set(name, value);
      }
    }
    for (const TemplateNode& c : el.children) {
      if (const auto* text = std::get_if<TextT>(&c.node)) {
        init.children.push_back(make_text(text->text));
      } else {
        init.children.push_back(build_static(std::get<ElementT>(c.node)));
      }
    }
    return make_element(std::move(init));
  }

  static void check_sibling_keys(const ElementT& el) {
    std::set<std::string_view> seen;
    for (const TemplateNode& c : el.children) {
      const auto* child = std::get_if<ElementT>(&c.node);
      if (!child) continue;
      for (const auto& [name, value] : child->static_attrs) {
        if (name == "key" && !seen.insert(value).second) {
          throw DuplicateStaticKey("duplicate literal key '" + value + "' under <" + el.tag + "> at " +
                                   std::to_string(c.line) + ":" + std::to_string(c.column));
        }
      }
    }
  }

  // infer_flag over compile-time shapes: a list of only loops and keyed
  // elements is keyed; a list of only literal text and holes is text.
  Flag compile_flag(const InstrList& children) const {
    if (children.empty()) return Flag::NoChildren;
    bool text = true;
    bool keyed = true;
    for (const Instr& c : children) {
      const bool is_text = std::holds_alternative<instr::MakeText>(c.v) || std::holds_alternative<instr::ReadText>(c.v);
      bool is_keyed = std::holds_alternative<instr::ForEach>(c.v);
      if (const auto* el = std::get_if<instr::MakeEl>(&c.v)) is_keyed = el->static_key || el->key_path;
      if (const auto* h = std::get_if<instr::UseHoisted>(&c.v)) is_keyed = out_.hoisted[h->id].key().has_value();
      text = text && is_text;
      keyed = keyed && is_keyed;
    }
    if (text) return Flag::OnlyTextChildren;
    if (keyed) return Flag::OnlyKeyedChildren;
    return Flag::AnyChildren;
  }

  CompileOptions options_;
  CompiledModule& out_;
};

}  // namespace detail

// Flattens the analyzed template into an instruction tree. Maximal static
// element subtrees become shared module-level constants; a fully static
// template hoists its root. Deterministic in the source text.
inline CompiledModule compile(const TemplateAst& ast, CompileOptions options = {}) {
  CompiledModule out;
  out.source_hash = ast.source_hash;
  try {
    out.program = detail::Compiler(options, out).root(ast.root);
  } catch (const DuplicateKey& e) {
    throw DuplicateStaticKey(e.what());
  }
  return out;
}

inline CompiledModule compile_source(std::string_view source, CompileOptions options = {}) {
  TemplateAst ast = parse(source);
  analyze(ast);
  return compile(ast, options);
}

// ---------------------------------------------------------------------------
// Serialized form.

inline Json to_json(const Instr& in);

inline Json to_json(const InstrList& list) {
  Json j = Json::array();
  for (const Instr& i : list) j.push_back(to_json(i));
  return j;
}

inline Json to_json(const Instr& in) {
  return std::visit(
      [](const auto& n) -> Json {
        using T = std::decay_t<decltype(n)>;
        Json j;
        if constexpr (std::is_same_v<T, instr::MakeEl>) {
          j["op"] = "mkel";
          j["tag"] = n.tag;
          Json props = Json::object();
          for (const auto& [name, value] : n.static_props) props[name] = prop_to_json(value);
          j["props"] = std::move(props);
          Json dyn = Json::array();
          for (const auto& [name, path] : n.dyn_props) dyn.push_back(Json::array({name, path.str()}));
          j["dyn"] = std::move(dyn);
          if (n.static_key) j["key"] = *n.static_key;
          if (n.key_path) j["keypath"] = n.key_path->str();
          j["flag"] = std::string(to_string(n.flag));
          j["children"] = to_json(n.children);
        } else if constexpr (std::is_same_v<T, instr::MakeText>) {
          j["op"] = "mktext";
          j["s"] = n.text;
        } else if constexpr (std::is_same_v<T, instr::ReadText>) {
          j["op"] = "readtext";
          j["path"] = n.path.str();
        } else if constexpr (std::is_same_v<T, instr::UseHoisted>) {
          j["op"] = "hoist";
          j["id"] = n.id;
        } else if constexpr (std::is_same_v<T, instr::ForEach>) {
          j["op"] = "each";
          j["path"] = n.list_path.str();
          j["as"] = n.item_name;
          j["key"] = n.key_path.str();
          j["body"] = to_json(n.body.front());
        } else {
          j["op"] = "if";
          j["path"] = n.cond_path.str();
          j["then"] = to_json(n.then_body);
          j["else"] = to_json(n.else_body);
        }
        return j;
      },
      in.v);
}

inline Json to_json(const CompiledModule& m) {
  Json j;
  j["version"] = kModuleVersion;
  j["source_hash"] = m.source_hash;
  Json hoisted = Json::array();
  for (const VNode& v : m.hoisted) hoisted.push_back(to_json(v));
  j["hoisted"] = std::move(hoisted);
  j["program"] = to_json(m.program);
  return j;
}

inline std::string emit(const CompiledModule& m) { return to_json(m).dump(2) + "\n"; }

// Structural module equality (via the canonical serialized form).
inline bool module_eq(const CompiledModule& a, const CompiledModule& b) { return to_json(a) == to_json(b); }

namespace detail {

inline StatePath require_path(const Json& j, const char* field, bool allow_empty = false) {
  StatePath p = StatePath::parse(require_string(j, field));
  if (!allow_empty && p.segments.empty()) throw MalformedModule(std::string("empty path in '") + field + "'");
  for (const std::string& s : p.segments) {
    if (s.empty()) throw MalformedModule("malformed path '" + require_string(j, field) + "'");
  }
  return p;
}

inline InstrList instr_list_from_json(const Json& j, std::size_t hoisted, std::size_t depth);

inline Instr instr_from_json(const Json& j, std::size_t hoisted, std::size_t depth) {
  if (depth > 512) throw MalformedModule("program nesting too deep");
  const std::string name = require_string(j, "op");
  if (name == "mkel") {
    instr::MakeEl m;
    m.tag = require_string(j, "tag");
    if (!valid_tag(m.tag)) throw MalformedModule("invalid tag '" + m.tag + "'");
    const Json& props = require(j, "props");
    if (!props.is_object()) throw MalformedModule("props must be an object");
    for (auto it = props.begin(); it != props.end(); ++it) m.static_props.set(it.key(), prop_from_json(it.value()));
    const Json& dyn = require(j, "dyn");
    if (!dyn.is_array()) throw MalformedModule("dyn must be an array");
    for (const Json& d : dyn) {
      if (!d.is_array() || d.size() != 2 || !d[0].is_string() || !d[1].is_string()) {
        throw MalformedModule("dyn entries are [name, path] pairs");
      }
      Json wrapper{{"p", d[1]}};
      m.dyn_props.emplace_back(d[0].get<std::string>(), require_path(wrapper, "p"));
    }
    if (j.contains("key")) m.static_key = require_string(j, "key");
    if (j.contains("keypath")) m.key_path = require_path(j, "keypath");
    const std::string flag = require_string(j, "flag");
    auto f = flag_from_string(flag);
    if (!f || *f == Flag::Static) throw MalformedModule("bad instruction flag '" + flag + "'");
    m.flag = *f;
    m.children = instr_list_from_json(require(j, "children"), hoisted, depth + 1);
    return Instr{std::move(m)};
  }
  if (name == "mktext") return Instr{instr::MakeText{require_string(j, "s")}};
  if (name == "readtext") return Instr{instr::ReadText{require_path(j, "path")}};
  if (name == "hoist") {
    const std::size_t id = require_index(j, "id");
    if (id >= hoisted) throw MalformedModule("hoisted reference out of range");
    return Instr{instr::UseHoisted{id}};
  }
  if (name == "each") {
    instr::ForEach each;
    each.list_path = require_path(j, "path");
    each.item_name = require_string(j, "as");
    each.key_path = require_path(j, "key", true);
    each.body.push_back(instr_from_json(require(j, "body"), hoisted, depth + 1));
    if (!std::holds_alternative<instr::MakeEl>(each.body.front().v)) {
      throw MalformedModule("each body must be an element instruction");
    }
    return Instr{std::move(each)};
  }
  if (name == "if") {
    instr::Branch branch;
    branch.cond_path = require_path(j, "path");
    branch.then_body = instr_list_from_json(require(j, "then"), hoisted, depth + 1);
    branch.else_body = instr_list_from_json(require(j, "else"), hoisted, depth + 1);
    return Instr{std::move(branch)};
  }
  throw MalformedModule("unknown instruction '" + name + "'");
}

inline InstrList instr_list_from_json(const Json& j, std::size_t hoisted, std::size_t depth) {
  if (!j.is_array()) throw MalformedModule("instruction list must be an array");
  InstrList out;
  for (const Json& i : j) out.push_back(instr_from_json(i, hoisted, depth));
  return out;
}

}  // namespace detail

inline CompiledModule load(std::string_view bytes) {
  Json j = Json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded()) throw MalformedModule("module is not valid JSON");
  if (!j.is_object()) throw MalformedModule("module must be a JSON object");
  const Json& version = detail::require(j, "version");
  if (!version.is_number_integer()) throw MalformedModule("version must be an integer");
  if (version.get<long long>() != kModuleVersion) {
    throw VersionMismatch("module version " + version.dump() + ", expected " + std::to_string(kModuleVersion));
  }
  CompiledModule m;
  m.source_hash = detail::require_string(j, "source_hash");
  const Json& hoisted = detail::require(j, "hoisted");
  if (!hoisted.is_array()) throw MalformedModule("hoisted must be an array");
  for (const Json& h : hoisted) {
    VNode v = vnode_from_json(h);
    if (v.is_text() || v.flag() != Flag::Static || v.hoist_id() != m.hoisted.size()) {
      throw MalformedModule("hoisted entry " + std::to_string(m.hoisted.size()) + " is not a STATIC constant with its index");
    }
    m.hoisted.push_back(std::move(v));
  }
  m.program = detail::instr_from_json(detail::require(j, "program"), m.hoisted.size(), 0);
  return m;
}

}  // namespace vdomc
