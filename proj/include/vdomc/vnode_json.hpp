#pragma once

#include <charconv>
#include <string>

#include <json.hpp>

#include "vdomc/error.hpp"
#include "vdomc/vnode.hpp"

namespace vdomc {

using Json = nlohmann::ordered_json;

// Shortest decimal string that round-trips to the same double.
inline std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) return "NaN";
  return std::string(buf, end);
}

inline Json prop_to_json(const PropValue& value) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, EventRef>) {
          return Json{{"event", v.handler}};
        } else {
          return Json(v);
        }
      },
      value);
}

inline PropValue prop_from_json(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number()) return j.get<double>();
  if (j.is_object() && j.size() == 1 && j.contains("event") && j["event"].is_number_unsigned()) {
    return EventRef{j["event"].get<std::uint64_t>()};
  }
  throw MalformedModule("bad prop value: " + j.dump());
}

Json to_json(const VNode& v);

inline Json delta_to_json(const DeltaOp& op) {
  Json j;
  switch (op.kind) {
    case DeltaOp::Kind::Insert: j["op"] = "insert"; break;
    case DeltaOp::Kind::Update: j["op"] = "update"; break;
    case DeltaOp::Kind::Remove: j["op"] = "remove"; break;
  }
  j["index"] = op.index;
  if (op.node) j["node"] = to_json(*op.node);
  return j;
}

// Canonical layout: fixed field order, absent optionals omitted.
inline Json to_json(const VNode& v) {
  Json j;
  if (v.is_text()) {
    j["t"] = "text";
    j["s"] = v.text();
    return j;
  }
  j["t"] = "el";
  j["tag"] = v.tag();
  Json props = Json::object();
  for (const auto& [name, value] : v.props()) props[name] = prop_to_json(value);
  j["props"] = std::move(props);
  if (v.key()) j["key"] = *v.key();
  j["flag"] = std::string(to_string(v.flag()));
  if (v.hoist_id()) j["hoist"] = *v.hoist_id();
  if (v.delta()) {
    Json delta = Json::array();
    for (const DeltaOp& op : *v.delta()) delta.push_back(delta_to_json(op));
    j["delta"] = std::move(delta);
  }
  if (v.children_elided()) j["elided"] = true;
  Json children = Json::array();
  for (const VNode& c : v.children()) children.push_back(to_json(c));
  j["children"] = std::move(children);
  return j;
}

namespace detail {

inline const Json& require(const Json& j, const char* field) {
  if (!j.is_object() || !j.contains(field)) {
    throw MalformedModule(std::string("missing field '") + field + "'");
  }
  return j[field];
}

inline std::string require_string(const Json& j, const char* field) {
  const Json& f = require(j, field);
  if (!f.is_string()) throw MalformedModule(std::string("field '") + field + "' must be a string");
  return f.get<std::string>();
}

inline std::size_t require_index(const Json& j, const char* field) {
  const Json& f = require(j, field);
  if (!f.is_number_unsigned()) {
    throw MalformedModule(std::string("field '") + field + "' must be a non-negative integer");
  }
  return f.get<std::size_t>();
}

}  // namespace detail

// Inverse of to_json. Construction goes through make_element, so flag and key
// invariants are re-validated; violations surface as MalformedModule.
inline VNode vnode_from_json(const Json& j) {
  const std::string kind = detail::require_string(j, "t");
  if (kind == "text") return make_text(detail::require_string(j, "s"));
  if (kind != "el") throw MalformedModule("unknown node kind '" + kind + "'");

  ElementInit init;
  init.tag = detail::require_string(j, "tag");
  const Json& props = detail::require(j, "props");
  if (!props.is_object()) throw MalformedModule("props must be an object");
  for (auto it = props.begin(); it != props.end(); ++it) init.props.set(it.key(), prop_from_json(it.value()));
  if (j.contains("key")) init.key = detail::require_string(j, "key");
  const std::string flag = detail::require_string(j, "flag");
  init.flag = flag_from_string(flag);
  if (!init.flag) throw MalformedModule("unknown flag '" + flag + "'");
  if (j.contains("hoist")) init.hoist_id = detail::require_index(j, "hoist");
  if (j.contains("delta")) {
    const Json& delta = j["delta"];
    if (!delta.is_array()) throw MalformedModule("delta must be an array");
    DeltaList ops;
    for (const Json& op : delta) {
      const std::string name = detail::require_string(op, "op");
      const std::size_t index = detail::require_index(op, "index");
      if (name == "remove") {
        ops.push_back(DeltaOp::remove(index));
      } else if (name == "insert" || name == "update") {
        VNode node = vnode_from_json(detail::require(op, "node"));
        ops.push_back(name == "insert" ? DeltaOp::insert(index, node) : DeltaOp::update(index, node));
      } else {
        throw MalformedModule("unknown delta op '" + name + "'");
      }
    }
    init.delta = std::move(ops);
  }
  if (j.contains("elided")) {
    if (!j["elided"].is_boolean()) throw MalformedModule("elided must be a boolean");
    init.elided = j["elided"].get<bool>();
  }
  const Json& children = detail::require(j, "children");
  if (!children.is_array()) throw MalformedModule("children must be an array");
  for (const Json& c : children) init.children.push_back(vnode_from_json(c));
  try {
    return make_element(std::move(init));
  } catch (const MalformedModule&) {
    throw;
  } catch (const Error& e) {
    throw MalformedModule(e.what());
  }
}

}  // namespace vdomc
