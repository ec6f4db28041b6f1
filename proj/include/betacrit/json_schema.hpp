#pragma once

// Validator for the JSON-Schema subset used by the shipped schemas: type,
// properties, required, additionalProperties (boolean), enum, minimum,
// maximum, exclusiveMinimum, exclusiveMaximum, items, minItems, maxItems and
// local "$ref": "#/$defs/<name>".

#include <json.hpp>

#include <optional>
#include <string>

namespace betacrit::schema {

using nlohmann::json;

struct Violation {
  std::string path; // dotted field path, e.g. numerics.tol
  std::string message;
};

namespace detail {

inline bool has_type(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "number") return v.is_number();
  if (t == "integer") return v.is_number_integer() || (v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>())));
  return false;
}

inline std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

inline const json& resolve(const json& root, const json& node) {
  if (!node.contains("$ref")) return node;
  const std::string ref = node["$ref"].get<std::string>();
  const std::string prefix = "#/$defs/";
  if (ref.rfind(prefix, 0) != 0) throw std::invalid_argument("unsupported schema reference " + ref);
  return root.at("$defs").at(ref.substr(prefix.size()));
}

inline std::optional<Violation> check(const json& root, const json& node_in, const json& v, const std::string& path) {
  const json& node = resolve(root, node_in);
  const std::string where = path.empty() ? "(root)" : path;
  if (node.contains("type")) {
    bool ok = false;
    if (node["type"].is_array()) {
      for (const auto& t : node["type"]) ok = ok || has_type(v, t.get<std::string>());
    } else {
      ok = has_type(v, node["type"].get<std::string>());
    }
    if (!ok) return Violation{where, "expected type " + node["type"].dump()};
  }
  if (node.contains("enum")) {
    bool found = false;
    for (const auto& e : node["enum"]) found = found || e == v;
    if (!found) return Violation{where, "value must be one of " + node["enum"].dump()};
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (node.contains("minimum") && x < node["minimum"].get<double>())
      return Violation{where, "must be >= " + node["minimum"].dump()};
    if (node.contains("maximum") && x > node["maximum"].get<double>())
      return Violation{where, "must be <= " + node["maximum"].dump()};
    if (node.contains("exclusiveMinimum") && !(x > node["exclusiveMinimum"].get<double>()))
      return Violation{where, "must be > " + node["exclusiveMinimum"].dump()};
    if (node.contains("exclusiveMaximum") && !(x < node["exclusiveMaximum"].get<double>()))
      return Violation{where, "must be < " + node["exclusiveMaximum"].dump()};
  }
  if (v.is_array()) {
    if (node.contains("minItems") && v.size() < node["minItems"].get<std::size_t>())
      return Violation{where, "needs at least " + node["minItems"].dump() + " items"};
    if (node.contains("maxItems") && v.size() > node["maxItems"].get<std::size_t>())
      return Violation{where, "allows at most " + node["maxItems"].dump() + " items"};
    if (node.contains("items"))
      for (std::size_t i = 0; i < v.size(); ++i)
        if (auto bad = check(root, node["items"], v[i], path + "[" + std::to_string(i) + "]")) return bad;
  }
  if (v.is_object()) {
    if (node.contains("required"))
      for (const auto& r : node["required"])
        if (!v.contains(r.get<std::string>())) return Violation{join(path, r.get<std::string>()), "is required"};
    const json props = node.value("properties", json::object());
    const bool closed = node.contains("additionalProperties") && node["additionalProperties"].is_boolean() &&
                        !node["additionalProperties"].get<bool>();
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (props.contains(it.key())) {
        if (auto bad = check(root, props[it.key()], it.value(), join(path, it.key()))) return bad;
      } else if (closed) {
        return Violation{join(path, it.key()), "unknown key"};
      }
    }
  }
  return std::nullopt;
}

} // namespace detail

/// First violation of `value` against `schema`, or nullopt when valid.
inline std::optional<Violation> validate(const json& schema, const json& value) {
  return detail::check(schema, schema, value, "");
}

} // namespace betacrit::schema
