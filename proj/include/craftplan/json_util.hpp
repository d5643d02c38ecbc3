#pragma once

#include <fstream>
#include <string>

#include "craftplan/error.hpp"
#include "json.hpp"

namespace craftplan {

using json = nlohmann::json;

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SchemaError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << body;
}

// Canonical dump: 2-space indent and a trailing newline. nlohmann::json keeps
// object keys sorted (std::map), so equal values serialize to equal bytes.
inline std::string canonical_dump(const json& j) { return j.dump(2) + "\n"; }

inline void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, canonical_dump(j));
}

// Fetchers with structural error messages; nlohmann's own errors lack context.
inline const json& require_field(const json& j, const std::string& key,
                                 const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(where + ": missing field '" + key + "'");
  return *it;
}

inline std::string require_string(const json& j, const std::string& key,
                                  const std::string& where) {
  const json& v = require_field(j, key, where);
  if (!v.is_string()) throw SchemaError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace craftplan
