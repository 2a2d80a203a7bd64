#include <cmath>

#include "bnlab/runspec.hpp"

namespace bnlab::api {

namespace {

bool has_type(const Json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "number") return v.is_number();
  if (t == "integer")
    return v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
  return false;
}

std::string escape(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

void check(const Json& v, const Json& s, const std::string& at, std::vector<std::string>& errs) {
  const std::string where = at.empty() ? "/" : at;
  if (s.contains("type")) {
    const auto& t = s.at("type");
    bool ok = false;
    if (t.is_string()) {
      ok = has_type(v, t.get<std::string>());
    } else {
      for (const auto& x : t) ok = ok || has_type(v, x.get<std::string>());
    }
    if (!ok) {
      errs.push_back(where + ": expected type " + t.dump());
      return;
    }
  }
  if (s.contains("enum")) {
    bool found = false;
    for (const auto& e : s.at("enum")) found = found || e == v;
    if (!found) errs.push_back(where + ": value " + v.dump() + " not one of " + s.at("enum").dump());
  }
  if (v.is_string()) {
    const auto n = v.get<std::string>().size();
    if (s.contains("minLength") && n < s.at("minLength").get<std::size_t>())
      errs.push_back(where + ": string shorter than " + s.at("minLength").dump());
    if (s.contains("maxLength") && n > s.at("maxLength").get<std::size_t>())
      errs.push_back(where + ": string longer than " + s.at("maxLength").dump());
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (s.contains("minimum") && x < s.at("minimum").get<double>())
      errs.push_back(where + ": must be >= " + s.at("minimum").dump());
    if (s.contains("maximum") && x > s.at("maximum").get<double>())
      errs.push_back(where + ": must be <= " + s.at("maximum").dump());
    if (s.contains("exclusiveMinimum") && x <= s.at("exclusiveMinimum").get<double>())
      errs.push_back(where + ": must be > " + s.at("exclusiveMinimum").dump());
  }
  if (v.is_array()) {
    if (s.contains("minItems") && v.size() < s.at("minItems").get<std::size_t>())
      errs.push_back(where + ": needs at least " + s.at("minItems").dump() + " items");
    if (s.contains("maxItems") && v.size() > s.at("maxItems").get<std::size_t>())
      errs.push_back(where + ": allows at most " + s.at("maxItems").dump() + " items");
    if (s.contains("items"))
      for (std::size_t i = 0; i < v.size(); ++i) check(v[i], s.at("items"), at + "/" + std::to_string(i), errs);
  }
  if (v.is_object()) {
    if (s.contains("required"))
      for (const auto& r : s.at("required"))
        if (!v.contains(r.get<std::string>()))
          errs.push_back(where + ": missing required field '" + r.get<std::string>() + "'");
    const Json* props = s.contains("properties") ? &s.at("properties") : nullptr;
    const bool closed = s.contains("additionalProperties") && s.at("additionalProperties") == false;
    for (const auto& [k, x] : v.items()) {
      if (props && props->contains(k))
        check(x, props->at(k), at + "/" + escape(k), errs);
      else if (closed)
        errs.push_back(where + ": unknown field '" + k + "'");
    }
  }
}

}  // namespace

std::vector<std::string> schema_errors(const Json& doc, const Json& schema) {
  std::vector<std::string> errs;
  check(doc, schema, "", errs);
  return errs;
}

const Json& runspec_schema() {
  static const Json schema = Json::parse(
#include "runspec_schema.inc"
  );
  return schema;
}

}  // namespace bnlab::api
