#pragma once

// Run specification: one JSON document collecting input, geo features,
// discretization rules, learning settings and output locations. Documents are
// checked against docs/runspec.schema.json before anything runs. Relative
// paths resolve against the directory of the spec file.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bnlab/bundle.hpp"
#include "bnlab/data.hpp"
#include "bnlab/learn.hpp"
#include "bnlab/spatial.hpp"

namespace bnlab::api {

/// Errors of `doc` against a JSON Schema subset (type, enum, required,
/// properties, additionalProperties, items, min/maxItems, minLength,
/// maxLength, minimum, maximum, exclusiveMinimum). Each error starts with a
/// JSON pointer to the offending value.
std::vector<std::string> schema_errors(const Json& doc, const Json& schema);

/// The published run-spec schema.
const Json& runspec_schema();

struct GeoSettings {
  std::filesystem::path layers;
  spatial::CoordinateColumns coordinates;
  std::optional<std::string> boundary;
  std::vector<spatial::FeatureSpec> features;
};

struct NamedConstraints {
  std::vector<std::string> no_outgoing;
  std::vector<std::pair<std::string, std::string>> forbidden;
  std::vector<std::pair<std::string, std::string>> required;

  /// Throws SchemaError on names missing from `nodes` or a required arc that
  /// is also prohibited, StructuralError when the required arcs form a cycle.
  learn::Constraints resolve(const std::vector<std::string>& nodes) const;
};

struct RunSpec {
  std::filesystem::path base_dir;
  std::filesystem::path input;
  char delimiter = ',';
  std::optional<GeoSettings> geo;
  data::DiscretizationSpec discretize;

  learn::LearnConfig learn;  // constraints filled in by resolve()
  learn::BootstrapConfig bootstrap;
  double alpha = 1.0;
  NamedConstraints constraints;

  std::filesystem::path dataset_out;
  std::filesystem::path encoding_out;
  std::filesystem::path bundle_out;
  std::filesystem::path edges_out;
  std::optional<std::filesystem::path> scenarios;

  Json document;  // the validated source, used for the config hash

  /// FNV-1a over the canonical text of the settings that shape the model
  /// (discretize, geo and learn sections) followed by the data digest, as 16
  /// hex digits.
  std::string config_hash(std::string_view data_digest) const;
};

/// Throws SchemaError carrying every schema violation, one per line.
RunSpec parse_runspec(const Json& doc, const std::filesystem::path& base_dir);
RunSpec load_runspec(const std::filesystem::path& path);

}  // namespace bnlab::api
