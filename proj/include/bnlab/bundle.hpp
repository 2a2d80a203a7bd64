#pragma once

// Self-contained model file: network, discretization state, bootstrap edge
// tallies and provenance. Numbers are written as shortest round-trip decimals,
// so a loaded bundle reproduces every CPT entry bit for bit.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bnlab/core.hpp"
#include "bnlab/data.hpp"
#include "bnlab/learn.hpp"

namespace bnlab::api {

using Json = nlohmann::ordered_json;

inline constexpr int kBundleSchemaVersion = 1;

struct EdgeFrequency {
  std::string parent;  // majority orientation
  std::string child;
  double frequency = 0.0;           // undirected, fraction of replicates
  double direction_fraction = 0.0;  // share of appearances oriented parent -> child
  std::size_t forward = 0;          // replicates with parent -> child
  std::size_t backward = 0;         // replicates with child -> parent
};

struct Provenance {
  std::uint64_t seed = 0;
  std::string config_hash;  // 16 hex digits
  std::string data_digest;  // 16 hex digits over the encoded dataset text
  std::size_t replicates = 0;
  double threshold = 0.5;
  std::optional<std::string> created;  // only when a timestamp was requested
  Json extra = Json::object();
};

struct ModelBundle {
  int schema_version = kBundleSchemaVersion;
  BayesianNetwork network;
  std::vector<std::string> groups;  // parallel to network variables, may be empty strings
  std::vector<data::BinEdges> bin_edges;
  std::map<std::string, std::map<std::string, std::string>> rank_maps;
  std::vector<EdgeFrequency> edges;
  Provenance provenance;
  Json extra = Json::object();  // unknown top-level fields, preserved verbatim

  /// Undirected bootstrap frequency of {a, b}; nullopt when never observed.
  std::optional<double> edge_frequency(const std::string& a, const std::string& b) const;
};

std::vector<EdgeFrequency> edge_frequencies(const learn::BootstrapResult& result);

Json to_json(const ModelBundle& bundle);
ModelBundle bundle_from_json(const Json& j);

void save_bundle(const ModelBundle& bundle, std::ostream& out);
void save_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle load_bundle(std::istream& in);
ModelBundle load_bundle(const std::string& path);

/// Encoding (variables, groups, bin edges, rank maps) as JSON, for the
/// discretize -> learn hand-off.
Json encoding_to_json(const data::Encoding& enc);
data::Encoding encoding_from_json(const Json& j);

}  // namespace bnlab::api
