#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rhop/graph.hpp"

namespace rhop {

/// Per-edge origin tag on rewired graphs. Serialized as 0/1/2.
enum class Provenance : std::uint8_t { original = 0, hop_added = 1, cls = 2 };

enum class PeKind { shortest, adjacency, spectral };

/// Serialized names: "short", "adj", "lp".
std::string to_string(PeKind kind);
PeKind pe_kind_from_string(const std::string& name);

struct RewireMeta {
  int r = 1;
  std::optional<int> cls_node;
  friend bool operator==(const RewireMeta&, const RewireMeta&) = default;
};

struct PeMeta {
  std::optional<int> r;       // edge encodings
  std::optional<int> q;       // spectral
  std::optional<int> padded;  // spectral zero-padding width
  friend bool operator==(const PeMeta&, const PeMeta&) = default;
};

/// One JSONL record: a graph plus whatever pipeline stages have attached.
struct DatasetRecord {
  AttributedGraph graph;
  std::optional<std::vector<Provenance>> edge_provenance;
  std::optional<RewireMeta> rewire_meta;
  std::optional<PeKind> pe_kind;
  std::optional<std::vector<std::vector<std::int64_t>>> edge_pe;
  std::optional<std::vector<std::vector<double>>> node_pe;
  std::optional<PeMeta> pe_meta;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

/// A dataset file: optional generator-metadata header line plus records.
struct DatasetFile {
  std::optional<std::string> gen_meta_json;  // compact JSON text of the header object
  std::vector<DatasetRecord> records;
};

/// Reads plain attributed graphs, dropping extension fields. Errors name the
/// offending line and invariant. A gen_meta header line is skipped.
std::vector<AttributedGraph> load_dataset(const std::filesystem::path& path);

/// Writes plain graphs, one JSON object per line, atomically
/// (temp file + rename). Reals keep full round-trip precision.
void save_dataset(const std::vector<AttributedGraph>& graphs, const std::filesystem::path& path);

/// Full-fidelity load/save including extension fields and the gen_meta header.
DatasetFile load_records(const std::filesystem::path& path);
void save_records(const DatasetFile& file, const std::filesystem::path& path);

nlohmann::json record_to_json(const DatasetRecord& record);
DatasetRecord record_from_json(const nlohmann::json& obj, const std::string& context = {});

}  // namespace rhop
