#include "rhop/io.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "rhop/errors.hpp"

namespace rhop {

using nlohmann::json;

std::string to_string(PeKind kind) {
  switch (kind) {
    case PeKind::shortest: return "short";
    case PeKind::adjacency: return "adj";
    case PeKind::spectral: return "lp";
  }
  throw std::invalid_argument("unknown PE kind");
}

PeKind pe_kind_from_string(const std::string& name) {
  if (name == "short") return PeKind::shortest;
  if (name == "adj") return PeKind::adjacency;
  if (name == "lp") return PeKind::spectral;
  throw std::invalid_argument("unknown PE kind '" + name + "'");
}

namespace {

json feature_rows_to_json(const std::vector<FeatureVec>& rows) {
  json arr = json::array();
  for (const auto& row : rows) arr.push_back(row);
  return arr;
}

std::vector<FeatureVec> feature_rows_from_json(const json& arr, const std::string& context) {
  if (!arr.is_array()) throw io_error("feature field must be an array of arrays" + context);
  std::vector<FeatureVec> rows;
  rows.reserve(arr.size());
  for (const auto& row : arr) {
    if (!row.is_array()) throw io_error("feature row must be an array" + context);
    rows.push_back(row.get<FeatureVec>());
  }
  return rows;
}

}  // namespace

json record_to_json(const DatasetRecord& record) {
  const AttributedGraph& g = record.graph;
  json obj;
  obj["num_nodes"] = g.num_nodes;
  json edges = json::array();
  for (const Edge& e : g.edges) edges.push_back(json::array({e.u, e.v}));
  obj["edges"] = std::move(edges);
  if (!g.node_features.empty()) obj["node_feat"] = feature_rows_to_json(g.node_features);
  if (!g.edge_features.empty()) obj["edge_feat"] = feature_rows_to_json(g.edge_features);
  if (g.node_labels) obj["node_labels"] = *g.node_labels;
  if (g.graph_label) {
    if (std::holds_alternative<std::int64_t>(*g.graph_label))
      obj["graph_label"] = std::get<std::int64_t>(*g.graph_label);
    else
      obj["graph_label"] = std::get<double>(*g.graph_label);
  }
  if (record.edge_provenance) {
    json prov = json::array();
    for (Provenance p : *record.edge_provenance) prov.push_back(static_cast<int>(p));
    obj["edge_provenance"] = std::move(prov);
  }
  if (record.rewire_meta) {
    json meta;
    meta["r"] = record.rewire_meta->r;
    if (record.rewire_meta->cls_node)
      meta["cls_node"] = *record.rewire_meta->cls_node;
    else
      meta["cls_node"] = nullptr;
    obj["rewire_meta"] = std::move(meta);
  }
  if (record.pe_kind) obj["pe_kind"] = to_string(*record.pe_kind);
  if (record.edge_pe) obj["edge_pe"] = *record.edge_pe;
  if (record.node_pe) obj["node_pe"] = *record.node_pe;
  if (record.pe_meta) {
    json meta;
    if (record.pe_meta->r) meta["r"] = *record.pe_meta->r;
    if (record.pe_meta->q) meta["q"] = *record.pe_meta->q;
    if (record.pe_meta->padded) meta["padded"] = *record.pe_meta->padded;
    obj["pe_meta"] = std::move(meta);
  }
  return obj;
}

DatasetRecord record_from_json(const json& obj, const std::string& context) {
  if (!obj.is_object()) throw io_error("record is not a JSON object" + context);
  DatasetRecord record;
  AttributedGraph& g = record.graph;
  if (!obj.contains("num_nodes") || !obj["num_nodes"].is_number_integer())
    throw io_error("missing integer num_nodes" + context);
  g.num_nodes = obj["num_nodes"].get<int>();
  if (!obj.contains("edges") || !obj["edges"].is_array())
    throw io_error("missing edges array" + context);
  for (const auto& e : obj["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
      throw io_error("edge must be a pair of node indices" + context);
    g.edges.push_back(Edge{e[0].get<int>(), e[1].get<int>()});
  }
  if (obj.contains("node_feat")) g.node_features = feature_rows_from_json(obj["node_feat"], context);
  if (obj.contains("edge_feat")) g.edge_features = feature_rows_from_json(obj["edge_feat"], context);
  if (obj.contains("node_labels")) g.node_labels = obj["node_labels"].get<std::vector<std::int64_t>>();
  if (obj.contains("graph_label")) {
    const auto& label = obj["graph_label"];
    if (label.is_number_integer())
      g.graph_label = GraphLabel{label.get<std::int64_t>()};
    else if (label.is_number())
      g.graph_label = GraphLabel{label.get<double>()};
    else
      throw io_error("graph_label must be a number" + context);
  }
  if (obj.contains("edge_provenance")) {
    std::vector<Provenance> prov;
    for (const auto& p : obj["edge_provenance"]) {
      int tag = p.get<int>();
      if (tag < 0 || tag > 2) throw io_error("edge_provenance tag out of range" + context);
      prov.push_back(static_cast<Provenance>(tag));
    }
    if (prov.size() != g.edges.size())
      throw io_error("edge_provenance length mismatch" + context);
    record.edge_provenance = std::move(prov);
  }
  if (obj.contains("rewire_meta")) {
    const auto& meta = obj["rewire_meta"];
    RewireMeta rm;
    rm.r = meta.at("r").get<int>();
    if (meta.contains("cls_node") && !meta["cls_node"].is_null())
      rm.cls_node = meta["cls_node"].get<int>();
    record.rewire_meta = rm;
  }
  if (obj.contains("pe_kind")) record.pe_kind = pe_kind_from_string(obj["pe_kind"].get<std::string>());
  if (obj.contains("edge_pe")) {
    record.edge_pe = obj["edge_pe"].get<std::vector<std::vector<std::int64_t>>>();
    if (record.edge_pe->size() != g.edges.size())
      throw io_error("edge_pe length mismatch" + context);
  }
  if (obj.contains("node_pe")) {
    record.node_pe = obj["node_pe"].get<std::vector<std::vector<double>>>();
    if (record.node_pe->size() != static_cast<std::size_t>(g.num_nodes))
      throw io_error("node_pe length mismatch" + context);
  }
  if (obj.contains("pe_meta")) {
    const auto& meta = obj["pe_meta"];
    PeMeta pm;
    if (meta.contains("r")) pm.r = meta["r"].get<int>();
    if (meta.contains("q")) pm.q = meta["q"].get<int>();
    if (meta.contains("padded")) pm.padded = meta["padded"].get<int>();
    record.pe_meta = pm;
  }
  try {
    validate_graph(g);
  } catch (const std::invalid_argument& e) {
    throw io_error(std::string(e.what()) + context);
  }
  return record;
}

DatasetFile load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path.string() + "'");
  DatasetFile file;
  std::string line;
  std::size_t line_number = 0;
  int dv = -1, de = -1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string context = ", line " + std::to_string(line_number);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw io_error("invalid JSON (" + std::string(e.what()) + ")" + context);
    }
    if (obj.is_object() && obj.contains("gen_meta")) {
      file.gen_meta_json = obj.dump();
      continue;
    }
    DatasetRecord record = record_from_json(obj, context);
    if (dv == -1 && de == -1) {
      dv = record.graph.node_feature_dim();
      de = record.graph.edge_feature_dim();
    } else {
      if (record.graph.node_feature_dim() != dv)
        throw io_error("node feature dimension mismatch" + context);
      if (record.graph.edge_feature_dim() != de)
        throw io_error("edge feature dimension mismatch" + context);
    }
    file.records.push_back(std::move(record));
  }
  return file;
}

std::vector<AttributedGraph> load_dataset(const std::filesystem::path& path) {
  DatasetFile file = load_records(path);
  std::vector<AttributedGraph> graphs;
  graphs.reserve(file.records.size());
  for (auto& record : file.records) graphs.push_back(std::move(record.graph));
  return graphs;
}

void save_records(const DatasetFile& file, const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw io_error("cannot write '" + tmp.string() + "'");
    if (file.gen_meta_json) out << *file.gen_meta_json << '\n';
    for (const DatasetRecord& record : file.records) out << record_to_json(record).dump() << '\n';
    if (!out) throw io_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw io_error("cannot rename '" + tmp.string() + "' to '" + path.string() + "'");
}

void save_dataset(const std::vector<AttributedGraph>& graphs, const std::filesystem::path& path) {
  DatasetFile file;
  file.records.reserve(graphs.size());
  for (const AttributedGraph& g : graphs) {
    DatasetRecord record;
    record.graph = g;
    file.records.push_back(std::move(record));
  }
  save_records(file, path);
}

}  // namespace rhop
