#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rhop/errors.hpp"
#include "rhop/generate.hpp"
#include "rhop/io.hpp"

using namespace rhop;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("rhop_io_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("load_dataset maps fields directly") {
  TempDir dir;
  const auto file = dir.path / "two.jsonl";
  write_text(file,
             R"({"num_nodes":2,"edges":[[0,1],[1,0]],"node_feat":[[1.0],[2.0]],"edge_feat":[[0.5],[0.5]]})"
             "\n");
  const auto graphs = load_dataset(file);
  REQUIRE(graphs.size() == 1);
  CHECK(graphs[0].num_nodes == 2);
  CHECK(graphs[0].edges == std::vector<Edge>{Edge{0, 1}, Edge{1, 0}});
  CHECK(graphs[0].node_feature_dim() == 1);
  CHECK(graphs[0].edge_feature_dim() == 1);
  CHECK(graphs[0].node_features[0][0] == 1.0);
}

TEST_CASE("empty file loads as empty dataset") {
  TempDir dir;
  const auto file = dir.path / "empty.jsonl";
  write_text(file, "");
  CHECK(load_dataset(file).empty());
}

TEST_CASE("endpoint out of range names the line") {
  TempDir dir;
  const auto file = dir.path / "bad.jsonl";
  write_text(file, R"({"num_nodes":3,"edges":[[0,5]]})" "\n");
  CHECK_THROWS_WITH_AS(load_dataset(file), "endpoint out of range, line 1", io_error);
}

TEST_CASE("dimension mismatch across graphs is rejected") {
  TempDir dir;
  const auto file = dir.path / "mixed.jsonl";
  write_text(file,
             R"({"num_nodes":1,"edges":[],"node_feat":[[1.0,2.0]]})" "\n"
             R"({"num_nodes":1,"edges":[],"node_feat":[[1.0]]})" "\n");
  CHECK_THROWS_WITH_AS(load_dataset(file), "node feature dimension mismatch, line 2", io_error);
}

TEST_CASE("missing file raises io_error") {
  CHECK_THROWS_AS(load_dataset("/nonexistent/nowhere.jsonl"), io_error);
}

TEST_CASE("save/load round-trip is the identity") {
  TempDir dir;
  SUBCASE("single random graph") {
    auto g = gen_erdos(9, 0.3, 21);
    g.graph_label = GraphLabel{std::int64_t{4}};
    g.node_labels = std::vector<std::int64_t>{0, 1, 2, 0, 1, 2, 0, 1, 2};
    const auto file = dir.path / "one.jsonl";
    save_dataset({g}, file);
    const auto loaded = load_dataset(file);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0] == g);
  }
  SUBCASE("several graphs with real-valued labels") {
    std::vector<AttributedGraph> graphs;
    for (std::uint64_t s = 0; s < 5; ++s) {
      auto g = gen_erdos(7, 0.4, s);
      g.graph_label = GraphLabel{0.1 * static_cast<double>(s) + 1.0 / 3.0};
      graphs.push_back(g);
    }
    const auto file = dir.path / "many.jsonl";
    save_dataset(graphs, file);
    CHECK(load_dataset(file) == graphs);
  }
  SUBCASE("empty dataset gives an empty file") {
    const auto file = dir.path / "none.jsonl";
    save_dataset({}, file);
    CHECK(fs::file_size(file) == 0);
    CHECK(load_dataset(file).empty());
  }
  SUBCASE("no features serializes without feature arrays") {
    AttributedGraph g;
    g.num_nodes = 3;
    g.edges = {Edge{0, 1}, Edge{1, 0}};
    const auto file = dir.path / "plain.jsonl";
    save_dataset({g}, file);
    std::ifstream in(file);
    std::string line;
    std::getline(in, line);
    CHECK(line.find("node_feat") == std::string::npos);
    CHECK(line.find("edge_feat") == std::string::npos);
    const auto loaded = load_dataset(file);
    CHECK(loaded[0].node_feature_dim() == 0);
    CHECK(loaded[0].edge_feature_dim() == 0);
  }
}

TEST_CASE("records keep extension fields through a round-trip") {
  TempDir dir;
  DatasetRecord record;
  record.graph = gen_erdos(5, 0.5, 3);
  record.edge_provenance =
      std::vector<Provenance>(record.graph.edges.size(), Provenance::original);
  record.rewire_meta = RewireMeta{2, std::nullopt};
  record.pe_kind = PeKind::shortest;
  record.edge_pe = std::vector<std::vector<std::int64_t>>(record.graph.edges.size(), {1});
  PeMeta meta;
  meta.r = 2;
  record.pe_meta = meta;

  DatasetFile file;
  file.gen_meta_json = R"({"gen_meta":{"family":"erdos","rng":"splitmix64-v1"}})";
  file.records.push_back(record);

  const auto path = dir.path / "records.jsonl";
  save_records(file, path);
  const auto loaded = load_records(path);
  REQUIRE(loaded.records.size() == 1);
  CHECK(loaded.records[0] == record);
  REQUIRE(loaded.gen_meta_json.has_value());
  CHECK(loaded.gen_meta_json->find("splitmix64") != std::string::npos);

  // load_dataset skips the header and drops extensions.
  const auto graphs = load_dataset(path);
  REQUIRE(graphs.size() == 1);
  CHECK(graphs[0] == record.graph);
}

TEST_CASE("saving twice produces byte-identical files") {
  TempDir dir;
  const auto graphs = gen_erdos_batch(8, 10, 0.35, 99);
  const auto a = dir.path / "a.jsonl";
  const auto b = dir.path / "b.jsonl";
  save_dataset(graphs, a);
  save_dataset(graphs, b);
  std::ifstream fa(a), fb(b);
  std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(ca == cb);
  CHECK(!ca.empty());
}
