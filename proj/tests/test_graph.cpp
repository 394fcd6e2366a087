#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>

#include "tgnn/core.hpp"
#include "tgnn/rng.hpp"
#include "tgnn/split.hpp"
#include "tgnn/synthetic.hpp"
#include "tgnn/tu_io.hpp"

using namespace tgnn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("tgnn_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

// triangle (graph 1, label 1) plus a single edge (graph 2, label 2),
// with every edge listed in both directions
void write_two_graph_fixture(const fs::path& dir, const std::string& name) {
  write_file(dir / (name + "_A.txt"), "1, 2\n2, 1\n1, 3\n3, 1\n2, 3\n3, 2\n4, 5\n5, 4\n");
  write_file(dir / (name + "_graph_indicator.txt"), "1\n1\n1\n2\n2\n");
  write_file(dir / (name + "_graph_labels.txt"), "1\n2\n");
}

}  // namespace

TEST_CASE("tu loader: two-graph fixture") {
  TempDir tmp;
  write_two_graph_fixture(tmp.path, "FIX");
  Dataset ds = load_tu_dataset(tmp.path.string());

  REQUIRE(ds.graphs.size() == 2);
  CHECK(ds.num_classes == 2);
  CHECK(ds.name == "FIX");
  CHECK(ds.graphs[0].num_nodes == 3);
  // both directions collapse to one undirected edge each
  CHECK(ds.graphs[0].edges == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}});
  CHECK(ds.graphs[1].edges == std::vector<std::pair<int, int>>{{0, 1}});
  CHECK(*ds.graphs[0].label == 0);
  CHECK(*ds.graphs[1].label == 1);
}

TEST_CASE("tu loader: node labels become one-hot features") {
  TempDir tmp;
  write_two_graph_fixture(tmp.path, "FIX");
  write_file(tmp.path / "FIX_node_labels.txt", "1\n2\n3\n1\n2\n");
  Dataset ds = load_tu_dataset(tmp.path.string());
  CHECK(ds.graphs[0].feature_dim == 3);
  CHECK(ds.graphs[0].features == std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0, 1});
  CHECK(ds.graphs[1].features == std::vector<double>{1, 0, 0, 0, 1, 0});
}

TEST_CASE("tu loader: node labels concatenate with attributes") {
  TempDir tmp;
  write_two_graph_fixture(tmp.path, "FIX");
  write_file(tmp.path / "FIX_node_labels.txt", "1\n1\n1\n2\n2\n");
  write_file(tmp.path / "FIX_node_attributes.txt", "0.5, 1.5\n0.5, 1.5\n0.5, 1.5\n2.5, 3.5\n2.5, 3.5\n");
  Dataset ds = load_tu_dataset(tmp.path.string());
  CHECK(ds.graphs[0].feature_dim == 4);  // 2 one-hot + 2 attributes
  CHECK(ds.graphs[0].feature(0, 0) == 1.0);
  CHECK(ds.graphs[0].feature(0, 2) == 0.5);
  CHECK(ds.graphs[1].feature(0, 1) == 1.0);
  CHECK(ds.graphs[1].feature(0, 3) == 3.5);
}

TEST_CASE("tu loader: error paths") {
  TempDir tmp;
  SECTION("missing mandatory file") {
    write_file(tmp.path / "FIX_A.txt", "1, 2\n");
    write_file(tmp.path / "FIX_graph_indicator.txt", "1\n1\n");
    CHECK_THROWS_AS(load_tu_dataset(tmp.path.string()), std::runtime_error);
  }
  SECTION("non-integer edge index") {
    write_two_graph_fixture(tmp.path, "FIX");
    write_file(tmp.path / "FIX_A.txt", "1, x\n");
    CHECK_THROWS_AS(load_tu_dataset(tmp.path.string()), std::runtime_error);
  }
  SECTION("node label count mismatch") {
    write_two_graph_fixture(tmp.path, "FIX");
    write_file(tmp.path / "FIX_node_labels.txt", "1\n2\n");
    CHECK_THROWS_AS(load_tu_dataset(tmp.path.string()), std::runtime_error);
  }
  SECTION("edge endpoint out of range") {
    write_two_graph_fixture(tmp.path, "FIX");
    write_file(tmp.path / "FIX_A.txt", "1, 9\n");
    CHECK_THROWS_AS(load_tu_dataset(tmp.path.string()), std::runtime_error);
  }
}

TEST_CASE("tu round trip preserves the dataset") {
  TempDir tmp;
  Dataset ds = make_synthetic_dataset(10, 5, 9, 7);
  apply_degree_features(ds, 8);

  write_tu_dataset(ds, tmp.path.string(), "ROUND");
  Dataset back = load_tu_dataset(tmp.path.string());

  REQUIRE(back.graphs.size() == ds.graphs.size());
  CHECK(back.num_classes == ds.num_classes);
  for (size_t i = 0; i < ds.graphs.size(); ++i) {
    CHECK(back.graphs[i].num_nodes == ds.graphs[i].num_nodes);
    CHECK(back.graphs[i].edges == ds.graphs[i].edges);
    CHECK(back.graphs[i].features == ds.graphs[i].features);
    CHECK(*back.graphs[i].label == *ds.graphs[i].label);
  }
}

TEST_CASE("degree features") {
  Graph tri;
  tri.num_nodes = 3;
  tri.edges = {{0, 1}, {0, 2}, {1, 2}};
  Graph t = degree_features(tri, 4);
  CHECK(t.feature_dim == 5);
  for (int v = 0; v < 3; ++v) {
    CHECK(t.feature(v, 2) == 1.0);
    double rowsum = 0;
    for (int j = 0; j < 5; ++j) rowsum += t.feature(v, j);
    CHECK(rowsum == 1.0);
  }

  Graph lone;
  lone.num_nodes = 1;
  CHECK(degree_features(lone, 4).feature(0, 0) == 1.0);

  Graph star;
  star.num_nodes = 10;
  for (int v = 1; v < 10; ++v) star.edges.emplace_back(0, v);
  Graph s = degree_features(star, 4);
  CHECK(s.feature(0, 4) == 1.0);  // degree 9 clamps into the last bucket
  CHECK(s.feature(1, 1) == 1.0);
}

TEST_CASE("split: exact proportions on balanced data") {
  Dataset ds;
  ds.num_classes = 2;
  for (int i = 0; i < 100; ++i) {
    Graph g;
    g.num_nodes = 1;
    g.label = i % 2;
    ds.graphs.push_back(g);
  }
  SplitDataset s = split_dataset(ds, {2, 5, 1, 2}, 42);
  CHECK(s.labeled_train.size() == 20);
  CHECK(s.unlabeled_train.size() == 50);
  CHECK(s.validation.size() == 10);
  CHECK(s.test.size() == 20);

  Dataset small;
  small.num_classes = 1;
  for (int i = 0; i < 10; ++i) {
    Graph g;
    g.num_nodes = 1;
    g.label = 0;
    small.graphs.push_back(g);
  }
  SplitDataset ss = split_dataset(small, {2, 5, 1, 2}, 42);
  CHECK(ss.labeled_train.size() == 2);
  CHECK(ss.unlabeled_train.size() == 5);
  CHECK(ss.validation.size() == 1);
  CHECK(ss.test.size() == 2);
}

TEST_CASE("split: partition, stratification, determinism") {
  Rng rng = make_rng(77);
  Dataset ds;
  ds.num_classes = 3;
  std::uniform_int_distribution<int> klass(0, 2);
  for (int i = 0; i < 83; ++i) {
    Graph g;
    g.num_nodes = 1;
    g.label = klass(rng);
    ds.graphs.push_back(g);
  }
  const std::array<int, 4> ratios{2, 5, 1, 2};
  SplitDataset a = split_dataset(ds, ratios, 9);
  SplitDataset b = split_dataset(ds, ratios, 9);
  CHECK(a.labeled_train == b.labeled_train);
  CHECK(a.unlabeled_train == b.unlabeled_train);
  CHECK(a.validation == b.validation);
  CHECK(a.test == b.test);

  // pairwise disjoint and exhaustive
  std::set<int> all;
  size_t total = 0;
  for (const auto* part : {&a.labeled_train, &a.unlabeled_train, &a.validation, &a.test}) {
    all.insert(part->begin(), part->end());
    total += part->size();
  }
  CHECK(all.size() == ds.graphs.size());
  CHECK(total == ds.graphs.size());

  // per-class proportions within one graph of target (remainders go to
  // unlabeled_train, so that part is exempt)
  for (int c = 0; c < 3; ++c) {
    int n_c = 0;
    for (const auto& g : ds.graphs)
      if (*g.label == c) ++n_c;
    const std::vector<const std::vector<int>*> parts{&a.labeled_train, &a.validation, &a.test};
    const std::vector<int> share{2, 1, 2};
    for (size_t k = 0; k < parts.size(); ++k) {
      int got = 0;
      for (int idx : *parts[k])
        if (*ds.graphs[idx].label == c) ++got;
      CHECK(std::abs(got - n_c * share[k] / 10.0) <= 1.0);
    }
  }

  SplitDataset c = split_dataset(ds, ratios, 10);
  CHECK(a.labeled_train != c.labeled_train);  // seed actually matters
}

TEST_CASE("split: a one-graph class still lands in the labeled set") {
  Dataset ds;
  ds.num_classes = 2;
  for (int i = 0; i < 9; ++i) {
    Graph g;
    g.num_nodes = 1;
    g.label = 0;
    ds.graphs.push_back(g);
  }
  Graph rare;
  rare.num_nodes = 1;
  rare.label = 1;
  ds.graphs.push_back(rare);

  SplitDataset s = split_dataset(ds, {2, 5, 1, 2}, 3);
  bool found = false;
  for (int idx : s.labeled_train) found |= *ds.graphs[idx].label == 1;
  CHECK(found);
}

TEST_CASE("label ratio shrink moves the remainder to unlabeled") {
  Dataset ds = make_synthetic_dataset(100, 6, 12, 5);
  SplitDataset s = split_dataset(ds, {2, 5, 1, 2}, 11);
  REQUIRE(s.labeled_train.size() == 60);
  const size_t unl_before = s.unlabeled_train.size();

  apply_label_ratio(s, ds, 10.0 / 60.0, 11);
  CHECK(s.labeled_train.size() == 10);
  CHECK(s.unlabeled_train.size() == unl_before + 50);

  // all three classes still covered
  std::set<int> classes;
  for (int idx : s.labeled_train) classes.insert(*ds.graphs[idx].label);
  CHECK(classes.size() == 3);
}

TEST_CASE("synthetic dataset shape") {
  Dataset ds = make_synthetic_dataset(100, 6, 12, 1);
  CHECK(ds.graphs.size() == 300);
  CHECK(ds.num_classes == 3);
  int per_class[3] = {0, 0, 0};
  for (const auto& g : ds.graphs) {
    CHECK(g.num_nodes >= 6);
    CHECK(g.num_nodes <= 12);
    ++per_class[*g.label];
  }
  for (int c = 0; c < 3; ++c) CHECK(per_class[c] == 100);
  validate_dataset(ds);

  apply_degree_features(ds, 16);
  validate_dataset(ds);
  CHECK(ds.graphs[0].feature_dim == 17);
}
