#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <string>
#include <vector>

#include "doctest.h"
#include "xbarft/io.hpp"
#include "xbarft/rng.hpp"

using namespace xbarft;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("xbarft_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& name = "") const {
    return (name.empty() ? path : path / name).string();
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

}  // namespace

TEST_CASE("tensor files round-trip doubles exactly") {
  TempDir tmp;
  Rng rng(1);
  Matrix m(7, 5);
  for (double& v : m.data) v = (rng.uniform() - 0.5) * std::pow(10.0, rng.below(20));
  m.data[0] = 0.0;
  m.data[1] = -1e-300;
  m.data[2] = 1.0 / 3.0;
  save_tensor(tmp.str("t.txt"), m);
  const Matrix back = load_tensor(tmp.str("t.txt"));
  CHECK(back.rows == m.rows);
  CHECK(back.cols == m.cols);
  CHECK(back.data == m.data);
}

TEST_CASE("tensor loader rejects malformed files") {
  TempDir tmp;
  write_text_file(tmp.str("bad.txt"), "no header here\n1 2\n");
  CHECK_THROWS_AS(load_tensor(tmp.str("bad.txt")), std::runtime_error);
  write_text_file(tmp.str("short.txt"), "# dims 2 2\n1 2 3\n");
  CHECK_THROWS_AS(load_tensor(tmp.str("short.txt")), std::runtime_error);
  CHECK_THROWS_AS(load_tensor(tmp.str("missing.txt")), std::runtime_error);
}

TEST_CASE("index lists round-trip") {
  TempDir tmp;
  const std::vector<std::size_t> idx = {0, 3, 17, 255};
  save_index_list(tmp.str("i.txt"), idx);
  CHECK(load_index_list(tmp.str("i.txt")) == idx);
}

TEST_CASE("placement maps serialize as k j p j'") {
  TempDir tmp;
  const PlacementMap map = plan_embedding(3, 3, 8, {1, 4, 5, 7});
  save_placement(tmp.str("p.txt"), map);
  const PlacementMap back = load_placement(tmp.str("p.txt"));
  CHECK(back.bits == map.bits);
  CHECK(back.candidates == map.candidates);
  CHECK(back.columns == map.columns);
  REQUIRE(back.assignments.size() == map.assignments.size());
  for (std::size_t i = 0; i < map.assignments.size(); ++i) {
    CHECK(back.assignments[i].candidate == map.assignments[i].candidate);
    CHECK(back.assignments[i].src_col == map.assignments[i].src_col);
    CHECK(back.assignments[i].host_plane == map.assignments[i].host_plane);
    CHECK(back.assignments[i].host_col == map.assignments[i].host_col);
  }
}

TEST_CASE("config files parse dotted keys, comments and lists") {
  const Config cfg = Config::parse_string(
      "# a comment\n"
      "fault.rate = 0.001\n"
      "sweep.rates = 0.0001, 0.001 , 0.002\n"
      "model.path = runs/toy  # trailing comment\n"
      "sweep.trials=30\n"
      "\n");
  CHECK(cfg.get_double("fault.rate", 0.0) == 0.001);
  CHECK(cfg.get_int("sweep.trials", 0) == 30);
  CHECK(cfg.get_string("model.path", "") == "runs/toy");
  CHECK(cfg.get_double_list("sweep.rates", {}) ==
        std::vector<double>{0.0001, 0.001, 0.002});
  CHECK(cfg.get_int("absent", 7) == 7);
  CHECK_THROWS_AS(Config::parse_string("not a pair\n"), std::runtime_error);
}

TEST_CASE("model directories round-trip including pruned indices") {
  TempDir tmp;
  Rng rng(2);
  Model model;
  for (std::size_t dims : {std::size_t{4}, std::size_t{3}}) {
    LayerSpec layer;
    layer.weight = Matrix(5, dims);
    for (double& v : layer.weight.data) v = rng.normal();
    layer.bias.assign(dims, 0.25);
    model.layers.push_back(std::move(layer));
  }
  model.layers[0].pruned_cols = {1, 3};
  for (std::size_t j : model.layers[0].pruned_cols)
    for (std::size_t i = 0; i < 5; ++i) model.layers[0].weight.at(i, j) = 0.0;

  save_model(tmp.str("model"), model);
  const Model back = load_model(tmp.str("model"));
  REQUIRE(back.layers.size() == 2);
  CHECK(back.layers[0].weight == model.layers[0].weight);
  CHECK(back.layers[1].weight == model.layers[1].weight);
  CHECK(back.layers[0].bias == model.layers[0].bias);
  CHECK(back.layers[0].pruned_cols == model.layers[0].pruned_cols);
  CHECK(back.layers[1].pruned_cols.empty());
}

TEST_CASE("dataset directories round-trip") {
  TempDir tmp;
  DataConfig dc;
  dc.dim = 6;
  dc.classes = 3;
  dc.train = 30;
  dc.test = 12;
  const Dataset data = make_clusters(dc);
  save_dataset(tmp.str("data"), data);
  const Dataset back = load_dataset(tmp.str("data"));
  CHECK(back.train_x == data.train_x);
  CHECK(back.test_x == data.test_x);
  CHECK(back.train_y == data.train_y);
  CHECK(back.test_y == data.test_y);
  CHECK(back.classes == data.classes);
}

TEST_CASE("quantized layers round-trip") {
  TempDir tmp;
  Rng rng(3);
  Matrix w(6, 4);
  for (double& v : w.data) v = rng.normal();
  const QuantizedLayer layer = quantize(w, QuantConfig{5});
  save_quantized(tmp.str("q.txt"), layer);
  const QuantizedLayer back = load_quantized(tmp.str("q.txt"));
  CHECK(back.q == layer.q);
  CHECK(back.bits == layer.bits);
  CHECK(back.sign == layer.sign);
  CHECK(back.planes == layer.planes);
}
