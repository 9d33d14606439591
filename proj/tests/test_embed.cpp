#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "xbarft/embed.hpp"
#include "xbarft/rng.hpp"

using namespace xbarft;

namespace {

Matrix random_pruned_matrix(std::size_t r, std::size_t c,
                            const std::vector<std::size_t>& pruned, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.data) v = 2.0 * rng.uniform() - 1.0;
  for (std::size_t j : pruned)
    for (std::size_t i = 0; i < r; ++i) m.at(i, j) = 0.0;
  return m;
}

std::vector<double> random_vector(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> x(n);
  for (double& v : x) v = scale * (2.0 * rng.uniform() - 1.0);
  return x;
}

CrossbarLayer pruned_layer(std::size_t r, std::size_t c,
                           const std::vector<std::size_t>& pruned, int bits,
                           Rng& rng, FlipPolicy flip = FlipPolicy::msb_only) {
  return map_layer(quantize(random_pruned_matrix(r, c, pruned, rng), QuantConfig{bits}),
                   flip);
}

// Move embedded-host faults back onto the non-embedded layout: faults on a
// plane's own columns stay, faults on used slots follow the assignment to
// the duplicate, faults on unused slots have no physical counterpart.
FtLayer translate_faults(const CrossbarLayer& base, const EmbeddedLayer& emb) {
  const int candidates = emb.map.candidates;
  FtLayer ft;
  ft.base = base;
  for (int k = 1; k < candidates; ++k) ft.msb_dups.push_back(base.planes[0]);

  std::vector<FaultMap> pos(base.planes.size()), neg(base.planes.size());
  std::vector<FaultMap> dup_pos(static_cast<std::size_t>(candidates - 1));
  std::vector<FaultMap> dup_neg(static_cast<std::size_t>(candidates - 1));

  for (std::size_t p = 0; p < emb.host.planes.size(); ++p) {
    auto route = [&](const FaultMap& src, std::vector<FaultMap>& own,
                     std::vector<FaultMap>& dups) {
      for (const Fault& f : src.entries) {
        const bool is_pruned = std::binary_search(emb.map.pruned_index.begin(),
                                                  emb.map.pruned_index.end(), f.col);
        if (!is_pruned) {
          own[p].entries.push_back(f);
          continue;
        }
        for (const Assignment& a : emb.map.assignments) {
          if (a.host_plane == p && a.host_col == f.col) {
            dups[static_cast<std::size_t>(a.candidate - 2)].entries.push_back(
                {f.row, static_cast<std::uint32_t>(a.src_col), f.stuck});
            break;
          }
        }
      }
    };
    route(emb.host.planes[p].pos.faults, pos, dup_pos);
    route(emb.host.planes[p].neg.faults, neg, dup_neg);
  }

  auto sort_map = [](FaultMap& m) {
    std::sort(m.entries.begin(), m.entries.end(), [](const Fault& a, const Fault& b) {
      return std::pair{a.row, a.col} < std::pair{b.row, b.col};
    });
  };
  for (std::size_t p = 0; p < base.planes.size(); ++p) {
    sort_map(pos[p]);
    sort_map(neg[p]);
    ft.base.planes[p] = with_faults(ft.base.planes[p], pos[p], neg[p]);
  }
  for (std::size_t k = 0; k + 1 < static_cast<std::size_t>(candidates); ++k) {
    sort_map(dup_pos[k]);
    sort_map(dup_neg[k]);
    ft.msb_dups[k] = with_faults(ft.msb_dups[k], dup_pos[k], dup_neg[k]);
  }
  return ft;
}

}  // namespace

TEST_CASE("capacity_check on the 8-bit worked examples") {
  const CapacityReport ok = capacity_check(8, 3, 0.30, 100);
  CHECK(ok.free_slots == 240);
  CHECK(ok.needed == 140);
  CHECK(ok.feasible);
  CHECK(ok.deficit == 0);

  const CapacityReport edge = capacity_check(8, 3, 0.20, 100);
  CHECK(edge.free_slots == 160);
  CHECK(edge.needed == 160);
  CHECK(edge.feasible);

  const CapacityReport bad = capacity_check(8, 3, 0.19, 100);
  CHECK_FALSE(bad.feasible);
  CHECK(bad.deficit == 10);
}

TEST_CASE("capacity_check matches brute-force slot counting") {
  for (int n : {2, 5, 8}) {
    for (int t : {1, 3, 5}) {
      for (std::size_t c : {std::size_t{10}, std::size_t{37}, std::size_t{100}}) {
        for (std::size_t pruned = 0; pruned <= c; ++pruned) {
          // Brute force: enumerate slots and donor columns one by one.
          std::size_t slots = 0;
          for (int plane = 0; plane < n; ++plane)
            for (std::size_t j = 0; j < pruned; ++j) ++slots;
          std::size_t donors = 0;
          for (int k = 2; k <= t; ++k)
            for (std::size_t j = 0; j < c - pruned; ++j) ++donors;

          const double s = static_cast<double>(pruned) / static_cast<double>(c);
          const CapacityReport rep = capacity_check(n, t, s, c);
          CHECK(rep.free_slots == slots);
          CHECK(rep.needed == donors);
          CHECK(rep.feasible == (donors <= slots));
        }
      }
    }
  }
}

TEST_CASE("plan_embedding reproduces the worked fill order") {
  // 4 columns, pruned {1, 3}, two planes, one duplicate.
  const PlacementMap map = plan_embedding(2, 2, 4, {1, 3});
  REQUIRE(map.assignments.size() == 2);
  CHECK(map.assignments[0].candidate == 2);
  CHECK(map.assignments[0].src_col == 0);
  CHECK(map.assignments[0].host_plane == 0);
  CHECK(map.assignments[0].host_col == 1);
  CHECK(map.assignments[1].candidate == 2);
  CHECK(map.assignments[1].src_col == 2);
  CHECK(map.assignments[1].host_plane == 0);
  CHECK(map.assignments[1].host_col == 3);
}

TEST_CASE("plan_embedding degenerate cases") {
  // Everything pruned: duplicates have no unpruned columns.
  CHECK(plan_embedding(3, 3, 4, {0, 1, 2, 3}).assignments.empty());
  // No duplicates at all.
  CHECK(plan_embedding(3, 1, 4, {0}).assignments.empty());
}

TEST_CASE("plan_embedding is injective on sources and slots") {
  const std::vector<std::size_t> pruned = {0, 3, 4, 7, 9, 12, 15, 16, 18,
                                           19, 21, 22, 24, 25, 27, 28, 29};
  const PlacementMap map = plan_embedding(4, 5, 30, pruned);
  std::vector<std::pair<int, std::size_t>> sources;
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  for (const Assignment& a : map.assignments) {
    sources.emplace_back(a.candidate, a.src_col);
    slots.emplace_back(a.host_plane, a.host_col);
    CHECK(std::binary_search(map.pruned_index.begin(), map.pruned_index.end(),
                             a.host_col));
  }
  std::sort(sources.begin(), sources.end());
  std::sort(slots.begin(), slots.end());
  CHECK(std::adjacent_find(sources.begin(), sources.end()) == sources.end());
  CHECK(std::adjacent_find(slots.begin(), slots.end()) == slots.end());
  // Every unpruned column of every duplicate appears exactly once.
  CHECK(sources.size() == static_cast<std::size_t>(5 - 1) * (30 - pruned.size()));
}

TEST_CASE("plan_embedding raises a capacity error with the deficit") {
  std::vector<std::size_t> pruned;  // 19% sparsity at 100 columns
  for (std::size_t j = 0; j < 19; ++j) pruned.push_back(j);
  try {
    plan_embedding(8, 3, 100, pruned);
    FAIL("expected CapacityError");
  } catch (const CapacityError& e) {
    CHECK(e.report.needed == 162);
    CHECK(e.report.free_slots == 152);
    CHECK(e.report.deficit == 10);
  }
}

TEST_CASE("embed_layer rejects hosts whose pruned columns are not zero") {
  Rng rng(41);
  Matrix w = random_pruned_matrix(6, 8, {}, rng);  // nothing actually pruned
  const CrossbarLayer layer = map_layer(quantize(w, QuantConfig{3}), FlipPolicy::none);
  CHECK_THROWS_AS(embed_layer(layer, 3, {1, 2, 3, 4, 5, 6}), std::invalid_argument);
}

TEST_CASE("gather after distribute returns the duplicate bits") {
  Rng rng(43);
  const std::vector<std::size_t> pruned = {1, 4, 5, 8, 9, 11};
  const CrossbarLayer base = pruned_layer(10, 12, pruned, 4, rng);
  const EmbeddedLayer emb = embed_layer(base, 3, pruned);

  const std::vector<GatheredPlane> dups = gather_embedded(emb);
  REQUIRE(dups.size() == 2);
  for (const GatheredPlane& g : dups) {
    for (std::size_t j = 0; j < 12; ++j) {
      const bool is_pruned = std::binary_search(pruned.begin(), pruned.end(), j);
      for (std::size_t i = 0; i < 10; ++i) {
        if (is_pruned) {
          CHECK(g.pos.at(i, j) == 0);
          CHECK(g.neg.at(i, j) == 0);
        } else {
          CHECK(g.pos.at(i, j) == base.planes[0].pos.stored.at(i, j));
          CHECK(g.neg.at(i, j) == base.planes[0].neg.stored.at(i, j));
        }
      }
    }
  }
}

TEST_CASE("gathered bits equal effective host cells under faults") {
  Rng rng(47);
  const std::vector<std::size_t> pruned = {0, 2, 5, 6, 9, 10, 11};
  const CrossbarLayer base = pruned_layer(8, 12, pruned, 3, rng);
  EmbeddedLayer emb = embed_layer(base, 3, pruned);
  FaultModel model;
  model.rate = 0.05;
  model.seed = 99;
  inject_embedded_faults(emb, model, 4);

  const std::vector<GatheredPlane> dups = gather_embedded(emb);
  for (const Assignment& a : emb.map.assignments) {
    const GatheredPlane& g = dups[static_cast<std::size_t>(a.candidate - 2)];
    const CrossbarPlane& hp = emb.host.planes[a.host_plane];
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(g.pos.at(i, a.src_col) == effective_cell(hp.pos, i, a.host_col));
      CHECK(g.neg.at(i, a.src_col) == effective_cell(hp.neg, i, a.host_col));
    }
  }
}

TEST_CASE("embedding adds no physical columns") {
  Rng rng(53);
  const std::vector<std::size_t> pruned = {2, 3, 7, 8, 12, 13, 14};
  const CrossbarLayer base = pruned_layer(6, 15, pruned, 5, rng);
  const EmbeddedLayer emb = embed_layer(base, 3, pruned);
  CHECK(emb.host.planes.size() == base.planes.size());
  std::size_t before = 0, after = 0;
  for (const CrossbarPlane& p : base.planes) before += p.cols();
  for (const CrossbarPlane& p : emb.host.planes) after += p.cols();
  CHECK(after == before);
}

TEST_CASE("fault-free embedded inference equals layer_matvec") {
  Rng rng(59);
  const std::vector<std::size_t> pruned = {1, 3, 6, 7, 10, 11};
  const CrossbarLayer base = pruned_layer(9, 12, pruned, 4, rng);
  const EmbeddedLayer emb = embed_layer(base, 3, pruned);
  for (int t = 0; t < 10; ++t) {
    const std::vector<double> x = random_vector(9, rng);
    CHECK(infer_layer_embedded(emb, x) == layer_matvec(base, x));
  }
}

TEST_CASE("embedded inference equals duplicate inference under translated faults") {
  Rng rng(61);
  int exercised = 0;
  for (int trial = 0; trial < 40 && exercised < 20; ++trial) {
    const std::size_t rows = 8, cols = 12;
    std::vector<std::size_t> pruned;
    for (std::size_t j = 0; j < cols; ++j)
      if (rng.uniform() < 0.45) pruned.push_back(j);
    if (capacity_check(4, 3, static_cast<double>(pruned.size()) / cols, cols)
            .feasible == false)
      continue;
    ++exercised;

    const CrossbarLayer base = pruned_layer(rows, cols, pruned, 4, rng);
    EmbeddedLayer emb = embed_layer(base, 3, pruned);
    FaultModel model;
    model.rate = 0.02;
    model.seed = 1000 + static_cast<std::uint64_t>(trial);
    inject_embedded_faults(emb, model, 0);

    const FtLayer ft = translate_faults(base, emb);
    for (int rep = 0; rep < 3; ++rep) {
      const std::vector<double> x = random_vector(rows, rng, 2.0);
      CHECK(infer_layer_embedded(emb, x) == infer_layer_ft(ft, x));
    }
  }
  CHECK(exercised >= 10);
}
