#include "xbarft/embed.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace xbarft {

CapacityReport capacity_check(int bit_planes, int candidates,
                              double column_sparsity, std::size_t columns) {
  require(bit_planes >= 1, "capacity_check: bit_planes must be >= 1");
  require(candidates >= 1, "capacity_check: candidates must be >= 1");
  require(column_sparsity >= 0.0 && column_sparsity <= 1.0,
          "capacity_check: sparsity out of [0,1]");
  require(columns >= 1, "capacity_check: columns must be >= 1");

  const auto pruned = static_cast<std::size_t>(
      std::llround(column_sparsity * static_cast<double>(columns)));
  CapacityReport rep;
  rep.free_slots = static_cast<std::size_t>(bit_planes) * pruned;
  rep.needed = static_cast<std::size_t>(candidates - 1) * (columns - pruned);
  rep.feasible = rep.needed <= rep.free_slots;
  rep.deficit = rep.feasible ? 0 : rep.needed - rep.free_slots;
  return rep;
}

namespace {

void validate_index(const std::vector<std::size_t>& index, std::size_t columns) {
  for (std::size_t i = 0; i < index.size(); ++i) {
    require(index[i] < columns, "plan_embedding: pruned index out of range");
    if (i > 0) require(index[i] > index[i - 1], "plan_embedding: index not strictly ascending");
  }
}

}  // namespace

PlacementMap plan_embedding(int bit_planes, int candidates, std::size_t columns,
                            std::vector<std::size_t> pruned_index) {
  require(bit_planes >= 1, "plan_embedding: bit_planes must be >= 1");
  require(candidates >= 1, "plan_embedding: candidates must be >= 1");
  require(columns >= 1, "plan_embedding: columns must be >= 1");
  std::sort(pruned_index.begin(), pruned_index.end());
  validate_index(pruned_index, columns);

  PlacementMap map;
  map.bits = bit_planes;
  map.candidates = candidates;
  map.columns = columns;
  map.pruned_index = std::move(pruned_index);

  const std::size_t pruned = map.pruned_index.size();
  const std::size_t unpruned = columns - pruned;
  const std::size_t needed = static_cast<std::size_t>(candidates - 1) * unpruned;
  const std::size_t free_slots = static_cast<std::size_t>(bit_planes) * pruned;
  if (needed > free_slots) {
    CapacityReport rep;
    rep.free_slots = free_slots;
    rep.needed = needed;
    rep.feasible = false;
    rep.deficit = needed - free_slots;
    throw CapacityError("plan_embedding: " + std::to_string(needed) +
                            " duplicate columns need " +
                            std::to_string(rep.deficit) +
                            " more slots than the " +
                            std::to_string(free_slots) + " available",
                        rep);
  }

  // Slot cursor: plane-major, ascending pruned index within a plane.
  std::size_t slot_plane = 0, slot_pos = 0;
  auto next_slot = [&]() {
    if (slot_pos == map.pruned_index.size()) {
      ++slot_plane;
      slot_pos = 0;
    }
    return std::pair{slot_plane, map.pruned_index[slot_pos++]};
  };

  map.assignments.reserve(needed);
  for (int k = 2; k <= candidates; ++k) {
    std::size_t next_pruned = 0;
    for (std::size_t j = 0; j < columns; ++j) {
      if (next_pruned < map.pruned_index.size() && map.pruned_index[next_pruned] == j) {
        ++next_pruned;
        continue;
      }
      auto [plane, col] = next_slot();
      map.assignments.push_back({k, j, plane, col});
    }
  }
  return map;
}

void EmbeddedLayer::rebuild_signals() {
  const std::size_t rows = host.rows, cols = host.cols;

  own_signals.clear();
  own_signals.reserve(host.planes.size());
  for (CrossbarPlane& plane : host.planes) {
    plane.rebuild_signal();
    Matrix own = plane.signal;
    for (std::size_t j : map.pruned_index)
      for (std::size_t i = 0; i < rows; ++i) own.at(i, j) = 0.0;
    own_signals.push_back(std::move(own));
  }

  candidate_signals.assign(static_cast<std::size_t>(map.candidates - 1),
                           Matrix(rows, cols, 0.0));
  for (const Assignment& a : map.assignments) {
    Matrix& sig = candidate_signals[static_cast<std::size_t>(a.candidate - 2)];
    const CrossbarPlane& hp = host.planes[a.host_plane];
    for (std::size_t i = 0; i < rows; ++i) {
      const int ep = effective_cell(hp.pos, i, a.host_col);
      const int en = effective_cell(hp.neg, i, a.host_col);
      const int lp = msb_flipped ? 1 - ep : ep;
      const int ln = msb_flipped ? 1 - en : en;
      sig.at(i, a.src_col) = static_cast<double>(lp - ln);
    }
  }
}

EmbeddedLayer embed_layer(const CrossbarLayer& base, int candidates,
                          const std::vector<std::size_t>& pruned_index) {
  require(!base.planes.empty(), "embed_layer: no planes");
  EmbeddedLayer out;
  out.map = plan_embedding(static_cast<int>(base.planes.size()), candidates,
                           base.cols, pruned_index);
  out.msb_flipped = base.planes[0].flipped;

  // Pruned columns must read logical zero in every plane before embedding.
  for (const CrossbarPlane& plane : base.planes) {
    const std::uint8_t zero_bit = plane.flipped ? 1 : 0;
    for (std::size_t j : out.map.pruned_index)
      for (std::size_t i = 0; i < base.rows; ++i)
        require(plane.pos.stored.at(i, j) == zero_bit &&
                    plane.neg.stored.at(i, j) == zero_bit,
                "embed_layer: pruned column is not zero in a host plane");
  }

  out.host = base;
  const CrossbarPlane& msb = base.planes[0];
  for (const Assignment& a : out.map.assignments) {
    CrossbarPlane& hp = out.host.planes[a.host_plane];
    for (std::size_t i = 0; i < base.rows; ++i) {
      hp.pos.stored.at(i, a.host_col) = msb.pos.stored.at(i, a.src_col);
      hp.neg.stored.at(i, a.host_col) = msb.neg.stored.at(i, a.src_col);
    }
  }
  out.rebuild_signals();
  return out;
}

void inject_embedded_faults(EmbeddedLayer& layer, const FaultModel& model,
                            std::size_t layer_index) {
  for (std::size_t p = 0; p < layer.host.planes.size(); ++p) {
    CrossbarPlane& plane = layer.host.planes[p];
    plane.pos.faults = inject_saf(layer.host.rows, layer.host.cols, model,
                                  fault_stream_id(layer_index, p, 0, false));
    plane.neg.faults = inject_saf(layer.host.rows, layer.host.cols, model,
                                  fault_stream_id(layer_index, p, 0, true));
  }
  layer.rebuild_signals();
}

std::vector<GatheredPlane> gather_embedded(const EmbeddedLayer& layer) {
  const std::size_t rows = layer.host.rows, cols = layer.host.cols;
  std::vector<GatheredPlane> out(static_cast<std::size_t>(layer.map.candidates - 1));
  for (GatheredPlane& g : out) {
    g.pos = BitMatrix(rows, cols, 0);
    g.neg = BitMatrix(rows, cols, 0);
  }
  for (const Assignment& a : layer.map.assignments) {
    GatheredPlane& g = out[static_cast<std::size_t>(a.candidate - 2)];
    const CrossbarPlane& hp = layer.host.planes[a.host_plane];
    for (std::size_t i = 0; i < rows; ++i) {
      g.pos.at(i, a.src_col) = effective_cell(hp.pos, i, a.host_col);
      g.neg.at(i, a.src_col) = effective_cell(hp.neg, i, a.host_col);
    }
  }
  return out;
}

std::vector<double> infer_layer_embedded(const EmbeddedLayer& layer,
                                         std::span<const double> x) {
  require(x.size() == layer.host.rows, "infer_layer_embedded: input length != wordlines");
  const double msb_scale = std::ldexp(1.0, layer.host.planes[0].weight_power);

  std::vector<std::vector<double>> candidates;
  candidates.reserve(static_cast<std::size_t>(layer.map.candidates));
  auto scaled = [&](const Matrix& sig) {
    std::vector<double> part = signal_matvec(sig, x);
    for (double& v : part) v *= msb_scale;
    return part;
  };
  candidates.push_back(scaled(layer.own_signals[0]));
  for (const Matrix& sig : layer.candidate_signals) candidates.push_back(scaled(sig));

  std::vector<double> acc = vote_median(candidates);
  for (std::size_t p = 1; p < layer.host.planes.size(); ++p) {
    const std::vector<double> part = signal_matvec(layer.own_signals[p], x);
    const double scale = std::ldexp(1.0, layer.host.planes[p].weight_power);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += scale * part[j];
  }
  for (double& v : acc) v *= layer.host.q;
  return acc;
}

std::vector<double> infer_network_embedded(const EmbeddedNetwork& net,
                                           std::span<const double> x) {
  require(net.layers.size() == net.biases.size(),
          "infer_network_embedded: bias count mismatch");
  require(!net.layers.empty(), "infer_network_embedded: empty network");
  std::vector<double> cur(x.begin(), x.end());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    std::vector<double> z = infer_layer_embedded(net.layers[l], cur);
    require(z.size() == net.biases[l].size(),
            "infer_network_embedded: bias length mismatch");
    for (std::size_t j = 0; j < z.size(); ++j) z[j] += net.biases[l][j];
    if (l + 1 < net.layers.size())
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    cur = std::move(z);
  }
  return cur;
}

}  // namespace xbarft
