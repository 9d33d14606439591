#include "xbarft/xbar.hpp"

#include <algorithm>
#include <cmath>

#include "xbarft/rng.hpp"

namespace xbarft {

const Fault* FaultMap::find(std::uint32_t row, std::uint32_t col) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), std::pair{row, col},
                             [](const Fault& f, const std::pair<std::uint32_t, std::uint32_t>& key) {
                               return std::pair{f.row, f.col} < key;
                             });
  if (it != entries.end() && it->row == row && it->col == col) return &*it;
  return nullptr;
}

FaultMap inject_saf(std::size_t rows, std::size_t cols, const FaultModel& model,
                    std::uint64_t stream_id) {
  require(model.rate >= 0.0 && model.rate <= 1.0, "inject_saf: rate out of [0,1]");
  require(model.sa1_share >= 0.0 && model.sa1_share <= 1.0,
          "inject_saf: sa1_share out of [0,1]");
  FaultMap map;
  if (model.rate <= 0.0) return map;
  const std::uint64_t base = hash2(model.seed, stream_id);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const std::uint64_t h =
          hash2(base, (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j));
      if (unit_double(h) >= model.rate) continue;
      const std::uint8_t stuck = unit_double(splitmix64(h)) < model.sa1_share ? 1 : 0;
      map.entries.push_back({static_cast<std::uint32_t>(i),
                             static_cast<std::uint32_t>(j), stuck});
    }
  }
  return map;
}

std::uint8_t effective_cell(const CellArray& a, std::size_t i, std::size_t j) {
  if (i >= a.stored.rows || j >= a.stored.cols)
    throw std::out_of_range("effective_cell: coordinates out of bounds");
  if (const Fault* f = a.faults.find(static_cast<std::uint32_t>(i),
                                     static_cast<std::uint32_t>(j)))
    return f->stuck;
  return a.stored.at(i, j);
}

namespace {

// Stored bits overlaid with the stuck cells.
BitMatrix effective_bits(const CellArray& a) {
  BitMatrix out = a.stored;
  for (const Fault& f : a.faults.entries) out.at(f.row, f.col) = f.stuck;
  return out;
}

}  // namespace

void CrossbarPlane::rebuild_signal() {
  const BitMatrix ep = effective_bits(pos);
  const BitMatrix en = effective_bits(neg);
  signal = Matrix(rows(), cols());
  for (std::size_t idx = 0; idx < signal.data.size(); ++idx) {
    int lp = flipped ? 1 - ep.data[idx] : ep.data[idx];
    int ln = flipped ? 1 - en.data[idx] : en.data[idx];
    signal.data[idx] = static_cast<double>(lp - ln);
  }
}

CrossbarPlane with_faults(const CrossbarPlane& plane, FaultMap pos_faults,
                          FaultMap neg_faults) {
  CrossbarPlane out = plane;
  out.pos.faults = std::move(pos_faults);
  out.neg.faults = std::move(neg_faults);
  if (!out.pos.faults.empty() || !out.neg.faults.empty() ||
      !plane.pos.faults.empty() || !plane.neg.faults.empty())
    out.rebuild_signal();
  return out;
}

CrossbarLayer map_layer(const QuantizedLayer& layer, FlipPolicy policy) {
  CrossbarLayer out;
  out.q = layer.q;
  out.bits = layer.bits;
  out.rows = layer.rows;
  out.cols = layer.cols;
  out.planes.reserve(layer.planes.size());
  for (std::size_t p = 0; p < layer.planes.size(); ++p) {
    CrossbarPlane plane;
    plane.weight_power = layer.bits - 1 - static_cast<int>(p);
    plane.flipped = policy == FlipPolicy::all ||
                    (policy == FlipPolicy::msb_only && p == 0);
    plane.pos.stored = BitMatrix(layer.rows, layer.cols, 0);
    plane.neg.stored = BitMatrix(layer.rows, layer.cols, 0);
    const BitMatrix& bits = layer.planes[p];
    for (std::size_t idx = 0; idx < bits.data.size(); ++idx) {
      std::uint8_t bp = layer.sign.data[idx] > 0 ? bits.data[idx] : 0;
      std::uint8_t bn = layer.sign.data[idx] < 0 ? bits.data[idx] : 0;
      if (plane.flipped) {
        bp = 1 - bp;
        bn = 1 - bn;
      }
      plane.pos.stored.data[idx] = bp;
      plane.neg.stored.data[idx] = bn;
    }
    plane.rebuild_signal();
    out.planes.push_back(std::move(plane));
  }
  return out;
}

std::vector<double> plane_partial(const CrossbarPlane& plane,
                                  std::span<const double> x) {
  require(x.size() == plane.rows(), "plane_partial: input length != wordlines");
  return signal_matvec(plane.signal, x);
}

std::vector<double> layer_matvec(const CrossbarLayer& layer,
                                 std::span<const double> x) {
  require(x.size() == layer.rows, "layer_matvec: input length != wordlines");
  require(!layer.planes.empty(), "layer_matvec: no planes");
  std::vector<double> acc = plane_partial(layer.planes[0], x);
  {
    const double scale = std::ldexp(1.0, layer.planes[0].weight_power);
    for (double& v : acc) v *= scale;
  }
  for (std::size_t p = 1; p < layer.planes.size(); ++p) {
    const std::vector<double> part = plane_partial(layer.planes[p], x);
    const double scale = std::ldexp(1.0, layer.planes[p].weight_power);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += scale * part[j];
  }
  for (double& v : acc) v *= layer.q;
  return acc;
}

}  // namespace xbarft
