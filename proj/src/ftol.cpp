#include "xbarft/ftol.hpp"

#include <algorithm>
#include <cmath>

namespace xbarft {

std::uint64_t fault_stream_id(std::size_t layer, std::size_t plane,
                              std::size_t candidate, bool neg_array) {
  return (static_cast<std::uint64_t>(layer) << 20) |
         (static_cast<std::uint64_t>(plane) << 12) |
         (static_cast<std::uint64_t>(candidate) << 4) |
         (neg_array ? 1u : 0u);
}

FtLayer duplicate_msb(const CrossbarLayer& layer, const FtConfig& cfg,
                      std::size_t layer_index) {
  require(cfg.candidates >= 1, "duplicate_msb: candidates must be >= 1");
  require(cfg.candidates % 2 == 1, "duplicate_msb: candidates must be odd");
  require(!layer.planes.empty(), "duplicate_msb: no planes");

  FtLayer out;
  out.base = layer;
  const std::size_t rows = layer.rows, cols = layer.cols;

  auto inject = [&](CrossbarPlane& plane, std::size_t plane_idx, std::size_t cand) {
    FaultMap pf = inject_saf(rows, cols, cfg.fault,
                             fault_stream_id(layer_index, plane_idx, cand, false));
    FaultMap nf = inject_saf(rows, cols, cfg.fault,
                             fault_stream_id(layer_index, plane_idx, cand, true));
    plane = with_faults(plane, std::move(pf), std::move(nf));
  };

  for (std::size_t p = 0; p < out.base.planes.size(); ++p)
    inject(out.base.planes[p], p, 0);

  out.msb_dups.reserve(static_cast<std::size_t>(cfg.candidates - 1));
  for (int k = 1; k < cfg.candidates; ++k) {
    CrossbarPlane dup = layer.planes[0];  // shares logical bits, fault-free copy
    inject(dup, 0, static_cast<std::size_t>(k));
    out.msb_dups.push_back(std::move(dup));
  }
  return out;
}

std::vector<double> vote_median(const std::vector<std::vector<double>>& candidates) {
  require(!candidates.empty(), "vote_median: no candidates");
  require(candidates.size() % 2 == 1, "vote_median: candidate count must be odd");
  const std::size_t n = candidates[0].size();
  for (const auto& c : candidates)
    require(c.size() == n, "vote_median: candidate length mismatch");

  std::vector<double> out(n);
  std::vector<double> column(candidates.size());
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < candidates.size(); ++k) column[k] = candidates[k][j];
    auto mid = column.begin() + static_cast<std::ptrdiff_t>(column.size() / 2);
    std::nth_element(column.begin(), mid, column.end());
    out[j] = *mid;
  }
  return out;
}

std::vector<double> infer_layer_ft(const FtLayer& ft, std::span<const double> x) {
  require(x.size() == ft.base.rows, "infer_layer_ft: input length != wordlines");
  const double msb_scale = std::ldexp(1.0, ft.base.planes[0].weight_power);

  std::vector<std::vector<double>> candidates;
  candidates.reserve(static_cast<std::size_t>(ft.candidates()));
  auto scaled_partial = [&](const CrossbarPlane& plane) {
    std::vector<double> part = plane_partial(plane, x);
    for (double& v : part) v *= msb_scale;
    return part;
  };
  candidates.push_back(scaled_partial(ft.base.planes[0]));
  for (const CrossbarPlane& dup : ft.msb_dups) candidates.push_back(scaled_partial(dup));

  std::vector<double> acc = vote_median(candidates);
  for (std::size_t p = 1; p < ft.base.planes.size(); ++p) {
    const std::vector<double> part = plane_partial(ft.base.planes[p], x);
    const double scale = std::ldexp(1.0, ft.base.planes[p].weight_power);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += scale * part[j];
  }
  for (double& v : acc) v *= ft.base.q;
  return acc;
}

std::vector<double> infer_network_ft(const FtNetwork& net, std::span<const double> x) {
  require(net.layers.size() == net.biases.size(), "infer_network_ft: bias count mismatch");
  require(!net.layers.empty(), "infer_network_ft: empty network");
  std::vector<double> cur(x.begin(), x.end());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    std::vector<double> z = infer_layer_ft(net.layers[l], cur);
    require(z.size() == net.biases[l].size(), "infer_network_ft: bias length mismatch");
    for (std::size_t j = 0; j < z.size(); ++j) z[j] += net.biases[l][j];
    if (l + 1 < net.layers.size())
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    cur = std::move(z);
  }
  return cur;
}

}  // namespace xbarft
