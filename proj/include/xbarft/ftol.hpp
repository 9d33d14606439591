#ifndef XBARFT_FTOL_HPP
#define XBARFT_FTOL_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "xbarft/xbar.hpp"

namespace xbarft {

// T total MSB copies (including the original); must be odd so the median is
// well defined.
struct FtConfig {
  int candidates = 3;
  FlipPolicy flip = FlipPolicy::msb_only;
  FaultModel fault;
};

// Distinct fault stream per physical array within a network.
std::uint64_t fault_stream_id(std::size_t layer, std::size_t plane,
                              std::size_t candidate, bool neg_array);

// Layer with duplicated MSB plane pairs. base.planes[0] is the first MSB
// copy; msb_dups holds copies 2..T. All copies share logical bits and differ
// only in their fault maps.
struct FtLayer {
  CrossbarLayer base;
  std::vector<CrossbarPlane> msb_dups;

  int candidates() const { return static_cast<int>(msb_dups.size()) + 1; }
};

// Duplicates the MSB T times and injects stuck-at faults into every physical
// array, one stream per array. `layer` must be fault-free.
FtLayer duplicate_msb(const CrossbarLayer& layer, const FtConfig& cfg,
                      std::size_t layer_index = 0);

// Elementwise median across candidate vectors; size must be odd.
std::vector<double> vote_median(const std::vector<std::vector<double>>& candidates);

// Scaled MSB candidate partials -> median vote -> add LSB partials -> * q.
std::vector<double> infer_layer_ft(const FtLayer& ft, std::span<const double> x);

// ReLU between layers, identity logits at the end; bias added after each
// crossbar product.
struct FtNetwork {
  std::vector<FtLayer> layers;
  std::vector<std::vector<double>> biases;
};

std::vector<double> infer_network_ft(const FtNetwork& net, std::span<const double> x);

}  // namespace xbarft

#endif
