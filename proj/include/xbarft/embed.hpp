#ifndef XBARFT_EMBED_HPP
#define XBARFT_EMBED_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "xbarft/ftol.hpp"
#include "xbarft/xbar.hpp"

namespace xbarft {

struct CapacityReport {
  std::size_t free_slots = 0;
  std::size_t needed = 0;
  bool feasible = false;
  std::size_t deficit = 0;
};

// free = n * round(s*C) zero columns across planes, needed = (T-1) unpruned
// duplicate columns each. Closed-form boundary: s >= (T-1) / (n + T - 1).
CapacityReport capacity_check(int bit_planes, int candidates,
                              double column_sparsity, std::size_t columns);

class CapacityError : public std::runtime_error {
 public:
  CapacityError(const std::string& what, CapacityReport report)
      : std::runtime_error(what), report(report) {}
  CapacityReport report;
};

// One embedded column: duplicate `candidate` (2..T), source column src_col,
// stored at host plane host_plane, column host_col (a pruned index).
struct Assignment {
  int candidate = 0;
  std::size_t src_col = 0;
  std::size_t host_plane = 0;
  std::size_t host_col = 0;
};

struct PlacementMap {
  int bits = 0;
  int candidates = 1;
  std::size_t columns = 0;
  std::vector<std::size_t> pruned_index;  // ascending
  std::vector<Assignment> assignments;
};

// Deterministic fill: sources ordered by candidate then source column; slots
// ordered plane-major (MSB first) then ascending pruned index. Throws
// CapacityError when the sources do not fit.
PlacementMap plan_embedding(int bit_planes, int candidates, std::size_t columns,
                            std::vector<std::size_t> pruned_index);

// Host crossbar whose pruned zero columns carry the duplicate MSB columns.
// own_signals exclude the pruned coordinates (logical zero by pruning);
// candidate_signals[k-2] is duplicate k gathered back into logical layout.
struct EmbeddedLayer {
  CrossbarLayer host;
  PlacementMap map;
  bool msb_flipped = false;

  std::vector<Matrix> own_signals;
  std::vector<Matrix> candidate_signals;

  void rebuild_signals();
};

// Distributes duplicate MSB columns into the pruned zero columns of `base`
// (Index must match the zero columns of every plane). `base` must be
// fault-free; faults are injected afterwards on the host arrays.
EmbeddedLayer embed_layer(const CrossbarLayer& base, int candidates,
                          const std::vector<std::size_t>& pruned_index);

// Stuck-at faults on the n host array pairs, one stream per array.
void inject_embedded_faults(EmbeddedLayer& layer, const FaultModel& model,
                            std::size_t layer_index = 0);

// Effective stored-domain bits of each duplicate, read back from the host
// slots; pruned columns come back as zero.
struct GatheredPlane {
  BitMatrix pos;
  BitMatrix neg;
};
std::vector<GatheredPlane> gather_embedded(const EmbeddedLayer& layer);

std::vector<double> infer_layer_embedded(const EmbeddedLayer& layer,
                                         std::span<const double> x);

struct EmbeddedNetwork {
  std::vector<EmbeddedLayer> layers;
  std::vector<std::vector<double>> biases;
};

std::vector<double> infer_network_embedded(const EmbeddedNetwork& net,
                                           std::span<const double> x);

}  // namespace xbarft

#endif
