#ifndef XBARFT_XBAR_HPP
#define XBARFT_XBAR_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "xbarft/matrix.hpp"
#include "xbarft/quant.hpp"

namespace xbarft {

// Stuck-at fault statistics. The SA1 share defaults to the 1.75 : 9.04
// SA0 : SA1 ratio.
struct FaultModel {
  double rate = 0.0;
  double sa1_share = 9.04 / (9.04 + 1.75);
  std::uint64_t seed = 0;
};

struct Fault {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  std::uint8_t stuck = 0;  // cell reads this value regardless of the bit

  bool operator==(const Fault&) const = default;
};

// At most one entry per cell, sorted row-major.
struct FaultMap {
  std::vector<Fault> entries;

  const Fault* find(std::uint32_t row, std::uint32_t col) const;
  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  bool operator==(const FaultMap&) const = default;
};

// Each cell is faulty with probability model.rate, SA1 with probability
// model.sa1_share given faulty. The draw is a pure function of
// (model.seed, stream_id, row, col).
FaultMap inject_saf(std::size_t rows, std::size_t cols, const FaultModel& model,
                    std::uint64_t stream_id);

enum class FlipPolicy { none, msb_only, all };

// One physical array: programmed bits plus the cells stuck by fabrication.
struct CellArray {
  BitMatrix stored;
  FaultMap faults;
};

std::uint8_t effective_cell(const CellArray& a, std::size_t i, std::size_t j);

// Positive/negative array pair for one bit plane. `signal` is the per-cell
// logical read-out (pos minus neg, flip undone, faults applied); it must be
// rebuilt whenever stored bits or faults change.
struct CrossbarPlane {
  CellArray pos;
  CellArray neg;
  bool flipped = false;
  int weight_power = 0;
  Matrix signal;

  std::size_t rows() const { return pos.stored.rows; }
  std::size_t cols() const { return pos.stored.cols; }
  void rebuild_signal();
};

CrossbarPlane with_faults(const CrossbarPlane& plane, FaultMap pos_faults,
                          FaultMap neg_faults);

struct CrossbarLayer {
  double q = 0.0;
  int bits = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<CrossbarPlane> planes;  // MSB first, weight_power = bits-1 .. 0
};

// Splits each bit plane into positive/negative arrays by weight sign and
// applies the flip policy to the stored cells. Fault maps start empty.
CrossbarLayer map_layer(const QuantizedLayer& layer, FlipPolicy policy);

// Corrected pos-minus-neg partial sum of one plane for wordline input x.
std::vector<double> plane_partial(const CrossbarPlane& plane,
                                  std::span<const double> x);

// q * sum_p 2^{w_p} * plane_partial(plane_p, x).
std::vector<double> layer_matvec(const CrossbarLayer& layer,
                                 std::span<const double> x);

}  // namespace xbarft

#endif
