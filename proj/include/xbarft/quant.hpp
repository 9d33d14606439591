#ifndef XBARFT_QUANT_HPP
#define XBARFT_QUANT_HPP

#include <cstdint>
#include <vector>

#include "xbarft/matrix.hpp"

namespace xbarft {

// n magnitude bit planes; representable magnitude integers are 0..2^n - 1.
struct QuantConfig {
  int bits = 8;
};

void validate(const QuantConfig& cfg);

// One quantized layer: per-layer step q, sign matrix, and bit planes ordered
// MSB first (planes[p] carries weight 2^(bits-1-p)).
struct QuantizedLayer {
  double q = 0.0;
  int bits = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  SignMatrix sign;
  std::vector<BitMatrix> planes;
};

struct WeightStats {
  double max_abs = 0.0;
  std::size_t large_count = 0;  // entries with |w| strictly above max_abs / 2
  std::size_t total_count = 0;
};

// q = max|W| / (2^n - 1); magnitudes rounded to the nearest level, ties away
// from zero; sign of zero entries is +1. An all-zero matrix quantizes to
// q = 0 with all planes zero.
QuantizedLayer quantize(const Matrix& w, const QuantConfig& cfg);

Matrix reconstruct(const QuantizedLayer& layer);

// max_ij |W - reconstruct(quantize(W))|; bounded by q/2.
double quant_error(const Matrix& w, const QuantConfig& cfg);

WeightStats distribution_stats(const Matrix& w);

}  // namespace xbarft

#endif
