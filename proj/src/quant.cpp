#include "xbarft/quant.hpp"

#include <cmath>
#include <cstdint>

namespace xbarft {

void validate(const QuantConfig& cfg) {
  require(cfg.bits >= 2, "quant: bits must be >= 2");
  require(cfg.bits <= 30, "quant: bits must be <= 30");
}

QuantizedLayer quantize(const Matrix& w, const QuantConfig& cfg) {
  validate(cfg);
  require(!w.empty(), "quantize: empty matrix");

  const int n = cfg.bits;
  const std::int64_t top = (std::int64_t{1} << n) - 1;
  const double amax = max_abs(w);

  QuantizedLayer out;
  out.bits = n;
  out.rows = w.rows;
  out.cols = w.cols;
  out.q = amax > 0.0 ? amax / static_cast<double>(top) : 0.0;
  out.sign = SignMatrix(w.rows, w.cols, +1);
  out.planes.assign(static_cast<std::size_t>(n), BitMatrix(w.rows, w.cols, 0));

  for (std::size_t idx = 0; idx < w.data.size(); ++idx) {
    const double v = w.data[idx];
    if (out.q == 0.0) continue;
    std::int64_t m = std::llround(std::fabs(v) / out.q);  // ties away from zero
    if (m < 0) m = 0;
    if (m > top) m = top;
    // Entries whose magnitude rounds to zero keep sign +1 so that
    // quantize(reconstruct(.)) reproduces signs exactly.
    if (v < 0.0 && m > 0) out.sign.data[idx] = -1;
    for (int p = 0; p < n; ++p)
      out.planes[static_cast<std::size_t>(p)].data[idx] =
          static_cast<std::uint8_t>((m >> (n - 1 - p)) & 1);
  }
  return out;
}

Matrix reconstruct(const QuantizedLayer& layer) {
  const int n = layer.bits;
  Matrix out(layer.rows, layer.cols);
  for (std::size_t idx = 0; idx < out.data.size(); ++idx) {
    std::int64_t m = 0;
    for (int p = 0; p < n; ++p)
      m |= static_cast<std::int64_t>(layer.planes[static_cast<std::size_t>(p)].data[idx])
           << (n - 1 - p);
    out.data[idx] = static_cast<double>(layer.sign.data[idx]) *
                    (layer.q * static_cast<double>(m));
  }
  return out;
}

double quant_error(const Matrix& w, const QuantConfig& cfg) {
  Matrix back = reconstruct(quantize(w, cfg));
  double worst = 0.0;
  for (std::size_t idx = 0; idx < w.data.size(); ++idx) {
    double d = std::fabs(w.data[idx] - back.data[idx]);
    if (d > worst) worst = d;
  }
  return worst;
}

WeightStats distribution_stats(const Matrix& w) {
  require(!w.empty(), "distribution_stats: empty matrix");
  WeightStats st;
  st.max_abs = max_abs(w);
  st.total_count = w.data.size();
  const double half = st.max_abs / 2.0;
  for (double v : w.data)
    if (std::fabs(v) > half) ++st.large_count;
  return st;
}

}  // namespace xbarft
