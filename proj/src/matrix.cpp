#include "xbarft/matrix.hpp"

#include <cmath>

namespace xbarft {

double max_abs(const Matrix& m) {
  double best = 0.0;
  for (double v : m.data) {
    double a = std::fabs(v);
    if (a > best) best = a;
  }
  return best;
}

std::vector<double> signal_matvec(const Matrix& m, std::span<const double> x) {
  require(x.size() == m.rows, "signal_matvec: input length != rows");
  std::vector<double> out(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = m.data.data() + i * m.cols;
    for (std::size_t j = 0; j < m.cols; ++j) out[j] += xi * row[j];
  }
  return out;
}

}  // namespace xbarft
