#ifndef XBARFT_MATRIX_HPP
#define XBARFT_MATRIX_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace xbarft {

// Dense row-major grid. Matrix is the real-valued case; bit planes and sign
// matrices use the integer instantiations.
template <typename T>
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(std::size_t r, std::size_t c, T fill = T{})
      : rows(r), cols(c), data(r * c, fill) {}

  T& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const T& at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  bool operator==(const Grid&) const = default;
};

using Matrix = Grid<double>;
using BitMatrix = Grid<std::uint8_t>;  // entries 0/1
using SignMatrix = Grid<std::int8_t>;  // entries -1/+1

inline void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double max_abs(const Matrix& m);

// out[j] = sum_i x[i] * m(i, j), accumulated in ascending row order.
// Every matrix-vector product in the library goes through this kernel so
// that results required to agree exactly share one summation order.
std::vector<double> signal_matvec(const Matrix& m, std::span<const double> x);

}  // namespace xbarft

#endif
