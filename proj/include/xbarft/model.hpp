#ifndef XBARFT_MODEL_HPP
#define XBARFT_MODEL_HPP

#include <span>
#include <vector>

#include "xbarft/matrix.hpp"
#include "xbarft/quant.hpp"

namespace xbarft {

// Plain feed-forward classifier layer: weight is in_dim x out_dim, pruned
// columns (if any) are all-zero in the weight and listed ascending.
struct LayerSpec {
  Matrix weight;
  std::vector<double> bias;
  std::vector<std::size_t> pruned_cols;
};

// ReLU between layers, identity logits at the end.
struct Model {
  std::vector<LayerSpec> layers;
};

std::vector<double> forward_model(const Model& model, std::span<const double> x);

// Same topology with weights replaced by reconstruct(quantize(W)).
Model quantized_dense_model(const Model& model, const QuantConfig& cfg);

// Top-1 accuracy in percent; ties resolve to the lowest class index.
template <typename LogitsFn>
double accuracy_percent(LogitsFn&& logits_fn, const Matrix& xs,
                        const std::vector<int>& ys) {
  require(xs.rows == ys.size() && xs.rows > 0, "accuracy: bad dataset");
  std::size_t hits = 0;
  std::vector<double> x(xs.cols);
  for (std::size_t s = 0; s < xs.rows; ++s) {
    for (std::size_t j = 0; j < xs.cols; ++j) x[j] = xs.at(s, j);
    std::vector<double> logits = logits_fn(std::span<const double>(x));
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.size(); ++j)
      if (logits[j] > logits[best]) best = j;
    if (static_cast<int>(best) == ys[s]) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(xs.rows);
}

}  // namespace xbarft

#endif
