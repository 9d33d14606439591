#include "xbarft/model.hpp"

namespace xbarft {

std::vector<double> forward_model(const Model& model, std::span<const double> x) {
  require(!model.layers.empty(), "forward_model: empty model");
  std::vector<double> cur(x.begin(), x.end());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LayerSpec& layer = model.layers[l];
    require(cur.size() == layer.weight.rows, "forward_model: dimension mismatch");
    std::vector<double> z = signal_matvec(layer.weight, cur);
    for (std::size_t j = 0; j < z.size(); ++j) z[j] += layer.bias[j];
    if (l + 1 < model.layers.size())
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    cur = std::move(z);
  }
  return cur;
}

Model quantized_dense_model(const Model& model, const QuantConfig& cfg) {
  Model out = model;
  for (LayerSpec& layer : out.layers)
    layer.weight = reconstruct(quantize(layer.weight, cfg));
  return out;
}

}  // namespace xbarft
