#include "xbarft/dataset.hpp"

#include <cmath>
#include <numeric>

#include "xbarft/rng.hpp"

namespace xbarft {

namespace {

std::vector<double> feature_scales(const DataConfig& cfg) {
  std::vector<double> f(cfg.dim, 1.0);
  if (cfg.feature_spread <= 1.0 || cfg.dim < 2) return f;
  const double lo = std::log(1.0 / cfg.feature_spread);
  const double hi = std::log(cfg.feature_spread);
  for (std::size_t d = 0; d < cfg.dim; ++d)
    f[d] = std::exp(lo + (hi - lo) * static_cast<double>(d) /
                             static_cast<double>(cfg.dim - 1));
  return f;
}

void fill_split(Matrix& xs, std::vector<int>& ys, std::size_t count,
                const Matrix& means, const DataConfig& cfg, Rng& rng) {
  const std::vector<double> scales = feature_scales(cfg);
  xs = Matrix(count, cfg.dim);
  ys.resize(count);
  for (std::size_t s = 0; s < count; ++s) {
    const int label = static_cast<int>(s % static_cast<std::size_t>(cfg.classes));
    ys[s] = label;
    for (std::size_t j = 0; j < cfg.dim; ++j)
      xs.at(s, j) = scales[j] * (means.at(static_cast<std::size_t>(label), j) +
                                 cfg.noise * rng.normal());
  }
  // Shuffle rows and labels together.
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  Matrix sx(count, cfg.dim);
  std::vector<int> sy(count);
  for (std::size_t s = 0; s < count; ++s) {
    sy[s] = ys[order[s]];
    for (std::size_t j = 0; j < cfg.dim; ++j) sx.at(s, j) = xs.at(order[s], j);
  }
  xs = std::move(sx);
  ys = std::move(sy);
}

}  // namespace

Dataset make_clusters(const DataConfig& cfg) {
  require(cfg.dim >= 1 && cfg.classes >= 2, "make_clusters: bad shape");
  require(cfg.train >= 1 && cfg.test >= 1, "make_clusters: empty split");
  require(cfg.noise >= 0.0, "make_clusters: negative noise");

  Rng rng(cfg.seed);
  Matrix means(static_cast<std::size_t>(cfg.classes), cfg.dim);
  for (double& v : means.data) v = cfg.mean_scale * rng.normal();

  Dataset data;
  data.classes = cfg.classes;
  fill_split(data.train_x, data.train_y, cfg.train, means, cfg, rng);
  fill_split(data.test_x, data.test_y, cfg.test, means, cfg, rng);
  return data;
}

}  // namespace xbarft
