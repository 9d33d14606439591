#ifndef XBARFT_DATASET_HPP
#define XBARFT_DATASET_HPP

#include <cstdint>
#include <vector>

#include "xbarft/matrix.hpp"

namespace xbarft {

struct Dataset {
  Matrix train_x;
  std::vector<int> train_y;
  Matrix test_x;
  std::vector<int> test_y;
  int classes = 0;
};

// Balanced Gaussian clusters: class means ~ N(0, mean_scale^2 I), samples
// mean + noise * N(0, I). Feature d is then multiplied by a log-spaced
// scale in [1/feature_spread, feature_spread]; a monotone per-feature
// scaling leaves the Bayes boundary alone but forces the trained
// first-layer weights into a heavy-tailed range, which is the weight
// distribution regime crossbar faults are damaging in. Rows are shuffled;
// everything is a pure function of the seed.
struct DataConfig {
  std::size_t dim = 64;
  int classes = 4;
  std::size_t train = 1024;
  std::size_t test = 512;
  double noise = 2.0;
  double mean_scale = 1.0;
  double feature_spread = 5.0;
  std::uint64_t seed = 7;
};

Dataset make_clusters(const DataConfig& cfg);

}  // namespace xbarft

#endif
