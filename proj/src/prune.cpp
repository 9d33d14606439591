#include "xbarft/prune.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "xbarft/rng.hpp"

namespace xbarft {

std::vector<std::uint8_t> mask_of(std::span<const double> gates) {
  std::vector<std::uint8_t> mask(gates.size());
  for (std::size_t i = 0; i < gates.size(); ++i) mask[i] = gates[i] > 0.0 ? 1 : 0;
  return mask;
}

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

namespace {

std::size_t structure_count(const GatedLayer& layer) {
  return layer.axis == StructureAxis::column ? layer.out_dim() : layer.in_dim();
}

void validate_layer(const GatedLayer& layer) {
  require(!layer.weight.empty(), "gated layer: empty weight");
  require(layer.bias.size() == layer.out_dim(), "gated layer: bias length mismatch");
  require(layer.gate_params.size() == structure_count(layer),
          "gated layer: gate count must match the pruned axis");
}

std::vector<double> softmax(std::span<const double> z) {
  double m = z[0];
  for (double v : z) m = std::max(m, v);
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    p[j] = std::exp(z[j] - m);
    sum += p[j];
  }
  for (double& v : p) v /= sum;
  return p;
}

double cross_entropy(std::span<const double> z, int label) {
  double m = z[0];
  for (double v : z) m = std::max(m, v);
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  return std::log(sum) - (z[static_cast<std::size_t>(label)] - m);
}

std::size_t open_gates(const GatedNetwork& net) {
  std::size_t open = 0;
  for (const GatedLayer& layer : net.layers)
    for (double g : layer.gate_params)
      if (g > 0.0) ++open;
  return open;
}

}  // namespace

Matrix masked_weight(const GatedLayer& layer) {
  validate_layer(layer);
  Matrix h = layer.weight;
  const std::vector<std::uint8_t> mask = mask_of(layer.gate_params);
  if (layer.axis == StructureAxis::column) {
    for (std::size_t j = 0; j < h.cols; ++j)
      if (!mask[j])
        for (std::size_t i = 0; i < h.rows; ++i) h.at(i, j) = 0.0;
  } else {
    for (std::size_t i = 0; i < h.rows; ++i)
      if (!mask[i])
        for (std::size_t j = 0; j < h.cols; ++j) h.at(i, j) = 0.0;
  }
  return h;
}

std::vector<double> forward_masked(const GatedNetwork& net,
                                   std::span<const double> x) {
  require(!net.layers.empty(), "forward_masked: empty network");
  std::vector<double> cur(x.begin(), x.end());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const GatedLayer& layer = net.layers[l];
    require(cur.size() == layer.in_dim(), "forward_masked: dimension mismatch");
    std::vector<double> z = signal_matvec(masked_weight(layer), cur);
    for (std::size_t j = 0; j < z.size(); ++j) z[j] += layer.bias[j];
    if (l + 1 < net.layers.size())
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    cur = std::move(z);
  }
  return cur;
}

double total_loss(const GatedNetwork& net, const Matrix& xs,
                  const std::vector<int>& ys, std::span<const std::size_t> idx,
                  double mu) {
  require(!idx.empty(), "total_loss: empty batch");
  double task = 0.0;
  std::vector<double> x(xs.cols);
  for (std::size_t s : idx) {
    for (std::size_t j = 0; j < xs.cols; ++j) x[j] = xs.at(s, j);
    task += cross_entropy(forward_masked(net, x), ys[s]);
  }
  task /= static_cast<double>(idx.size());
  return task + mu * static_cast<double>(open_gates(net));
}

Gradients backward(const GatedNetwork& net, const Matrix& xs,
                   const std::vector<int>& ys, std::span<const std::size_t> idx,
                   double mu) {
  require(!idx.empty(), "backward: empty batch");
  const std::size_t n_layers = net.layers.size();

  std::vector<Matrix> masked(n_layers);
  std::vector<std::vector<std::uint8_t>> masks(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    masks[l] = mask_of(net.layers[l].gate_params);
    masked[l] = masked_weight(net.layers[l]);
  }

  Gradients g;
  g.layers.resize(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    g.layers[l].weight = Matrix(net.layers[l].in_dim(), net.layers[l].out_dim());
    g.layers[l].bias.assign(net.layers[l].out_dim(), 0.0);
    g.layers[l].gates.assign(net.layers[l].gate_params.size(), 0.0);
  }

  std::vector<std::vector<double>> inputs(n_layers + 1);
  std::vector<std::vector<double>> preacts(n_layers);
  for (std::size_t s : idx) {
    inputs[0].assign(xs.data.begin() + static_cast<std::ptrdiff_t>(s * xs.cols),
                     xs.data.begin() + static_cast<std::ptrdiff_t>((s + 1) * xs.cols));
    for (std::size_t l = 0; l < n_layers; ++l) {
      std::vector<double> z = signal_matvec(masked[l], inputs[l]);
      for (std::size_t j = 0; j < z.size(); ++j) z[j] += net.layers[l].bias[j];
      preacts[l] = z;
      if (l + 1 < n_layers)
        for (double& v : z) v = v > 0.0 ? v : 0.0;
      inputs[l + 1] = std::move(z);
    }

    std::vector<double> delta = softmax(preacts[n_layers - 1]);
    delta[static_cast<std::size_t>(ys[s])] -= 1.0;

    for (std::size_t l = n_layers; l-- > 0;) {
      LayerGrads& lg = g.layers[l];
      const std::vector<double>& in = inputs[l];
      for (std::size_t r = 0; r < in.size(); ++r) {
        if (in[r] == 0.0) continue;
        double* grow = lg.weight.data.data() + r * lg.weight.cols;
        for (std::size_t c = 0; c < delta.size(); ++c) grow[c] += in[r] * delta[c];
      }
      for (std::size_t c = 0; c < delta.size(); ++c) lg.bias[c] += delta[c];
      if (l == 0) break;
      std::vector<double> prev(in.size(), 0.0);
      const Matrix& h = masked[l];
      for (std::size_t r = 0; r < prev.size(); ++r) {
        const double* hrow = h.data.data() + r * h.cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < delta.size(); ++c) acc += hrow[c] * delta[c];
        prev[r] = preacts[l - 1][r] > 0.0 ? acc : 0.0;
      }
      delta = std::move(prev);
    }
  }

  const double inv = 1.0 / static_cast<double>(idx.size());
  for (std::size_t l = 0; l < n_layers; ++l) {
    LayerGrads& lg = g.layers[l];
    for (double& v : lg.weight.data) v *= inv;  // d(task)/dH, mean over batch
    for (double& v : lg.bias) v *= inv;

    // Gate gradient: contraction over the structure plus the penalty, then
    // the Softplus surrogate. Uses the unmasked d/dH, so it must run before
    // the mask is applied to the weight gradient.
    const GatedLayer& layer = net.layers[l];
    for (std::size_t i = 0; i < lg.gates.size(); ++i) {
      double contraction = 0.0;
      if (layer.axis == StructureAxis::column) {
        for (std::size_t r = 0; r < layer.in_dim(); ++r)
          contraction += lg.weight.at(r, i) * layer.weight.at(r, i);
      } else {
        for (std::size_t c = 0; c < layer.out_dim(); ++c)
          contraction += lg.weight.at(i, c) * layer.weight.at(i, c);
      }
      lg.gates[i] = (contraction + mu) * softplus(layer.gate_params[i]);
    }

    if (layer.axis == StructureAxis::column) {
      for (std::size_t c = 0; c < layer.out_dim(); ++c)
        if (!masks[l][c])
          for (std::size_t r = 0; r < layer.in_dim(); ++r) lg.weight.at(r, c) = 0.0;
    } else {
      for (std::size_t r = 0; r < layer.in_dim(); ++r)
        if (!masks[l][r])
          for (std::size_t c = 0; c < layer.out_dim(); ++c) lg.weight.at(r, c) = 0.0;
    }
  }
  return g;
}

MomentumState make_momentum_state(const GatedNetwork& net) {
  MomentumState st;
  for (const GatedLayer& layer : net.layers) {
    st.vel_weight.emplace_back(layer.in_dim(), layer.out_dim());
    st.vel_bias.emplace_back(layer.out_dim(), 0.0);
  }
  return st;
}

void step_weights(GatedNetwork& net, const Gradients& grads, double lr,
                  MomentumState& state) {
  constexpr double kMomentum = 0.9;
  require(grads.layers.size() == net.layers.size(), "step_weights: layer mismatch");
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    GatedLayer& layer = net.layers[l];
    const LayerGrads& lg = grads.layers[l];
    Matrix& vel = state.vel_weight[l];
    const std::vector<std::uint8_t> mask = mask_of(layer.gate_params);
    for (std::size_t r = 0; r < layer.in_dim(); ++r) {
      for (std::size_t c = 0; c < layer.out_dim(); ++c) {
        const bool open = layer.axis == StructureAxis::column ? mask[c] : mask[r];
        double& v = vel.at(r, c);
        if (!open) {
          v = 0.0;  // pruned weights stay frozen, stale momentum discarded
          continue;
        }
        v = kMomentum * v + lg.weight.at(r, c);
        layer.weight.at(r, c) -= lr * v;
      }
    }
    std::vector<double>& vb = state.vel_bias[l];
    for (std::size_t c = 0; c < layer.out_dim(); ++c) {
      vb[c] = kMomentum * vb[c] + lg.bias[c];
      layer.bias[c] -= lr * vb[c];
    }
  }
}

void step_gates(GatedNetwork& net, const Gradients& grads, double gate_lr) {
  require(grads.layers.size() == net.layers.size(), "step_gates: layer mismatch");
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    GatedLayer& layer = net.layers[l];
    for (std::size_t i = 0; i < layer.gate_params.size(); ++i)
      layer.gate_params[i] -= gate_lr * grads.layers[l].gates[i];
  }
}

void validate(const PruneConfig& cfg) {
  require(cfg.mu >= 0.0, "prune: mu must be >= 0");
  require(cfg.weight_lr > 0.0, "prune: weight_lr must be > 0");
  require(cfg.gate_lr > 0.0, "prune: gate_lr must be > 0");
  require(cfg.epochs_joint >= 0 && cfg.epochs_finetune >= 0, "prune: epochs must be >= 0");
  require(cfg.batch_size >= 1, "prune: batch_size must be >= 1");
}

namespace {

GatedNetwork init_network(const PruneConfig& cfg, std::size_t in_dim,
                          std::size_t classes) {
  Rng rng(hash2(cfg.seed, 1));
  GatedNetwork net;
  std::vector<std::size_t> dims;
  dims.push_back(in_dim);
  for (std::size_t h : cfg.hidden_dims) dims.push_back(h);
  dims.push_back(classes);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    GatedLayer layer;
    layer.weight = Matrix(dims[l], dims[l + 1]);
    const double scale = std::sqrt(2.0 / static_cast<double>(dims[l]));
    for (double& v : layer.weight.data) v = scale * rng.normal();
    // Slightly positive biases keep relu' alive at a freshly closed column
    // (its pre-activation collapses to the bias), so a useful gate still
    // receives a reopening gradient instead of dying with the ReLU.
    layer.bias.assign(dims[l + 1], 0.1);
    layer.gate_params.assign(dims[l + 1], 1.0);  // all gates start open
    layer.axis = StructureAxis::column;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

double overall_sparsity(const GatedNetwork& net) {
  std::size_t closed = 0, total = 0;
  for (const GatedLayer& layer : net.layers)
    for (double g : layer.gate_params) {
      closed += g > 0.0 ? 0 : 1;
      ++total;
    }
  return static_cast<double>(closed) / static_cast<double>(total);
}

// One pass of minibatch training. update_gates also controls whether the
// sparsity penalty enters the gradients. While gates are training, the phase
// ends as soon as the sparsity target is reached: under the Softplus STE the
// gate parameters of a fitted network drift down almost in lockstep, so the
// closing wave sweeps the whole sparsity range within an epoch and the batch
// granularity of this check decides where the masks freeze.
void run_epochs(GatedNetwork& net, const Dataset& data, const PruneConfig& cfg,
                int epochs, double mu, bool update_gates, Rng& shuffle_rng,
                std::vector<double>* loss_trace) {
  MomentumState state = make_momentum_state(net);
  std::vector<std::size_t> order(data.train_x.rows);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> all = order;

  for (int e = 0; e < epochs; ++e) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::span<const std::size_t> batch(order.data() + start, stop - start);
      Gradients g = backward(net, data.train_x, data.train_y, batch, mu);
      step_weights(net, g, cfg.weight_lr, state);
      if (update_gates) {
        step_gates(net, g, cfg.gate_lr);
        if (cfg.target_min_sparsity > 0.0 &&
            overall_sparsity(net) >= cfg.target_min_sparsity) {
          epochs = 0;  // target reached, finish this epoch's bookkeeping and stop
          break;
        }
      }
    }
    const double epoch_loss = total_loss(net, data.train_x, data.train_y, all, mu);
    if (!std::isfinite(epoch_loss))
      throw std::runtime_error("train_prune: loss diverged to " +
                               std::to_string(epoch_loss) + " at epoch " +
                               std::to_string(e));
    if (loss_trace) loss_trace->push_back(epoch_loss);
  }
}

double test_accuracy(const GatedNetwork& net, const Dataset& data) {
  return accuracy_percent(
      [&](std::span<const double> x) { return forward_masked(net, x); },
      data.test_x, data.test_y);
}

}  // namespace

std::pair<GatedNetwork, PruneReport> train_prune(const PruneConfig& cfg,
                                                 const Dataset& data) {
  validate(cfg);
  require(data.train_x.rows == data.train_y.size() && data.train_x.rows > 0,
          "train_prune: bad train split");
  require(data.test_x.rows == data.test_y.size() && data.test_x.rows > 0,
          "train_prune: bad test split");

  const GatedNetwork init =
      init_network(cfg, data.train_x.cols, static_cast<std::size_t>(data.classes));

  // Same-seed unpruned baseline: identical init, no penalty, gates pinned open.
  GatedNetwork baseline = init;
  {
    Rng shuffle_rng(hash2(cfg.seed, 2));
    run_epochs(baseline, data, cfg, cfg.epochs_joint + cfg.epochs_finetune, 0.0,
               false, shuffle_rng, nullptr);
  }

  GatedNetwork net = init;
  PruneReport report;
  {
    Rng shuffle_rng(hash2(cfg.seed, 3));
    run_epochs(net, data, cfg, cfg.epochs_joint, cfg.mu, true, shuffle_rng,
               &report.loss_trace);
    run_epochs(net, data, cfg, cfg.epochs_finetune, cfg.mu, false, shuffle_rng,
               &report.loss_trace);
  }

  report.baseline_accuracy = test_accuracy(baseline, data);
  report.pruned_accuracy = test_accuracy(net, data);

  std::size_t closed_total = 0, total = 0;
  for (const GatedLayer& layer : net.layers) {
    const std::vector<std::uint8_t> mask = mask_of(layer.gate_params);
    std::vector<std::size_t> pruned;
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (!mask[i]) pruned.push_back(i);
    report.layer_sparsity.push_back(static_cast<double>(pruned.size()) /
                                    static_cast<double>(mask.size()));
    closed_total += pruned.size();
    total += mask.size();
    report.pruned_index.push_back(std::move(pruned));
  }
  report.overall_sparsity =
      static_cast<double>(closed_total) / static_cast<double>(total);
  report.meets_target =
      report.overall_sparsity >= cfg.target_min_sparsity &&
      (report.baseline_accuracy - report.pruned_accuracy) <= cfg.target_max_acc_drop;
  return {std::move(net), std::move(report)};
}

PrunedModel hard_prune(const GatedNetwork& net) {
  require(!net.layers.empty(), "hard_prune: empty network");
  for (const GatedLayer& layer : net.layers)
    require(layer.axis == StructureAxis::column,
            "hard_prune: only column-pruned networks are supported");

  PrunedModel out;
  std::size_t closed_total = 0, total = 0;
  for (const GatedLayer& layer : net.layers) {
    LayerSpec spec;
    spec.weight = masked_weight(layer);
    spec.bias = layer.bias;
    const std::vector<std::uint8_t> mask = mask_of(layer.gate_params);
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (!mask[i]) spec.pruned_cols.push_back(i);
    out.layer_sparsity.push_back(static_cast<double>(spec.pruned_cols.size()) /
                                 static_cast<double>(mask.size()));
    closed_total += spec.pruned_cols.size();
    total += mask.size();
    out.pruned_cols.push_back(spec.pruned_cols);
    out.masked.layers.push_back(std::move(spec));
  }
  out.overall_sparsity = static_cast<double>(closed_total) / static_cast<double>(total);

  // Compact view: drop pruned hidden columns and the matching next-layer
  // rows; a dropped neuron contributes the constant relu(bias), folded into
  // the next layer's bias. The output layer keeps its columns.
  const std::size_t last = out.masked.layers.size() - 1;
  std::vector<std::size_t> keep_rows;  // surviving inputs of the current layer
  keep_rows.resize(out.masked.layers[0].weight.rows);
  std::iota(keep_rows.begin(), keep_rows.end(), 0);
  std::vector<double> const_in;  // constant activation per dropped input
  std::vector<std::size_t> dropped_rows;

  for (std::size_t l = 0; l < out.masked.layers.size(); ++l) {
    const LayerSpec& src = out.masked.layers[l];
    LayerSpec compact;
    std::vector<std::size_t> keep_cols;
    if (l == last) {
      keep_cols.resize(src.weight.cols);
      std::iota(keep_cols.begin(), keep_cols.end(), 0);
    } else {
      std::size_t next_pruned = 0;
      for (std::size_t c = 0; c < src.weight.cols; ++c) {
        if (next_pruned < src.pruned_cols.size() && src.pruned_cols[next_pruned] == c)
          ++next_pruned;
        else
          keep_cols.push_back(c);
      }
    }

    compact.weight = Matrix(keep_rows.size(), keep_cols.size());
    for (std::size_t r = 0; r < keep_rows.size(); ++r)
      for (std::size_t c = 0; c < keep_cols.size(); ++c)
        compact.weight.at(r, c) = src.weight.at(keep_rows[r], keep_cols[c]);
    compact.bias.resize(keep_cols.size());
    for (std::size_t c = 0; c < keep_cols.size(); ++c) {
      double b = src.bias[keep_cols[c]];
      for (std::size_t d = 0; d < dropped_rows.size(); ++d)
        b += const_in[d] * src.weight.at(dropped_rows[d], keep_cols[c]);
      compact.bias[c] = b;
    }
    out.compact.layers.push_back(std::move(compact));

    if (l == last) break;
    dropped_rows = src.pruned_cols;
    const_in.clear();
    for (std::size_t j : dropped_rows) {
      const double z = src.bias[j];  // weight column is zero
      const_in.push_back(z > 0.0 ? z : 0.0);
    }
    keep_rows = keep_cols;
  }
  return out;
}

}  // namespace xbarft
