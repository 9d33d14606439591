#ifndef XBARFT_PRUNE_HPP
#define XBARFT_PRUNE_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "xbarft/dataset.hpp"
#include "xbarft/matrix.hpp"
#include "xbarft/model.hpp"

namespace xbarft {

enum class StructureAxis { row, column };

// Layer with one continuous gate parameter per prunable structure. The
// binary mask is derived, never stored: mask[i] = gate[i] > 0.
struct GatedLayer {
  Matrix weight;                    // in_dim x out_dim
  std::vector<double> bias;         // out_dim
  std::vector<double> gate_params;  // out_dim (column axis) or in_dim (row)
  StructureAxis axis = StructureAxis::column;

  std::size_t in_dim() const { return weight.rows; }
  std::size_t out_dim() const { return weight.cols; }
};

struct GatedNetwork {
  std::vector<GatedLayer> layers;
};

std::vector<std::uint8_t> mask_of(std::span<const double> gates);

// W with pruned structures zeroed (the H(W; M) matrix).
Matrix masked_weight(const GatedLayer& layer);

// ReLU between layers, identity logits at the end.
std::vector<double> forward_masked(const GatedNetwork& net,
                                   std::span<const double> x);

// Mean softmax cross-entropy over the batch plus mu * (open gate count).
double total_loss(const GatedNetwork& net, const Matrix& xs,
                  const std::vector<int>& ys, std::span<const std::size_t> idx,
                  double mu);

struct LayerGrads {
  Matrix weight;              // d(task)/dH * mask  (closed structures get 0)
  std::vector<double> bias;
  std::vector<double> gates;  // (contraction + mu) * softplus(gate)
};

struct Gradients {
  std::vector<LayerGrads> layers;
};

double softplus(double x);

Gradients backward(const GatedNetwork& net, const Matrix& xs,
                   const std::vector<int>& ys, std::span<const std::size_t> idx,
                   double mu);

// Heavy-ball velocity per weight/bias tensor.
struct MomentumState {
  std::vector<Matrix> vel_weight;
  std::vector<std::vector<double>> vel_bias;
};

MomentumState make_momentum_state(const GatedNetwork& net);

// W <- W - lr * v with v <- 0.9 v + g; updates of closed structures are
// pinned to zero so pruned weights stay frozen.
void step_weights(GatedNetwork& net, const Gradients& grads, double lr,
                  MomentumState& state);

// Plain gradient descent on the gate parameters.
void step_gates(GatedNetwork& net, const Gradients& grads, double gate_lr);

struct PruneConfig {
  double mu = 0.1;
  double weight_lr = 0.05;
  double gate_lr = 0.02;
  int epochs_joint = 60;   // upper bound; the phase ends at the sparsity target
  int epochs_finetune = 20;
  int batch_size = 64;
  std::uint64_t seed = 1;
  std::vector<std::size_t> hidden_dims = {48, 32};
  double target_min_sparsity = 0.30;
  double target_max_acc_drop = 1.0;  // percentage points
};

void validate(const PruneConfig& cfg);

struct PruneReport {
  std::vector<double> layer_sparsity;
  double overall_sparsity = 0.0;
  std::vector<std::vector<std::size_t>> pruned_index;
  double baseline_accuracy = 0.0;
  double pruned_accuracy = 0.0;
  std::vector<double> loss_trace;  // mean total loss per epoch, both phases
  bool meets_target = false;
};

// Phase 1: joint weight + gate updates on the penalized loss. Phase 2:
// masks frozen, weights fine-tuned on the task loss. The baseline accuracy
// comes from an identically initialized run with mu = 0 and gates pinned
// open for the same total epoch budget.
std::pair<GatedNetwork, PruneReport> train_prune(const PruneConfig& cfg,
                                                 const Dataset& data);

// Masked model keeps full dims with zero columns at the pruned indices
// (what gets mapped to crossbars); compact removes pruned hidden columns,
// folding each constant relu(bias) contribution into the next layer's bias.
struct PrunedModel {
  Model masked;
  Model compact;
  std::vector<std::vector<std::size_t>> pruned_cols;
  std::vector<double> layer_sparsity;
  double overall_sparsity = 0.0;
};

// Column-axis networks only (embedding consumes column indices).
PrunedModel hard_prune(const GatedNetwork& net);

}  // namespace xbarft

#endif
