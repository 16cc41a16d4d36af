#pragma once

#include <vector>

#include "ogsbl/rng.hpp"
#include "ogsbl/types.hpp"

namespace ogsbl {

enum class Act { identity, relu, tanh, sigmoid };

Act act_from_string(const std::string& name);

/// Fully-connected network y = act_L(W_L ... act_1(W_1 x + b_1) ... + b_L)
/// with explicit weights and hand-written backprop.
struct Mlp {
  std::vector<MatR> weights;  // [out x in]
  std::vector<VecR> biases;
  std::vector<Act> acts;  // one per layer

  static Mlp create(const std::vector<int>& layer_sizes, const std::vector<Act>& acts, RngStream& rng);

  int input_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.front().cols()); }
  int output_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.back().rows()); }
  std::size_t parameter_count() const;
};

struct MlpCache {
  std::vector<VecR> inputs;       // x fed to each layer
  std::vector<VecR> activations;  // post-activation output of each layer
};

struct MlpGrads {
  std::vector<MatR> dw;
  std::vector<VecR> db;

  static MlpGrads zeros_like(const Mlp& net);
  void accumulate(const MlpGrads& other);
  void scale(double s);
};

VecR mlp_forward(const Mlp& net, const VecR& x, MlpCache* cache = nullptr);

/// Backpropagates dy through the cached forward pass; returns dL/dx and
/// fills grads with dL/dW, dL/db (exact for the computational graph).
VecR mlp_backward(const Mlp& net, const MlpCache& cache, const VecR& dy, MlpGrads& grads);

/// Plain gradient step: params -= lr * grads.
void sgd_step(Mlp& net, const MlpGrads& grads, double lr);

}  // namespace ogsbl
