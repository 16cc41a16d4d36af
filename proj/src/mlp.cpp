#include "ogsbl/mlp.hpp"

#include <cmath>

namespace ogsbl {

namespace {

double apply_act(Act act, double z) {
  switch (act) {
    case Act::identity: return z;
    case Act::relu: return z > 0.0 ? z : 0.0;
    case Act::tanh: return std::tanh(z);
    case Act::sigmoid: return 1.0 / (1.0 + std::exp(-z));
  }
  return z;
}

// Derivative expressed through the activation value.
double act_grad(Act act, double y) {
  switch (act) {
    case Act::identity: return 1.0;
    case Act::relu: return y > 0.0 ? 1.0 : 0.0;
    case Act::tanh: return 1.0 - y * y;
    case Act::sigmoid: return y * (1.0 - y);
  }
  return 1.0;
}

}  // namespace

Act act_from_string(const std::string& name) {
  if (name == "identity") return Act::identity;
  if (name == "relu") return Act::relu;
  if (name == "tanh") return Act::tanh;
  if (name == "sigmoid") return Act::sigmoid;
  throw DimensionError("unknown activation: " + name);
}

Mlp Mlp::create(const std::vector<int>& layer_sizes, const std::vector<Act>& acts, RngStream& rng) {
  if (layer_sizes.size() < 2 || acts.size() != layer_sizes.size() - 1) {
    throw DimensionError("Mlp::create: need L+1 sizes and L activations");
  }
  Mlp net;
  net.acts = acts;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int in = layer_sizes[l];
    const int out = layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    MatR w(out, in);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) w(r, c) = rng.uniform(-bound, bound);
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(VecR::Zero(out));
  }
  return net;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size()) + static_cast<std::size_t>(biases[l].size());
  }
  return n;
}

MlpGrads MlpGrads::zeros_like(const Mlp& net) {
  MlpGrads g;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    g.dw.push_back(MatR::Zero(net.weights[l].rows(), net.weights[l].cols()));
    g.db.push_back(VecR::Zero(net.biases[l].size()));
  }
  return g;
}

void MlpGrads::accumulate(const MlpGrads& other) {
  for (std::size_t l = 0; l < dw.size(); ++l) {
    dw[l] += other.dw[l];
    db[l] += other.db[l];
  }
}

void MlpGrads::scale(double s) {
  for (std::size_t l = 0; l < dw.size(); ++l) {
    dw[l] *= s;
    db[l] *= s;
  }
}

VecR mlp_forward(const Mlp& net, const VecR& x, MlpCache* cache) {
  if (x.size() != net.input_dim()) throw DimensionError("mlp_forward: input dimension mismatch");
  if (cache) {
    cache->inputs.clear();
    cache->activations.clear();
  }
  VecR h = x;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    if (cache) cache->inputs.push_back(h);
    VecR z = net.weights[l] * h + net.biases[l];
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = apply_act(net.acts[l], z(i));
    h = std::move(z);
    if (cache) cache->activations.push_back(h);
  }
  return h;
}

VecR mlp_backward(const Mlp& net, const MlpCache& cache, const VecR& dy, MlpGrads& grads) {
  if (cache.inputs.size() != net.weights.size()) {
    throw DimensionError("mlp_backward: cache does not match network");
  }
  VecR delta = dy;
  for (int l = static_cast<int>(net.weights.size()) - 1; l >= 0; --l) {
    const VecR& y = cache.activations[static_cast<std::size_t>(l)];
    VecR dz(delta.size());
    for (Eigen::Index i = 0; i < delta.size(); ++i) dz(i) = delta(i) * act_grad(net.acts[static_cast<std::size_t>(l)], y(i));
    grads.dw[static_cast<std::size_t>(l)].noalias() += dz * cache.inputs[static_cast<std::size_t>(l)].transpose();
    grads.db[static_cast<std::size_t>(l)] += dz;
    delta = net.weights[static_cast<std::size_t>(l)].transpose() * dz;
  }
  return delta;
}

void sgd_step(Mlp& net, const MlpGrads& grads, double lr) {
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    net.weights[l] -= lr * grads.dw[l];
    net.biases[l] -= lr * grads.db[l];
  }
}

}  // namespace ogsbl
