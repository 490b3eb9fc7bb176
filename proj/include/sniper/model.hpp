#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sniper/graph.hpp"
#include "sniper/mask.hpp"
#include "sniper/tensor.hpp"

namespace sniper {

enum class Activation : uint8_t { kRelu, kTanh };

Activation activation_from_string(const std::string& s);
const char* activation_name(Activation a);

// A named, shaped trainable weight. Biases are not maskable.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  bool maskable = false;
};

struct MlpArch {
  std::vector<size_t> layer_sizes;
  Activation activation = Activation::kTanh;
};

class Model {
 public:
  Model(MlpArch arch, std::vector<Param> params, uint64_t init_seed)
      : arch_(std::move(arch)), params_(std::move(params)), init_seed_(init_seed) {}

  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }
  Param* find(const std::string& name);
  const Param* find(const std::string& name) const;

  const MlpArch& arch() const { return arch_; }
  uint64_t init_seed() const { return init_seed_; }

  size_t total_entries() const;     // every trainable entry, biases included
  size_t maskable_entries() const;  // weight entries only
  size_t input_dim() const { return arch_.layer_sizes.front(); }
  size_t output_dim() const { return arch_.layer_sizes.back(); }

  std::vector<Tensor> snapshot() const;  // parameter values, declaration order
  void restore(const std::vector<Tensor>& snap);

  void zero_grads();

 private:
  MlpArch arch_;
  std::vector<Param> params_;
  uint64_t init_seed_ = 0;
};

// Weights Xavier-initialized from `seed` (maskable), biases zero (not
// maskable). Parameter names are layer<i>.weight / layer<i>.bias, 1-based.
Model build_mlp(const std::vector<size_t>& layer_sizes, Activation activation, uint64_t seed);

// Plain forward pass, no graph; x is [batch x d_in].
Tensor model_forward(const Model& model, const Tensor& x);

// A batch loss graph plus handles into it. `param_nodes` parallels
// model.params(); `mask_nodes` holds the mask leaf for each masked param or
// kNoNode where the mask does not apply.
struct LossGraph {
  Graph graph;
  NodeId loss = kNoNode;
  std::vector<NodeId> param_nodes;
  std::vector<NodeId> mask_nodes;
};

// Mean-squared-error loss over the batch; when `mask` is given, every
// maskable parameter covered by it enters the graph as mask (*) weight.
LossGraph batch_loss(const Model& model, const Tensor& batch_x, const Tensor& batch_y,
                     const Mask* mask = nullptr);

}  // namespace sniper
