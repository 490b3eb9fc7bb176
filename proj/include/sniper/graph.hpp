#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sniper/tensor.hpp"

namespace sniper {

// Reverse-mode autodiff over a fixed op set, enough to train MLPs and to
// differentiate the loss with respect to mask variables.
//
// A Graph owns its nodes; creation order is evaluation order, so inputs
// always precede their consumers and the structure is acyclic by
// construction. Shape rules are enforced when a node is created and the
// error names the op and both operand shapes.

enum class OpKind : uint8_t {
  kConstant,
  kParameter,
  kMatmul,
  kAddBias,
  kRelu,
  kTanh,
  kMul,
  kMseLoss,
};

const char* op_kind_name(OpKind k);

using NodeId = size_t;
constexpr NodeId kNoNode = std::numeric_limits<size_t>::max();

struct Node {
  OpKind kind = OpKind::kConstant;
  NodeId in0 = kNoNode;
  NodeId in1 = kNoNode;
  bool trans_a = false;  // matmul
  bool trans_b = false;
  std::string name;  // parameters only
  Tensor value;
  Tensor grad;
};

class Graph {
 public:
  NodeId constant(Tensor v);
  NodeId parameter(Tensor v, std::string name);

  NodeId matmul(NodeId a, NodeId b, bool trans_a = false, bool trans_b = false);
  NodeId add_bias(NodeId x, NodeId bias);
  NodeId relu(NodeId x);
  NodeId tanh_act(NodeId x);
  NodeId mul(NodeId a, NodeId b);
  NodeId mse_loss(NodeId pred, NodeId target);

  // Forward pass over every node up to and including root. Node values are
  // cached for backward. Returns the root value.
  const Tensor& evaluate(NodeId root);

  // Reverse pass; requires evaluate() to have run on the current leaf
  // values, otherwise throws a "stale graph" error. Root must be scalar.
  void backward(NodeId root);

  // Central difference dLoss/dLeaf[index] computed from two forward passes.
  // Leaves the graph evaluated at the unperturbed values.
  double finite_diff_gradient(NodeId root, NodeId leaf, size_t index, double epsilon);

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  const Tensor& grad(NodeId id) const { return nodes_[id].grad; }
  const Node& node(NodeId id) const { return nodes_[id]; }
  size_t size() const { return nodes_.size(); }

  // Replace a leaf value; invalidates cached forward results.
  void set_value(NodeId id, Tensor v);

 private:
  NodeId push(Node n);
  void forward_to(NodeId root);
  void compute(Node& n);

  std::vector<Node> nodes_;
  bool evaluated_ = false;
};

// Entries uniform in +-sqrt(6 / (fan_in + fan_out)); fan_out is the leading
// dimension and fan_in the trailing one. Same seed, same bits.
Tensor xavier_init(const std::vector<size_t>& shape, uint64_t seed);

}  // namespace sniper
