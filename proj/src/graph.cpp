#include "sniper/graph.hpp"

#include <cmath>
#include <stdexcept>

#include "sniper/kernels.hpp"
#include "sniper/rng.hpp"

namespace sniper {

const char* op_kind_name(OpKind k) {
  switch (k) {
    case OpKind::kConstant: return "constant";
    case OpKind::kParameter: return "parameter";
    case OpKind::kMatmul: return "matmul";
    case OpKind::kAddBias: return "add";
    case OpKind::kRelu: return "relu";
    case OpKind::kTanh: return "tanh";
    case OpKind::kMul: return "elementwise-mul";
    case OpKind::kMseLoss: return "mse-loss";
  }
  return "?";
}

NodeId Graph::push(Node n) {
  n.grad = Tensor::zeros(n.value.shape());
  nodes_.push_back(std::move(n));
  evaluated_ = false;
  return nodes_.size() - 1;
}

NodeId Graph::constant(Tensor v) {
  Node n;
  n.kind = OpKind::kConstant;
  n.value = std::move(v);
  return push(std::move(n));
}

NodeId Graph::parameter(Tensor v, std::string name) {
  Node n;
  n.kind = OpKind::kParameter;
  n.value = std::move(v);
  n.name = std::move(name);
  return push(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b, bool trans_a, bool trans_b) {
  const Tensor& va = nodes_.at(a).value;
  const Tensor& vb = nodes_.at(b).value;
  if (va.ndim() != 2 || vb.ndim() != 2) {
    throw std::invalid_argument(std::string("matmul: operands must be 2-d, got ") +
                                va.shape_str() + " and " + vb.shape_str());
  }
  size_t m = trans_a ? va.cols() : va.rows();
  size_t ka = trans_a ? va.rows() : va.cols();
  size_t kb = trans_b ? vb.cols() : vb.rows();
  size_t nn = trans_b ? vb.rows() : vb.cols();
  if (ka != kb) {
    throw std::invalid_argument("matmul: shape mismatch " + va.shape_str() +
                                (trans_a ? "^T" : "") + " * " + vb.shape_str() +
                                (trans_b ? "^T" : ""));
  }
  Node n;
  n.kind = OpKind::kMatmul;
  n.in0 = a;
  n.in1 = b;
  n.trans_a = trans_a;
  n.trans_b = trans_b;
  n.value = Tensor::zeros({m, nn});
  return push(std::move(n));
}

NodeId Graph::add_bias(NodeId x, NodeId bias) {
  const Tensor& vx = nodes_.at(x).value;
  const Tensor& vb = nodes_.at(bias).value;
  if (vb.numel() != vx.cols()) {
    throw std::invalid_argument("add: shape mismatch " + vx.shape_str() + " + " + vb.shape_str());
  }
  Node n;
  n.kind = OpKind::kAddBias;
  n.in0 = x;
  n.in1 = bias;
  n.value = Tensor::zeros(vx.shape());
  return push(std::move(n));
}

NodeId Graph::relu(NodeId x) {
  Node n;
  n.kind = OpKind::kRelu;
  n.in0 = x;
  n.value = Tensor::zeros(nodes_.at(x).value.shape());
  return push(std::move(n));
}

NodeId Graph::tanh_act(NodeId x) {
  Node n;
  n.kind = OpKind::kTanh;
  n.in0 = x;
  n.value = Tensor::zeros(nodes_.at(x).value.shape());
  return push(std::move(n));
}

NodeId Graph::mul(NodeId a, NodeId b) {
  const Tensor& va = nodes_.at(a).value;
  const Tensor& vb = nodes_.at(b).value;
  if (!va.same_shape(vb)) {
    throw std::invalid_argument("elementwise-mul: shape mismatch " + va.shape_str() + " vs " +
                                vb.shape_str());
  }
  Node n;
  n.kind = OpKind::kMul;
  n.in0 = a;
  n.in1 = b;
  n.value = Tensor::zeros(va.shape());
  return push(std::move(n));
}

NodeId Graph::mse_loss(NodeId pred, NodeId target) {
  const Tensor& vp = nodes_.at(pred).value;
  const Tensor& vt = nodes_.at(target).value;
  if (!vp.same_shape(vt)) {
    throw std::invalid_argument("mse-loss: shape mismatch " + vp.shape_str() + " vs " +
                                vt.shape_str());
  }
  Node n;
  n.kind = OpKind::kMseLoss;
  n.in0 = pred;
  n.in1 = target;
  n.value = Tensor::zeros({1});
  return push(std::move(n));
}

void Graph::compute(Node& n) {
  switch (n.kind) {
    case OpKind::kConstant:
    case OpKind::kParameter:
      break;
    case OpKind::kMatmul:
      kernels::matmul(nodes_[n.in0].value, n.trans_a, nodes_[n.in1].value, n.trans_b, n.value);
      break;
    case OpKind::kAddBias:
      kernels::add_bias(nodes_[n.in0].value, nodes_[n.in1].value, n.value);
      break;
    case OpKind::kRelu:
      kernels::relu(nodes_[n.in0].value, n.value);
      break;
    case OpKind::kTanh:
      kernels::tanh_forward(nodes_[n.in0].value, n.value);
      break;
    case OpKind::kMul:
      kernels::mul(nodes_[n.in0].value, nodes_[n.in1].value, n.value);
      break;
    case OpKind::kMseLoss:
      n.value[0] = kernels::mse(nodes_[n.in0].value, nodes_[n.in1].value);
      break;
  }
}

void Graph::forward_to(NodeId root) {
  if (root >= nodes_.size()) throw std::invalid_argument("graph: bad node id");
  for (NodeId i = 0; i <= root; ++i) compute(nodes_[i]);
}

const Tensor& Graph::evaluate(NodeId root) {
  forward_to(root);
  for (NodeId i = 0; i <= root; ++i) nodes_[i].value.check_finite(op_kind_name(nodes_[i].kind));
  evaluated_ = true;
  return nodes_[root].value;
}

void Graph::backward(NodeId root) {
  if (root >= nodes_.size()) throw std::invalid_argument("graph: bad node id");
  if (!evaluated_) {
    throw std::runtime_error("backward: stale graph, evaluate() must run after the last value change");
  }
  if (nodes_[root].value.numel() != 1) {
    throw std::invalid_argument("backward: root must be scalar, got " +
                                nodes_[root].value.shape_str());
  }
  for (Node& n : nodes_) n.grad.fill(0.0);
  nodes_[root].grad[0] = 1.0;

  for (NodeId i = root + 1; i-- > 0;) {
    Node& n = nodes_[i];
    switch (n.kind) {
      case OpKind::kConstant:
      case OpKind::kParameter:
        break;
      case OpKind::kMatmul: {
        // C = op(A) op(B); accumulate dA and dB from dC.
        Node& a = nodes_[n.in0];
        Node& b = nodes_[n.in1];
        if (!n.trans_a) {
          kernels::matmul(n.grad, false, b.value, !n.trans_b, a.grad, /*acc=*/true);
        } else {
          kernels::matmul(b.value, n.trans_b, n.grad, true, a.grad, /*acc=*/true);
        }
        if (!n.trans_b) {
          kernels::matmul(a.value, !n.trans_a, n.grad, false, b.grad, /*acc=*/true);
        } else {
          kernels::matmul(n.grad, true, a.value, n.trans_a, b.grad, /*acc=*/true);
        }
        break;
      }
      case OpKind::kAddBias: {
        Node& x = nodes_[n.in0];
        Node& bias = nodes_[n.in1];
        for (size_t j = 0; j < x.grad.numel(); ++j) x.grad[j] += n.grad[j];
        kernels::col_sum_acc(n.grad, bias.grad);
        break;
      }
      case OpKind::kRelu:
        kernels::relu_backward_acc(nodes_[n.in0].value, n.grad, nodes_[n.in0].grad);
        break;
      case OpKind::kTanh:
        kernels::tanh_backward_acc(n.value, n.grad, nodes_[n.in0].grad);
        break;
      case OpKind::kMul:
        kernels::mul_backward_acc(n.grad, nodes_[n.in1].value, nodes_[n.in0].grad);
        kernels::mul_backward_acc(n.grad, nodes_[n.in0].value, nodes_[n.in1].grad);
        break;
      case OpKind::kMseLoss:
        kernels::mse_backward_acc(nodes_[n.in0].value, nodes_[n.in1].value, n.grad[0],
                                  nodes_[n.in0].grad);
        break;
    }
  }
  for (NodeId i = 0; i <= root; ++i) nodes_[i].grad.check_finite("backward");
}

void Graph::set_value(NodeId id, Tensor v) {
  Node& n = nodes_.at(id);
  if (n.kind != OpKind::kConstant && n.kind != OpKind::kParameter) {
    throw std::invalid_argument("set_value: only leaf nodes can be assigned");
  }
  if (!n.value.same_shape(v)) {
    throw std::invalid_argument("set_value: shape mismatch " + n.value.shape_str() + " vs " +
                                v.shape_str());
  }
  n.value = std::move(v);
  evaluated_ = false;
}

double Graph::finite_diff_gradient(NodeId root, NodeId leaf, size_t index, double epsilon) {
  if (epsilon <= 0.0) throw std::invalid_argument("finite_diff_gradient: epsilon must be > 0");
  Node& n = nodes_.at(leaf);
  if (n.kind != OpKind::kConstant && n.kind != OpKind::kParameter) {
    throw std::invalid_argument("finite_diff_gradient: leaf must be a constant or parameter");
  }
  if (index >= n.value.numel()) {
    throw std::invalid_argument("finite_diff_gradient: index out of range");
  }
  if (nodes_.at(root).value.numel() != 1) {
    throw std::invalid_argument("finite_diff_gradient: root must be scalar");
  }
  const double saved = n.value[index];
  n.value[index] = saved + epsilon;
  forward_to(root);
  const double plus = nodes_[root].value[0];
  n.value[index] = saved - epsilon;
  forward_to(root);
  const double minus = nodes_[root].value[0];
  n.value[index] = saved;
  forward_to(root);  // restore cached values
  return (plus - minus) / (2.0 * epsilon);
}

Tensor xavier_init(const std::vector<size_t>& shape, uint64_t seed) {
  Tensor t(shape);  // rejects zero-sized dimensions
  size_t fan_out = shape.front();
  size_t fan_in = shape.back();
  double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Rng rng(seed);
  for (size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

}  // namespace sniper
