#include "sniper/model.hpp"

#include <stdexcept>

#include "sniper/kernels.hpp"
#include "sniper/rng.hpp"

namespace sniper {

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  throw std::invalid_argument("unknown activation '" + s + "' (expected relu or tanh)");
}

const char* activation_name(Activation a) {
  return a == Activation::kRelu ? "relu" : "tanh";
}

Param* Model::find(const std::string& name) {
  for (Param& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

const Param* Model::find(const std::string& name) const {
  for (const Param& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

size_t Model::total_entries() const {
  size_t n = 0;
  for (const Param& p : params_) n += p.value.numel();
  return n;
}

size_t Model::maskable_entries() const {
  size_t n = 0;
  for (const Param& p : params_)
    if (p.maskable) n += p.value.numel();
  return n;
}

std::vector<Tensor> Model::snapshot() const {
  std::vector<Tensor> snap;
  snap.reserve(params_.size());
  for (const Param& p : params_) snap.push_back(p.value);
  return snap;
}

void Model::restore(const std::vector<Tensor>& snap) {
  if (snap.size() != params_.size()) throw std::invalid_argument("restore: snapshot size mismatch");
  for (size_t i = 0; i < params_.size(); ++i) {
    if (!snap[i].same_shape(params_[i].value)) {
      throw std::invalid_argument("restore: shape mismatch for " + params_[i].name);
    }
    params_[i].value = snap[i];
  }
}

void Model::zero_grads() {
  for (Param& p : params_) p.grad.fill(0.0);
}

Model build_mlp(const std::vector<size_t>& layer_sizes, Activation activation, uint64_t seed) {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("build_mlp: need at least 2 layer sizes");
  }
  for (size_t s : layer_sizes) {
    if (s == 0) throw std::invalid_argument("build_mlp: layer sizes must be positive");
  }
  std::vector<Param> params;
  for (size_t i = 1; i < layer_sizes.size(); ++i) {
    size_t in = layer_sizes[i - 1];
    size_t out = layer_sizes[i];
    std::string base = "layer" + std::to_string(i);
    Param w;
    w.name = base + ".weight";
    w.value = xavier_init({out, in}, derive_seed(seed, i));
    w.grad = Tensor::zeros({out, in});
    w.maskable = true;
    params.push_back(std::move(w));
    Param b;
    b.name = base + ".bias";
    b.value = Tensor::zeros({out});
    b.grad = Tensor::zeros({out});
    b.maskable = false;
    params.push_back(std::move(b));
  }
  return Model(MlpArch{layer_sizes, activation}, std::move(params), seed);
}

Tensor model_forward(const Model& model, const Tensor& x) {
  const auto& sizes = model.arch().layer_sizes;
  if (x.cols() != sizes.front()) {
    throw std::invalid_argument("forward: input has " + std::to_string(x.cols()) +
                                " columns, model expects " + std::to_string(sizes.front()));
  }
  Tensor h = x;
  for (size_t i = 1; i < sizes.size(); ++i) {
    const Param* w = model.find("layer" + std::to_string(i) + ".weight");
    const Param* b = model.find("layer" + std::to_string(i) + ".bias");
    Tensor z = Tensor::zeros({h.rows(), sizes[i]});
    kernels::matmul(h, false, w->value, true, z);
    Tensor zb = Tensor::zeros(z.shape());
    kernels::add_bias(z, b->value, zb);
    if (i + 1 < sizes.size()) {
      Tensor a = Tensor::zeros(zb.shape());
      if (model.arch().activation == Activation::kRelu) {
        kernels::relu(zb, a);
      } else {
        kernels::tanh_forward(zb, a);
      }
      h = std::move(a);
    } else {
      h = std::move(zb);
    }
  }
  return h;
}

LossGraph batch_loss(const Model& model, const Tensor& batch_x, const Tensor& batch_y,
                     const Mask* mask) {
  if (batch_x.cols() != model.input_dim()) {
    throw std::invalid_argument("batch_loss: batch input width " + std::to_string(batch_x.cols()) +
                                " does not match model input dim " +
                                std::to_string(model.input_dim()));
  }
  if (batch_y.cols() != model.output_dim() || batch_y.rows() != batch_x.rows()) {
    throw std::invalid_argument("batch_loss: batch target shape " + batch_y.shape_str() +
                                " does not match model output dim " +
                                std::to_string(model.output_dim()));
  }
  if (mask != nullptr) {
    for (const auto& [name, m] : mask->masks) {
      const Param* p = model.find(name);
      if (p == nullptr) throw std::invalid_argument("batch_loss: mask names unknown param " + name);
      if (!m.same_shape(p->value)) {
        throw std::invalid_argument("batch_loss: mask shape " + m.shape_str() +
                                    " does not match param " + name + " " + p->value.shape_str());
      }
    }
  }

  LossGraph lg;
  Graph& g = lg.graph;
  NodeId x = g.constant(batch_x);
  const auto& sizes = model.arch().layer_sizes;
  lg.param_nodes.assign(model.params().size(), kNoNode);
  lg.mask_nodes.assign(model.params().size(), kNoNode);

  NodeId h = x;
  for (size_t i = 1; i < sizes.size(); ++i) {
    std::string base = "layer" + std::to_string(i);
    size_t wi = (i - 1) * 2;      // weight param index in declaration order
    size_t bi = (i - 1) * 2 + 1;  // bias
    const Param& w = model.params()[wi];
    const Param& b = model.params()[bi];

    NodeId wn = g.parameter(w.value, w.name);
    lg.param_nodes[wi] = wn;
    NodeId w_eff = wn;
    const Tensor* m = mask != nullptr && w.maskable ? mask->find(w.name) : nullptr;
    if (m != nullptr) {
      NodeId mn = g.parameter(*m, "mask:" + w.name);
      lg.mask_nodes[wi] = mn;
      w_eff = g.mul(mn, wn);  // m (*) w
    }

    NodeId bn = g.parameter(b.value, b.name);
    lg.param_nodes[bi] = bn;

    NodeId z = g.matmul(h, w_eff, false, true);  // [batch x out]
    NodeId zb = g.add_bias(z, bn);
    if (i + 1 < sizes.size()) {
      h = model.arch().activation == Activation::kRelu ? g.relu(zb) : g.tanh_act(zb);
    } else {
      h = zb;
    }
  }
  NodeId target = g.constant(batch_y);
  lg.loss = g.mse_loss(h, target);
  return lg;
}

}  // namespace sniper
