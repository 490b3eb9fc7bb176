#include "sniper/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace sniper::kernels {

namespace {

struct MatDims {
  size_t m, k, n;  // c is m x n, shared dim k
};

MatDims check_matmul(const Tensor& a, bool ta, const Tensor& b, bool tb, const char* who) {
  if (a.ndim() != 2 || b.ndim() != 2) {
    throw std::invalid_argument(std::string(who) + ": operands must be 2-d, got " +
                                a.shape_str() + " and " + b.shape_str());
  }
  size_t m = ta ? a.cols() : a.rows();
  size_t ka = ta ? a.rows() : a.cols();
  size_t kb = tb ? b.cols() : b.rows();
  size_t n = tb ? b.rows() : b.cols();
  if (ka != kb) {
    throw std::invalid_argument(std::string(who) + ": shape mismatch " + a.shape_str() +
                                (ta ? "^T" : "") + " * " + b.shape_str() + (tb ? "^T" : ""));
  }
  return {m, ka, n};
}

inline double dot_stride(const double* pa, size_t sa, const double* pb, size_t sb, size_t k) {
  double acc = 0.0;
  for (size_t i = 0; i < k; ++i) acc += pa[i * sa] * pb[i * sb];
  return acc;
}

// One output element; identical arithmetic for both paths.
inline double matmul_cell(const Tensor& a, bool ta, const Tensor& b, bool tb, const MatDims& d,
                          size_t i, size_t j) {
  const double* pa = ta ? a.data() + i : a.data() + i * d.k;
  size_t sa = ta ? d.m : 1;
  const double* pb = tb ? b.data() + j * d.k : b.data() + j;
  size_t sb = tb ? 1 : d.n;
  return dot_stride(pa, sa, pb, sb, d.k);
}

}  // namespace

void matmul_serial(const Tensor& a, bool ta, const Tensor& b, bool tb, Tensor& c, bool acc) {
  MatDims d = check_matmul(a, ta, b, tb, "matmul");
  if (c.ndim() != 2 || c.rows() != d.m || c.cols() != d.n) {
    throw std::invalid_argument("matmul: output shape " + c.shape_str() + " does not match result");
  }
  double* pc = c.data();
  for (size_t i = 0; i < d.m; ++i) {
    for (size_t j = 0; j < d.n; ++j) {
      double v = matmul_cell(a, ta, b, tb, d, i, j);
      pc[i * d.n + j] = acc ? pc[i * d.n + j] + v : v;
    }
  }
}

void matmul(const Tensor& a, bool ta, const Tensor& b, bool tb, Tensor& c, bool acc) {
  MatDims d = check_matmul(a, ta, b, tb, "matmul");
  if (c.ndim() != 2 || c.rows() != d.m || c.cols() != d.n) {
    throw std::invalid_argument("matmul: output shape " + c.shape_str() + " does not match result");
  }
  if (d.m * d.n * d.k < kMatmulGrain) {
    matmul_serial(a, ta, b, tb, c, acc);
    return;
  }
  double* pc = c.data();
  const int64_t m = static_cast<int64_t>(d.m);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < d.n; ++j) {
      double v = matmul_cell(a, ta, b, tb, d, static_cast<size_t>(i), j);
      size_t idx = static_cast<size_t>(i) * d.n + j;
      pc[idx] = acc ? pc[idx] + v : v;
    }
  }
}

namespace {

template <typename F>
void elementwise(size_t n, F f) {
  if (n < kElementwiseGrain) {
    for (size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const int64_t in = static_cast<int64_t>(n);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < in; ++i) f(static_cast<size_t>(i));
}

void check_same(const Tensor& a, const Tensor& b, const char* who) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(who) + ": shape mismatch " + a.shape_str() + " vs " +
                                b.shape_str());
  }
}

}  // namespace

void add_bias_serial(const Tensor& x, const Tensor& bias, Tensor& out) {
  if (bias.numel() != x.cols()) {
    throw std::invalid_argument("add-bias: shape mismatch " + x.shape_str() + " + " +
                                bias.shape_str());
  }
  check_same(x, out, "add-bias");
  size_t r = x.rows(), c = x.cols();
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < c; ++j) out.data()[i * c + j] = x.data()[i * c + j] + bias[j];
}

void add_bias(const Tensor& x, const Tensor& bias, Tensor& out) {
  if (bias.numel() != x.cols()) {
    throw std::invalid_argument("add-bias: shape mismatch " + x.shape_str() + " + " +
                                bias.shape_str());
  }
  check_same(x, out, "add-bias");
  size_t c = x.cols();
  elementwise(x.numel(), [&](size_t i) { out.data()[i] = x.data()[i] + bias[i % c]; });
}

void col_sum_acc(const Tensor& dy, Tensor& db) {
  if (db.numel() != dy.cols()) {
    throw std::invalid_argument("col-sum: shape mismatch " + dy.shape_str() + " -> " +
                                db.shape_str());
  }
  size_t r = dy.rows(), c = dy.cols();
  for (size_t j = 0; j < c; ++j) {
    double acc = 0.0;
    for (size_t i = 0; i < r; ++i) acc += dy.data()[i * c + j];
    db[j] += acc;
  }
}

void relu_serial(const Tensor& x, Tensor& out) {
  check_same(x, out, "relu");
  for (size_t i = 0; i < x.numel(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu(const Tensor& x, Tensor& out) {
  check_same(x, out, "relu");
  elementwise(x.numel(), [&](size_t i) { out.data()[i] = x[i] > 0.0 ? x[i] : 0.0; });
}

void relu_backward_acc(const Tensor& x, const Tensor& dy, Tensor& dx) {
  check_same(x, dx, "relu-backward");
  check_same(x, dy, "relu-backward");
  elementwise(x.numel(), [&](size_t i) {
    if (x[i] > 0.0) dx.data()[i] += dy[i];
  });
}

void tanh_forward_serial(const Tensor& x, Tensor& out) {
  check_same(x, out, "tanh");
  for (size_t i = 0; i < x.numel(); ++i) out[i] = std::tanh(x[i]);
}

void tanh_forward(const Tensor& x, Tensor& out) {
  check_same(x, out, "tanh");
  elementwise(x.numel(), [&](size_t i) { out.data()[i] = std::tanh(x[i]); });
}

void tanh_backward_acc(const Tensor& y, const Tensor& dy, Tensor& dx) {
  check_same(y, dx, "tanh-backward");
  check_same(y, dy, "tanh-backward");
  elementwise(y.numel(), [&](size_t i) { dx.data()[i] += dy[i] * (1.0 - y[i] * y[i]); });
}

void mul_serial(const Tensor& a, const Tensor& b, Tensor& out) {
  check_same(a, b, "elementwise-mul");
  check_same(a, out, "elementwise-mul");
  for (size_t i = 0; i < a.numel(); ++i) out[i] = a[i] * b[i];
}

void mul(const Tensor& a, const Tensor& b, Tensor& out) {
  check_same(a, b, "elementwise-mul");
  check_same(a, out, "elementwise-mul");
  elementwise(a.numel(), [&](size_t i) { out.data()[i] = a[i] * b[i]; });
}

void mul_backward_acc(const Tensor& dy, const Tensor& b, Tensor& da) {
  check_same(dy, b, "elementwise-mul-backward");
  check_same(dy, da, "elementwise-mul-backward");
  elementwise(dy.numel(), [&](size_t i) { da.data()[i] += dy[i] * b[i]; });
}

double mse(const Tensor& pred, const Tensor& target) {
  check_same(pred, target, "mse-loss");
  double acc = 0.0;
  for (size_t i = 0; i < pred.numel(); ++i) {
    double d = pred[i] - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.numel());
}

void mse_backward_acc(const Tensor& pred, const Tensor& target, double scale, Tensor& dpred) {
  check_same(pred, target, "mse-loss-backward");
  check_same(pred, dpred, "mse-loss-backward");
  double f = 2.0 * scale / static_cast<double>(pred.numel());
  elementwise(pred.numel(), [&](size_t i) { dpred.data()[i] += f * (pred[i] - target[i]); });
}

}  // namespace sniper::kernels
