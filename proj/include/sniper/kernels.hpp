#pragma once

#include <cstddef>

#include "sniper/tensor.hpp"

namespace sniper::kernels {

// Dense 2-d kernels. Each has an OpenMP path and a serial reference path;
// the parallel loops split work by output element, so every output entry is
// produced by exactly one thread with a fixed inner accumulation order and
// the two paths are bit-identical for any thread count.

// c = op(a) * op(b), op = transpose when the flag is set; acc adds into c.
void matmul(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b, Tensor& c,
            bool acc = false);
void matmul_serial(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b, Tensor& c,
                   bool acc = false);

// out[r, :] = x[r, :] + bias
void add_bias(const Tensor& x, const Tensor& bias, Tensor& out);
void add_bias_serial(const Tensor& x, const Tensor& bias, Tensor& out);

// db[c] += sum_r dy[r, c]; row order fixed inside each column.
void col_sum_acc(const Tensor& dy, Tensor& db);

void relu(const Tensor& x, Tensor& out);
void relu_serial(const Tensor& x, Tensor& out);
// dx += dy where x > 0
void relu_backward_acc(const Tensor& x, const Tensor& dy, Tensor& dx);

void tanh_forward(const Tensor& x, Tensor& out);
void tanh_forward_serial(const Tensor& x, Tensor& out);
// dx += dy * (1 - y^2), y = tanh(x) from the forward pass
void tanh_backward_acc(const Tensor& y, const Tensor& dy, Tensor& dx);

void mul(const Tensor& a, const Tensor& b, Tensor& out);
void mul_serial(const Tensor& a, const Tensor& b, Tensor& out);
// da += dy * b
void mul_backward_acc(const Tensor& dy, const Tensor& b, Tensor& da);

// Mean of squared differences over all entries; serial reduction in flat
// order so the result does not depend on thread count.
double mse(const Tensor& pred, const Tensor& target);
// dpred += scale * 2 * (pred - target) / numel
void mse_backward_acc(const Tensor& pred, const Tensor& target, double scale, Tensor& dpred);

// Work-size threshold below which the parallel kernels stay serial.
constexpr size_t kMatmulGrain = 32768;
constexpr size_t kElementwiseGrain = 16384;

}  // namespace sniper::kernels
