#pragma once

// Differentiable building blocks for the fixed architectures in this
// project: dense layers, ReLU/sigmoid, 1-D convolution along the link
// axis, residual conv blocks, sum pooling, the cross-entropy loss, Adam
// with exponential LR decay, and a central-difference gradient checker.
// Layers bind names in a ModelParams registry; forward/backward operate on
// caller-owned row-major buffers so the per-sample tape stays allocation-free.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "r4/kernels.hpp"
#include "r4/rng.hpp"
#include "r4/tensor.hpp"

namespace r4::nn {

// ---------------------------------------------------------------------------
// initialization

// Seeds each tensor from a stream keyed by its name, so values do not
// depend on registration order.
Tensor init_uniform(size_t rows, size_t cols, double lo, double hi, uint64_t seed,
                    const std::string& name);
Tensor init_he(size_t in, size_t out, uint64_t seed, const std::string& name);
Tensor init_he_conv(size_t taps, size_t cin, size_t cout, uint64_t seed, const std::string& name);

// ---------------------------------------------------------------------------
// dense layer: y = x W + b, x is [M x in], W is [in x out]

struct Dense {
  size_t w = 0, b = 0;
  int in = 0, out = 0;

  static Dense create(ModelParams& p, const std::string& name, int in, int out, uint64_t seed,
                      bool zero_init = false);

  void forward(const ModelParams& p, const double* x, size_t M, double* y) const;
  // dx (nullable) accumulates; grads accumulate.
  void backward(const ModelParams& p, const double* x, const double* dy, size_t M, double* dx,
                Grads& grads) const;
};

void relu(size_t n, const double* x, double* y);
double sigmoid(double z);

// ---------------------------------------------------------------------------
// 1-D convolution along the sequence axis, kernel size 3, zero 'same'
// padding: y[m] = b + sum_t x[m+t-1] K_t. x is [M x cin], y is [M x cout].

struct Conv1d {
  size_t k = 0, b = 0;
  int cin = 0, cout = 0;

  static Conv1d create(ModelParams& p, const std::string& name, int cin, int cout, uint64_t seed,
                       bool zero_init = false);

  void forward(const ModelParams& p, const double* x, size_t M, double* y) const;
  void backward(const ModelParams& p, const double* x, const double* dy, size_t M, double* dx,
                Grads& grads) const;
};

// ---------------------------------------------------------------------------
// residual block: y = x + conv2(relu(conv1(x))), with a 1x1 projection
// shortcut when channel counts differ. conv2 is zero-initialized so a fresh
// block is the identity.

struct ResidualBlock {
  Conv1d conv1, conv2;
  std::optional<Dense> proj;  // per-row 1x1 projection when cin != cout
  int cin = 0, cout = 0;

  static ResidualBlock create(ModelParams& p, const std::string& name, int cin, int cout,
                              uint64_t seed);

  struct Cache {
    std::vector<double> h1;  // conv1 output, pre-ReLU [M x cout]
    std::vector<double> a1;  // ReLU(h1)              [M x cout]
  };

  void forward(const ModelParams& p, const double* x, size_t M, double* y, Cache& c) const;
  void backward(const ModelParams& p, const double* x, const double* dy, size_t M, double* dx,
                Grads& grads, const Cache& c) const;
};

// ---------------------------------------------------------------------------
// residual conv stack. depth is the nominal total layer count; the number
// of basic blocks is (depth-2)/6, so depth 20 -> 3 blocks -> 6 kernel-3
// convs on the main path -> a 13-link receptive field, and depth 50 -> 8
// blocks. The input projection is kernel-1 (adds nothing to the field).

struct ResNet1d {
  Dense input_proj;  // applied per sequence row
  std::vector<ResidualBlock> blocks;
  int in = 0, channels = 0;

  static int blocks_for_depth(int depth);
  static ResNet1d create(ModelParams& p, const std::string& name, int in, int channels, int depth,
                         uint64_t seed);

  // span of sequence positions that can influence one output position
  int receptive_field() const { return static_cast<int>(4 * blocks.size() + 1); }

  struct Cache {
    std::vector<double> proj;                // [M x channels]
    std::vector<std::vector<double>> outs;   // per block output [M x channels]
    std::vector<ResidualBlock::Cache> inner;
  };

  // y is [M x channels]
  void forward(const ModelParams& p, const double* x, size_t M, double* y, Cache& c) const;
  void backward(const ModelParams& p, const double* x, const double* dy, size_t M, double* dx,
                Grads& grads, const Cache& c) const;
};

// ---------------------------------------------------------------------------
// pooling and losses

// out[C] = sum over unmasked rows of x[M x C]; mask may be null (all rows
// live). All-masked (or M == 0) input yields the zero vector.
void sum_pool(const double* x, size_t M, size_t C, const uint8_t* mask, double* out);

// Mean binary cross-entropy over a batch; predictions are clamped to
// [1e-7, 1 - 1e-7] before the logs.
double bce_loss(std::span<const double> yhat, std::span<const double> y);

// Loss directly from logits; fills dloss/dlogit (exact, including the
// clamp's dead zone). Returns the loss.
double bce_loss_from_logits(std::span<const double> logits, std::span<const double> y,
                            std::span<double> dlogits);

constexpr double kBceClamp = 1e-7;

// ---------------------------------------------------------------------------
// optimizer

struct AdamState {
  std::vector<std::vector<double>> m, v;
  int64_t t = 0;

  AdamState() = default;
  explicit AdamState(const ModelParams& p) {
    m.reserve(p.count());
    v.reserve(p.count());
    for (size_t i = 0; i < p.count(); ++i) {
      m.emplace_back(p.at(i).size(), 0.0);
      v.emplace_back(p.at(i).size(), 0.0);
    }
  }
};

void adam_step(ModelParams& p, const Grads& grads, AdamState& st, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

// lr(step) = lr0 * rate^(step / decay_steps)
double exp_decay(double lr0, double rate, int64_t step, int64_t decay_steps);

// ---------------------------------------------------------------------------
// gradient checking (central differences)

// Max elementwise error between analytic and numeric gradients of f at x,
// where err_i = |gn_i - ga_i| / max(|gn_i| + |ga_i|, 1e-3). f must be a
// pure function of x.
double check_gradient(const std::function<double(std::span<const double>)>& f,
                      std::span<const double> x, std::span<const double> analytic,
                      double h = 1e-4);

}  // namespace r4::nn
