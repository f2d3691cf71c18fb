#include "r4/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace r4::nn {

namespace {
Rng param_rng(uint64_t seed, const std::string& name) {
  return Rng(seed).fork(fnv1a(name.data(), name.size()));
}
}  // namespace

Tensor init_uniform(size_t rows, size_t cols, double lo, double hi, uint64_t seed,
                    const std::string& name) {
  Tensor t = Tensor::zeros2(rows, cols);
  Rng rng = param_rng(seed, name);
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

Tensor init_he(size_t in, size_t out, uint64_t seed, const std::string& name) {
  Tensor t = Tensor::zeros2(in, out);
  Rng rng = param_rng(seed, name);
  const double s = std::sqrt(2.0 / static_cast<double>(in));
  for (auto& v : t.data) v = rng.normal(0.0, s);
  return t;
}

Tensor init_he_conv(size_t taps, size_t cin, size_t cout, uint64_t seed, const std::string& name) {
  Tensor t = Tensor::zeros3(taps, cin, cout);
  Rng rng = param_rng(seed, name);
  const double s = std::sqrt(2.0 / static_cast<double>(taps * cin));
  for (auto& v : t.data) v = rng.normal(0.0, s);
  return t;
}

// ---------------------------------------------------------------------------

Dense Dense::create(ModelParams& p, const std::string& name, int in, int out, uint64_t seed,
                    bool zero_init) {
  Dense d;
  d.in = in;
  d.out = out;
  Tensor w = zero_init ? Tensor::zeros2(in, out)
                       : init_he(static_cast<size_t>(in), static_cast<size_t>(out), seed, name + ".w");
  d.w = p.add(name + ".w", std::move(w));
  d.b = p.add(name + ".b", Tensor::zeros1(static_cast<size_t>(out)));
  return d;
}

void Dense::forward(const ModelParams& p, const double* x, size_t M, double* y) const {
  const auto& K = kernels();
  std::memset(y, 0, M * static_cast<size_t>(out) * sizeof(double));
  K.gemm_nn_acc(M, out, in, x, in, p.at(w).ptr(), out, y, out);
  K.add_bias_rows(M, out, y, out, p.at(b).ptr());
}

void Dense::backward(const ModelParams& p, const double* x, const double* dy, size_t M, double* dx,
                     Grads& grads) const {
  const auto& K = kernels();
  if (dx) K.gemm_nt_acc(M, in, out, dy, out, p.at(w).ptr(), out, dx, in);
  K.gemm_tn_acc(in, out, M, x, in, dy, out, grads.of(w), out);
  K.sum_rows_acc(M, out, dy, out, grads.of(b));
}

void relu(size_t n, const double* x, double* y) { kernels().relu_forward(n, x, y); }

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// ---------------------------------------------------------------------------

Conv1d Conv1d::create(ModelParams& p, const std::string& name, int cin, int cout, uint64_t seed,
                      bool zero_init) {
  Conv1d c;
  c.cin = cin;
  c.cout = cout;
  Tensor k = zero_init ? Tensor::zeros3(3, cin, cout)
                       : init_he_conv(3, static_cast<size_t>(cin), static_cast<size_t>(cout), seed,
                                       name + ".k");
  c.k = p.add(name + ".k", std::move(k));
  c.b = p.add(name + ".b", Tensor::zeros1(static_cast<size_t>(cout)));
  return c;
}

void Conv1d::forward(const ModelParams& p, const double* x, size_t M, double* y) const {
  const auto& K = kernels();
  const Tensor& kt = p.at(k);
  std::memset(y, 0, M * static_cast<size_t>(cout) * sizeof(double));
  // tap 0 reaches back one row, tap 2 reaches forward one row
  if (M > 1) K.gemm_nn_acc(M - 1, cout, cin, x, cin, kt.row(0), cout, y + cout, cout);
  K.gemm_nn_acc(M, cout, cin, x, cin, kt.row(1), cout, y, cout);
  if (M > 1) K.gemm_nn_acc(M - 1, cout, cin, x + cin, cin, kt.row(2), cout, y, cout);
  K.add_bias_rows(M, cout, y, cout, p.at(b).ptr());
}

void Conv1d::backward(const ModelParams& p, const double* x, const double* dy, size_t M, double* dx,
                      Grads& grads) const {
  const auto& K = kernels();
  const Tensor& kt = p.at(k);
  double* gk = grads.of(k);
  const size_t tap = static_cast<size_t>(cin) * static_cast<size_t>(cout);
  if (dx) {
    if (M > 1) K.gemm_nt_acc(M - 1, cin, cout, dy + cout, cout, kt.row(0), cout, dx, cin);
    K.gemm_nt_acc(M, cin, cout, dy, cout, kt.row(1), cout, dx, cin);
    if (M > 1) K.gemm_nt_acc(M - 1, cin, cout, dy, cout, kt.row(2), cout, dx + cin, cin);
  }
  if (M > 1) K.gemm_tn_acc(cin, cout, M - 1, x, cin, dy + cout, cout, gk, cout);
  K.gemm_tn_acc(cin, cout, M, x, cin, dy, cout, gk + tap, cout);
  if (M > 1) K.gemm_tn_acc(cin, cout, M - 1, x + cin, cin, dy, cout, gk + 2 * tap, cout);
  K.sum_rows_acc(M, cout, dy, cout, grads.of(b));
}

// ---------------------------------------------------------------------------

ResidualBlock ResidualBlock::create(ModelParams& p, const std::string& name, int cin, int cout,
                                    uint64_t seed) {
  ResidualBlock rb;
  rb.cin = cin;
  rb.cout = cout;
  rb.conv1 = Conv1d::create(p, name + ".conv1", cin, cout, seed);
  rb.conv2 = Conv1d::create(p, name + ".conv2", cout, cout, seed, /*zero_init=*/true);
  if (cin != cout) rb.proj = Dense::create(p, name + ".proj", cin, cout, seed);
  return rb;
}

void ResidualBlock::forward(const ModelParams& p, const double* x, size_t M, double* y,
                            Cache& c) const {
  const size_t n = M * static_cast<size_t>(cout);
  c.h1.resize(n);
  c.a1.resize(n);
  conv1.forward(p, x, M, c.h1.data());
  relu(n, c.h1.data(), c.a1.data());
  conv2.forward(p, c.a1.data(), M, y);
  if (proj) {
    std::vector<double> shortcut(n);
    proj->forward(p, x, M, shortcut.data());
    kernels().axpy(n, 1.0, shortcut.data(), y);
  } else {
    kernels().axpy(n, 1.0, x, y);
  }
}

void ResidualBlock::backward(const ModelParams& p, const double* x, const double* dy, size_t M,
                             double* dx, Grads& grads, const Cache& c) const {
  const size_t n = M * static_cast<size_t>(cout);
  std::vector<double> da1(n, 0.0), dh1(n, 0.0);
  conv2.backward(p, c.a1.data(), dy, M, da1.data(), grads);
  kernels().relu_backward_acc(n, c.h1.data(), da1.data(), dh1.data());
  conv1.backward(p, x, dh1.data(), M, dx, grads);
  if (proj) {
    proj->backward(p, x, dy, M, dx, grads);
  } else if (dx) {
    kernels().axpy(n, 1.0, dy, dx);
  }
}

// ---------------------------------------------------------------------------

int ResNet1d::blocks_for_depth(int depth) {
  if (depth < 8 || (depth - 2) % 6 != 0)
    throw std::invalid_argument("unsupported resnet depth " + std::to_string(depth));
  return (depth - 2) / 6;
}

ResNet1d ResNet1d::create(ModelParams& p, const std::string& name, int in, int channels, int depth,
                          uint64_t seed) {
  ResNet1d net;
  net.in = in;
  net.channels = channels;
  net.input_proj = Dense::create(p, name + ".proj", in, channels, seed);
  const int nb = blocks_for_depth(depth);
  net.blocks.reserve(static_cast<size_t>(nb));
  for (int i = 0; i < nb; ++i)
    net.blocks.push_back(
        ResidualBlock::create(p, name + ".block" + std::to_string(i), channels, channels, seed));
  return net;
}

void ResNet1d::forward(const ModelParams& p, const double* x, size_t M, double* y, Cache& c) const {
  const size_t n = M * static_cast<size_t>(channels);
  c.proj.resize(n);
  c.outs.resize(blocks.size());
  c.inner.resize(blocks.size());
  input_proj.forward(p, x, M, c.proj.data());
  const double* cur = c.proj.data();
  for (size_t i = 0; i < blocks.size(); ++i) {
    c.outs[i].resize(n);
    blocks[i].forward(p, cur, M, c.outs[i].data(), c.inner[i]);
    cur = c.outs[i].data();
  }
  std::copy(cur, cur + n, y);
}

void ResNet1d::backward(const ModelParams& p, const double* x, const double* dy, size_t M,
                        double* dx, Grads& grads, const Cache& c) const {
  const size_t n = M * static_cast<size_t>(channels);
  std::vector<double> dcur(dy, dy + n), dprev(n, 0.0);
  for (size_t i = blocks.size(); i-- > 0;) {
    const double* in_buf = i == 0 ? c.proj.data() : c.outs[i - 1].data();
    std::fill(dprev.begin(), dprev.end(), 0.0);
    blocks[i].backward(p, in_buf, dcur.data(), M, dprev.data(), grads, c.inner[i]);
    std::swap(dcur, dprev);
  }
  input_proj.backward(p, x, dcur.data(), M, dx, grads);
}

// ---------------------------------------------------------------------------

void sum_pool(const double* x, size_t M, size_t C, const uint8_t* mask, double* out) {
  std::fill(out, out + C, 0.0);
  if (!mask) {
    kernels().sum_rows_acc(M, C, x, C, out);
    return;
  }
  for (size_t m = 0; m < M; ++m)
    if (mask[m]) kernels().axpy(C, 1.0, x + m * C, out);
}

double bce_loss(std::span<const double> yhat, std::span<const double> y) {
  if (yhat.size() != y.size() || yhat.empty())
    throw std::invalid_argument("bce_loss: length mismatch");
  double sum = 0.0;
  for (size_t i = 0; i < yhat.size(); ++i) {
    const double p = std::clamp(yhat[i], kBceClamp, 1.0 - kBceClamp);
    sum += y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
  }
  return -sum / static_cast<double>(yhat.size());
}

double bce_loss_from_logits(std::span<const double> logits, std::span<const double> y,
                            std::span<double> dlogits) {
  if (logits.size() != y.size() || logits.size() != dlogits.size() || logits.empty())
    throw std::invalid_argument("bce_loss_from_logits: length mismatch");
  const double n = static_cast<double>(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    const double s = sigmoid(logits[i]);
    const double p = std::clamp(s, kBceClamp, 1.0 - kBceClamp);
    sum += y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
    // clamped region has zero slope
    dlogits[i] = (s > kBceClamp && s < 1.0 - kBceClamp) ? (s - y[i]) / n : 0.0;
  }
  return -sum / n;
}

// ---------------------------------------------------------------------------

void adam_step(ModelParams& p, const Grads& grads, AdamState& st, double lr, double beta1,
               double beta2, double eps) {
  ++st.t;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(st.t));
  const auto& K = kernels();
  for (size_t i = 0; i < p.count(); ++i) {
    Tensor& t = p.at(i);
    K.adam_update(t.size(), t.ptr(), grads.g[i].data(), st.m[i].data(), st.v[i].data(), beta1,
                  beta2, eps, lr, c1, c2);
  }
}

double exp_decay(double lr0, double rate, int64_t step, int64_t decay_steps) {
  return lr0 * std::pow(rate, static_cast<double>(step) / static_cast<double>(decay_steps));
}

// ---------------------------------------------------------------------------

double check_gradient(const std::function<double(std::span<const double>)>& f,
                      std::span<const double> x, std::span<const double> analytic, double h) {
  if (x.size() != analytic.size()) throw std::invalid_argument("check_gradient: size mismatch");
  std::vector<double> xs(x.begin(), x.end());
  double worst = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double keep = xs[i];
    xs[i] = keep + h;
    const double lp = f(xs);
    xs[i] = keep - h;
    const double lm = f(xs);
    xs[i] = keep;
    const double gn = (lp - lm) / (2.0 * h);
    const double ga = analytic[i];
    const double err = std::abs(gn - ga) / std::max(std::abs(gn) + std::abs(ga), 1e-3);
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace r4::nn
