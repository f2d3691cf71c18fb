#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace r4 {

// Dense 64-bit tensor with up to 3 axes. Row-major; axis 0 is the
// slowest-varying (taps for conv kernels, rows otherwise).
struct Tensor {
  std::array<size_t, 3> dims{1, 1, 1};
  int ndim = 0;
  std::vector<double> data;

  Tensor() = default;

  static Tensor zeros1(size_t a) { return Tensor({a, 1, 1}, 1); }
  static Tensor zeros2(size_t a, size_t b) { return Tensor({a, b, 1}, 2); }
  static Tensor zeros3(size_t a, size_t b, size_t c) { return Tensor({a, b, c}, 3); }

  size_t size() const { return dims[0] * dims[1] * dims[2]; }
  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }
  // row pointer for 2-D tensors / tap-matrix pointer for 3-D
  double* row(size_t i) { return data.data() + i * dims[1] * dims[2]; }
  const double* row(size_t i) const { return data.data() + i * dims[1] * dims[2]; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  Tensor(std::array<size_t, 3> d, int n) : dims(d), ndim(n), data(size(), 0.0) {}
};

// Named trainable tensors. Registration order is the flat-vector order and
// the checkpoint order; flatten/unflatten is the identity round trip.
class ModelParams {
 public:
  struct Entry {
    std::string name;
    Tensor value;
  };

  size_t add(const std::string& name, Tensor t) {
    if (index_.count(name)) throw std::invalid_argument("duplicate param: " + name);
    index_[name] = items_.size();
    items_.push_back({name, std::move(t)});
    return items_.size() - 1;
  }

  size_t count() const { return items_.size(); }
  bool has(const std::string& name) const { return index_.count(name) != 0; }

  size_t id_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("no param named " + name);
    return it->second;
  }

  Tensor& at(size_t id) { return items_.at(id).value; }
  const Tensor& at(size_t id) const { return items_.at(id).value; }
  Tensor& named(const std::string& name) { return at(id_of(name)); }
  const Tensor& named(const std::string& name) const { return at(id_of(name)); }
  const std::string& name_of(size_t id) const { return items_.at(id).name; }

  size_t total_size() const {
    size_t n = 0;
    for (const auto& e : items_) n += e.value.size();
    return n;
  }

  std::vector<double> flatten() const {
    std::vector<double> flat;
    flat.reserve(total_size());
    for (const auto& e : items_) flat.insert(flat.end(), e.value.data.begin(), e.value.data.end());
    return flat;
  }

  void unflatten(std::span<const double> flat) {
    if (flat.size() != total_size()) throw std::invalid_argument("unflatten: size mismatch");
    size_t off = 0;
    for (auto& e : items_) {
      std::copy(flat.begin() + off, flat.begin() + off + e.value.size(), e.value.data.begin());
      off += e.value.size();
    }
  }

  const std::vector<Entry>& entries() const { return items_; }

 private:
  std::vector<Entry> items_;
  std::unordered_map<std::string, size_t> index_;
};

// Gradient buffers aligned with a ModelParams instance.
struct Grads {
  std::vector<std::vector<double>> g;

  explicit Grads(const ModelParams& p) {
    g.reserve(p.count());
    for (size_t i = 0; i < p.count(); ++i) g.emplace_back(p.at(i).size(), 0.0);
  }

  void zero() {
    for (auto& v : g) std::fill(v.begin(), v.end(), 0.0);
  }

  double* of(size_t id) { return g[id].data(); }

  // other is reduced into *this in index order (deterministic).
  void accumulate(const Grads& other) {
    for (size_t i = 0; i < g.size(); ++i)
      for (size_t j = 0; j < g[i].size(); ++j) g[i][j] += other.g[i][j];
  }

  void scale_all(double a) {
    for (auto& v : g)
      for (auto& x : v) x *= a;
  }
};

}  // namespace r4
