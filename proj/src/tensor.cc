// Copyright 2026 The MCRF Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mcrf/tensor.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mcrf/errors.h"

namespace mcrf {
namespace {

thread_local Tape* g_active_tape = nullptr;

using StoragePtr = std::shared_ptr<Tensor::Storage>;

template <typename... Ts>
bool recording(const Ts&... inputs) {
  return g_active_tape != nullptr && (inputs.requires_grad() || ...);
}

// Marks `out` as part of the graph and registers its adjoint.
void attach(Tensor& out, std::function<void()> adjoint) {
  out.set_requires_grad(true);
  g_active_tape->record(std::move(adjoint));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(fmt::format("{}: shape mismatch {} vs {}", op,
                                     a.shape().str(), b.shape().str()));
  }
}

void require_defined(const Tensor& a, const char* op) {
  if (!a.defined()) throw DimensionError(fmt::format("{}: undefined tensor", op));
}

template <typename Fn, typename Dfn>
Tensor unary(const Tensor& a, Fn fn, Dfn dfn) {
  require_defined(a, "unary");
  const auto in = a.values();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fn(in[i]);
  Tensor result = Tensor::from(a.shape(), std::move(out));
  if (recording(a)) {
    StoragePtr pa = a.storage(), po = result.storage();
    attach(result, [pa, po, dfn] {
      if (po->grad.empty()) return;
      auto& ga = pa->ensure_grad();
      for (std::size_t i = 0; i < ga.size(); ++i) {
        ga[i] += po->grad[i] * dfn(pa->value[i], po->value[i]);
      }
    });
  }
  return result;
}

}  // namespace

std::string Shape::str() const { return fmt::format("[{}x{}]", rows, cols); }

Tensor Tensor::zeros(Shape shape) { return filled(shape, 0.0); }

Tensor Tensor::filled(Shape shape, double value) {
  return from(shape, std::vector<double>(shape.size(), value));
}

Tensor Tensor::from(Shape shape, std::vector<double> values) {
  if (values.size() != shape.size()) {
    throw DimensionError(fmt::format("tensor {} given {} values", shape.str(),
                                     values.size()));
  }
  auto storage = std::make_shared<Storage>();
  storage->shape = shape;
  storage->value = std::move(values);
  return Tensor(std::move(storage));
}

Tensor Tensor::row_vector(std::vector<double> values) {
  const Shape shape{1, values.size()};
  return from(shape, std::move(values));
}

Tensor Tensor::scalar(double value) { return from({1, 1}, {value}); }

const Shape& Tensor::shape() const {
  static const Shape kEmpty{};
  return data_ ? data_->shape : kEmpty;
}

std::span<const double> Tensor::values() const {
  if (!data_) return {};
  return data_->value;
}

std::span<double> Tensor::mutable_values() {
  if (!data_) return {};
  return data_->value;
}

double Tensor::at(std::size_t r, std::size_t c) const {
  if (r >= rows() || c >= cols()) {
    throw DimensionError(
        fmt::format("index ({}, {}) outside {}", r, c, shape().str()));
  }
  return data_->value[r * cols() + c];
}

double Tensor::item() const {
  if (size() != 1) {
    throw DimensionError(fmt::format("item() on {}", shape().str()));
  }
  return data_->value[0];
}

std::span<const double> Tensor::grad() const {
  if (!data_) return {};
  return data_->grad;
}

std::span<double> Tensor::mutable_grad() {
  if (!data_) return {};
  return data_->ensure_grad();
}

bool Tensor::has_grad() const { return data_ && !data_->grad.empty(); }

void Tensor::zero_grad() {
  if (data_ && !data_->grad.empty()) {
    std::fill(data_->grad.begin(), data_->grad.end(), 0.0);
  }
}

bool Tensor::requires_grad() const { return data_ && data_->requires_grad; }

void Tensor::set_requires_grad(bool on) {
  if (data_) data_->requires_grad = on;
}

Tensor Tensor::clone() const {
  if (!data_) return {};
  Tensor t = from(data_->shape, data_->value);
  t.set_requires_grad(data_->requires_grad);
  return t;
}

Tensor Tensor::detach() const {
  if (!data_) return {};
  return from(data_->shape, data_->value);
}

void Tape::record(std::function<void()> adjoint) {
  adjoints_.push_back(std::move(adjoint));
}

void Tape::backward(const Tensor& loss, double seed) {
  if (loss.size() != 1) {
    throw DimensionError(
        fmt::format("backward needs a scalar loss, got {}", loss.shape().str()));
  }
  loss.storage()->ensure_grad()[0] += seed;
  for (auto it = adjoints_.rbegin(); it != adjoints_.rend(); ++it) (*it)();
}

void Tape::clear() { adjoints_.clear(); }

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) {
  g_active_tape = &tape;
}

TapeScope::~TapeScope() { g_active_tape = previous_; }

Tape* active_tape() { return g_active_tape; }

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.cols() != b.rows()) {
    throw DimensionError(fmt::format("matmul: inner dimensions differ {} x {}",
                                     a.shape().str(), b.shape().str()));
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = &out[i * n];
    for (std::size_t p = 0; p < k; ++p) {
      const double x = av[i * k + p];
      if (x == 0.0) continue;
      const double* brow = &bv[p * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += x * brow[j];
    }
  }
  Tensor result = Tensor::from({m, n}, std::move(out));
  if (recording(a, b)) {
    StoragePtr pa = a.storage(), pb = b.storage(), po = result.storage();
    attach(result, [pa, pb, po, m, k, n] {
      if (po->grad.empty()) return;
      const auto& g = po->grad;
      if (pa->requires_grad) {
        auto& ga = pa->ensure_grad();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            const double* brow = &pb->value[p * n];
            const double* grow = &g[i * n];
            for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
            ga[i * k + p] += acc;
          }
        }
      }
      if (pb->requires_grad) {
        auto& gb = pb->ensure_grad();
        for (std::size_t i = 0; i < m; ++i) {
          const double* grow = &g[i * n];
          for (std::size_t p = 0; p < k; ++p) {
            const double x = pa->value[i * k + p];
            if (x == 0.0) continue;
            double* gbrow = &gb[p * n];
            for (std::size_t j = 0; j < n; ++j) gbrow[j] += x * grow[j];
          }
        }
      }
    });
  }
  return result;
}

namespace {

template <typename Fn, typename Da, typename Db>
Tensor binary(const Tensor& a, const Tensor& b, const char* name, Fn fn, Da da,
              Db db) {
  require_defined(a, name);
  require_defined(b, name);
  require_same_shape(a, b, name);
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fn(av[i], bv[i]);
  Tensor result = Tensor::from(a.shape(), std::move(out));
  if (recording(a, b)) {
    StoragePtr pa = a.storage(), pb = b.storage(), po = result.storage();
    attach(result, [pa, pb, po, da, db] {
      if (po->grad.empty()) return;
      const auto& g = po->grad;
      if (pa->requires_grad) {
        auto& ga = pa->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i] * da(pa->value[i], pb->value[i]);
        }
      }
      if (pb->requires_grad) {
        auto& gb = pb->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
          gb[i] += g[i] * db(pa->value[i], pb->value[i]);
        }
      }
    });
  }
  return result;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

Tensor add_row(const Tensor& a, const Tensor& row_vec) {
  require_defined(a, "add_row");
  require_defined(row_vec, "add_row");
  if (row_vec.size() != a.cols()) {
    throw DimensionError(fmt::format("add_row: {} cannot broadcast over {}",
                                     row_vec.shape().str(), a.shape().str()));
  }
  const std::size_t m = a.rows(), n = a.cols();
  const auto av = a.values();
  const auto rv = row_vec.values();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = av[i * n + j] + rv[j];
  }
  Tensor result = Tensor::from(a.shape(), std::move(out));
  if (recording(a, row_vec)) {
    StoragePtr pa = a.storage(), pr = row_vec.storage(), po = result.storage();
    attach(result, [pa, pr, po, m, n] {
      if (po->grad.empty()) return;
      const auto& g = po->grad;
      if (pa->requires_grad) {
        auto& ga = pa->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (pr->requires_grad) {
        auto& gr = pr->ensure_grad();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < n; ++j) gr[j] += g[i * n + j];
        }
      }
    });
  }
  return result;
}

Tensor add_col(const Tensor& a, const Tensor& col) {
  require_defined(a, "add_col");
  require_defined(col, "add_col");
  if (col.size() != a.rows()) {
    throw DimensionError(fmt::format("add_col: {} cannot broadcast over {}",
                                     col.shape().str(), a.shape().str()));
  }
  const std::size_t m = a.rows(), n = a.cols();
  const auto av = a.values();
  const auto cv = col.values();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = av[i * n + j] + cv[i];
  }
  Tensor result = Tensor::from(a.shape(), std::move(out));
  if (recording(a, col)) {
    StoragePtr pa = a.storage(), pc = col.storage(), po = result.storage();
    attach(result, [pa, pc, po, m, n] {
      if (po->grad.empty()) return;
      const auto& g = po->grad;
      if (pa->requires_grad) {
        auto& ga = pa->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (pc->requires_grad) {
        auto& gc = pc->ensure_grad();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < n; ++j) gc[i] += g[i * n + j];
        }
      }
    });
  }
  return result;
}

Tensor sub_scalar(const Tensor& a, const Tensor& s) {
  require_defined(a, "sub_scalar");
  if (s.size() != 1) {
    throw DimensionError(fmt::format("sub_scalar: {} is not a scalar (lhs {})",
                                     s.shape().str(), a.shape().str()));
  }
  const double sv = s.item();
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] - sv;
  Tensor result = Tensor::from(a.shape(), std::move(out));
  if (recording(a, s)) {
    StoragePtr pa = a.storage(), ps = s.storage(), po = result.storage();
    attach(result, [pa, ps, po] {
      if (po->grad.empty()) return;
      const auto& g = po->grad;
      if (pa->requires_grad) {
        auto& ga = pa->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (ps->requires_grad) {
        double total = 0.0;
        for (double x : g) total += x;
        ps->ensure_grad()[0] -= total;
      }
    });
  }
  return result;
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      a, [factor](double x) { return x * factor; },
      [factor](double, double) { return factor; });
}

Tensor scale_rows(const Tensor& a, std::span<const double> factors) {
  require_defined(a, "scale_rows");
  if (factors.size() != a.rows()) {
    throw DimensionError(fmt::format("scale_rows: {} factors for {}",
                                     factors.size(), a.shape().str()));
  }
  const std::size_t m = a.rows(), n = a.cols();
  const auto av = a.values();
  std::vector<double> f(factors.begin(), factors.end());
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = av[i * n + j] * f[i];
  }
  Tensor result = Tensor::from(a.shape(), std::move(out));
  if (recording(a)) {
    StoragePtr pa = a.storage(), po = result.storage();
    attach(result, [pa, po, f = std::move(f), m, n] {
      if (po->grad.empty()) return;
      auto& ga = pa->ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          ga[i * n + j] += po->grad[i * n + j] * f[i];
        }
      }
    });
  }
  return result;
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& a) {
  return unary(
      a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary(
      a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Tensor softmax(const Tensor& a) {
  require_defined(a, "softmax");
  const std::size_t m = a.rows(), n = a.cols();
  const auto av = a.values();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    const double* x = &av[i * n];
    double* y = &out[i * n];
    const double mx = *std::max_element(x, x + n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      y[j] = std::exp(x[j] - mx);
      total += y[j];
    }
    for (std::size_t j = 0; j < n; ++j) y[j] /= total;
  }
  Tensor result = Tensor::from(a.shape(), std::move(out));
  if (recording(a)) {
    StoragePtr pa = a.storage(), po = result.storage();
    attach(result, [pa, po, m, n] {
      if (po->grad.empty()) return;
      auto& ga = pa->ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        const double* y = &po->value[i * n];
        const double* g = &po->grad[i * n];
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += g[j] * y[j];
        for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += y[j] * (g[j] - dot);
      }
    });
  }
  return result;
}

Tensor log_softmax(const Tensor& a) {
  require_defined(a, "log_softmax");
  const std::size_t m = a.rows(), n = a.cols();
  const auto av = a.values();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    const double* x = &av[i * n];
    const double mx = *std::max_element(x, x + n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += std::exp(x[j] - mx);
    const double lse = mx + std::log(total);
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = x[j] - lse;
  }
  Tensor result = Tensor::from(a.shape(), std::move(out));
  if (recording(a)) {
    StoragePtr pa = a.storage(), po = result.storage();
    attach(result, [pa, po, m, n] {
      if (po->grad.empty()) return;
      auto& ga = pa->ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        const double* g = &po->grad[i * n];
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) total += g[j];
        for (std::size_t j = 0; j < n; ++j) {
          ga[i * n + j] += g[j] - std::exp(po->value[i * n + j]) * total;
        }
      }
    });
  }
  return result;
}

namespace {

// Max-shifted log sum exp over a strided run of values.
double lse_strided(const double* x, std::size_t count, std::size_t stride) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) mx = std::max(mx, x[i * stride]);
  if (std::isinf(mx)) return mx;
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) total += std::exp(x[i * stride] - mx);
  return mx + std::log(total);
}

}  // namespace

Tensor log_sum_exp(const Tensor& v) {
  require_defined(v, "log_sum_exp");
  if (v.size() == 0) throw DimensionError("log_sum_exp: empty input");
  const auto vv = v.values();
  Tensor result = Tensor::scalar(v.size() == 1 ? vv[0]
                                               : lse_strided(vv.data(), vv.size(), 1));
  if (recording(v)) {
    StoragePtr pv = v.storage(), po = result.storage();
    attach(result, [pv, po] {
      if (po->grad.empty()) return;
      const double g = po->grad[0];
      const double z = po->value[0];
      if (std::isinf(z)) return;
      auto& gv = pv->ensure_grad();
      for (std::size_t i = 0; i < gv.size(); ++i) {
        gv[i] += g * std::exp(pv->value[i] - z);
      }
    });
  }
  return result;
}

Tensor log_sum_exp(const Tensor& m, Axis axis) {
  require_defined(m, "log_sum_exp");
  if (m.size() == 0) throw DimensionError("log_sum_exp: empty input");
  const std::size_t rows = m.rows(), cols = m.cols();
  const auto mv = m.values();
  const bool over_rows = axis == Axis::kRows;
  const std::size_t outs = over_rows ? cols : rows;
  std::vector<double> out(outs);
  for (std::size_t o = 0; o < outs; ++o) {
    out[o] = over_rows ? lse_strided(&mv[o], rows, cols)
                       : lse_strided(&mv[o * cols], cols, 1);
  }
  Tensor result = Tensor::from({1, outs}, std::move(out));
  if (recording(m)) {
    StoragePtr pm = m.storage(), po = result.storage();
    attach(result, [pm, po, rows, cols, over_rows] {
      if (po->grad.empty()) return;
      auto& gm = pm->ensure_grad();
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
          const std::size_t o = over_rows ? j : i;
          const double z = po->value[o];
          if (std::isinf(z)) continue;
          gm[i * cols + j] += po->grad[o] * std::exp(pm->value[i * cols + j] - z);
        }
      }
    });
  }
  return result;
}

Tensor sum(const Tensor& a) {
  require_defined(a, "sum");
  double total = 0.0;
  for (double x : a.values()) total += x;
  Tensor result = Tensor::scalar(total);
  if (recording(a)) {
    StoragePtr pa = a.storage(), po = result.storage();
    attach(result, [pa, po] {
      if (po->grad.empty()) return;
      auto& ga = pa->ensure_grad();
      for (double& g : ga) g += po->grad[0];
    });
  }
  return result;
}

Tensor mean_rows(const Tensor& a) {
  require_defined(a, "mean_rows");
  const std::size_t m = a.rows(), n = a.cols();
  if (m == 0) throw DimensionError("mean_rows: no rows");
  const auto av = a.values();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j] += av[i * n + j];
  }
  for (double& x : out) x /= static_cast<double>(m);
  Tensor result = Tensor::from({1, n}, std::move(out));
  if (recording(a)) {
    StoragePtr pa = a.storage(), po = result.storage();
    attach(result, [pa, po, m, n] {
      if (po->grad.empty()) return;
      auto& ga = pa->ensure_grad();
      const double inv = 1.0 / static_cast<double>(m);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += po->grad[j] * inv;
      }
    });
  }
  return result;
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no operands");
  const std::size_t m = parts[0].rows();
  std::size_t n = 0;
  bool any_grad = false;
  for (const Tensor& p : parts) {
    require_defined(p, "concat_cols");
    if (p.rows() != m) {
      throw DimensionError(fmt::format("concat_cols: {} vs {}",
                                       parts[0].shape().str(), p.shape().str()));
    }
    n += p.cols();
    any_grad = any_grad || p.requires_grad();
  }
  std::vector<double> out(m * n);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const Tensor& p : parts) {
    offsets.push_back(off);
    const auto pv = p.values();
    const std::size_t w = p.cols();
    for (std::size_t i = 0; i < m; ++i) {
      std::copy_n(&pv[i * w], w, &out[i * n + off]);
    }
    off += w;
  }
  Tensor result = Tensor::from({m, n}, std::move(out));
  if (g_active_tape != nullptr && any_grad) {
    std::vector<StoragePtr> ins;
    for (const Tensor& p : parts) ins.push_back(p.storage());
    StoragePtr po = result.storage();
    attach(result, [ins = std::move(ins), offsets = std::move(offsets), po, m, n] {
      if (po->grad.empty()) return;
      for (std::size_t k = 0; k < ins.size(); ++k) {
        if (!ins[k]->requires_grad) continue;
        auto& gk = ins[k]->ensure_grad();
        const std::size_t w = ins[k]->shape.cols;
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < w; ++j) {
            gk[i * w + j] += po->grad[i * n + offsets[k] + j];
          }
        }
      }
    });
  }
  return result;
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no operands");
  const std::size_t n = parts[0].cols();
  std::size_t m = 0;
  bool any_grad = false;
  for (const Tensor& p : parts) {
    require_defined(p, "concat_rows");
    if (p.cols() != n) {
      throw DimensionError(fmt::format("concat_rows: {} vs {}",
                                       parts[0].shape().str(), p.shape().str()));
    }
    m += p.rows();
    any_grad = any_grad || p.requires_grad();
  }
  std::vector<double> out;
  out.reserve(m * n);
  for (const Tensor& p : parts) {
    const auto pv = p.values();
    out.insert(out.end(), pv.begin(), pv.end());
  }
  Tensor result = Tensor::from({m, n}, std::move(out));
  if (g_active_tape != nullptr && any_grad) {
    std::vector<StoragePtr> ins;
    for (const Tensor& p : parts) ins.push_back(p.storage());
    StoragePtr po = result.storage();
    attach(result, [ins = std::move(ins), po] {
      if (po->grad.empty()) return;
      std::size_t off = 0;
      for (const auto& in : ins) {
        const std::size_t len = in->value.size();
        if (in->requires_grad) {
          auto& gi = in->ensure_grad();
          for (std::size_t i = 0; i < len; ++i) gi[i] += po->grad[off + i];
        }
        off += len;
      }
    });
  }
  return result;
}

Tensor slice_cols(const Tensor& a, std::size_t start, std::size_t count) {
  require_defined(a, "slice_cols");
  if (start + count > a.cols()) {
    throw DimensionError(fmt::format("slice_cols: [{}, {}) outside {}", start,
                                     start + count, a.shape().str()));
  }
  const std::size_t m = a.rows(), n = a.cols();
  const auto av = a.values();
  std::vector<double> out(m * count);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(&av[i * n + start], count, &out[i * count]);
  }
  Tensor result = Tensor::from({m, count}, std::move(out));
  if (recording(a)) {
    StoragePtr pa = a.storage(), po = result.storage();
    attach(result, [pa, po, m, n, start, count] {
      if (po->grad.empty()) return;
      auto& ga = pa->ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < count; ++j) {
          ga[i * n + start + j] += po->grad[i * count + j];
        }
      }
    });
  }
  return result;
}

Tensor row(const Tensor& a, std::size_t r) {
  require_defined(a, "row");
  if (r >= a.rows()) {
    throw DimensionError(fmt::format("row {} outside {}", r, a.shape().str()));
  }
  const std::size_t n = a.cols();
  const auto av = a.values();
  Tensor result = Tensor::from({1, n}, std::vector<double>(&av[r * n], &av[r * n] + n));
  if (recording(a)) {
    StoragePtr pa = a.storage(), po = result.storage();
    attach(result, [pa, po, r, n] {
      if (po->grad.empty()) return;
      auto& ga = pa->ensure_grad();
      for (std::size_t j = 0; j < n; ++j) ga[r * n + j] += po->grad[j];
    });
  }
  return result;
}

Tensor element(const Tensor& a, std::size_t r, std::size_t c) {
  const double v = a.at(r, c);
  Tensor result = Tensor::scalar(v);
  if (recording(a)) {
    StoragePtr pa = a.storage(), po = result.storage();
    const std::size_t idx = r * a.cols() + c;
    attach(result, [pa, po, idx] {
      if (po->grad.empty()) return;
      pa->ensure_grad()[idx] += po->grad[0];
    });
  }
  return result;
}

Tensor reshape(const Tensor& a, Shape shape) {
  require_defined(a, "reshape");
  if (shape.size() != a.size()) {
    throw DimensionError(
        fmt::format("reshape: {} to {}", a.shape().str(), shape.str()));
  }
  const auto av = a.values();
  Tensor result = Tensor::from(shape, std::vector<double>(av.begin(), av.end()));
  if (recording(a)) {
    StoragePtr pa = a.storage(), po = result.storage();
    attach(result, [pa, po] {
      if (po->grad.empty()) return;
      auto& ga = pa->ensure_grad();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += po->grad[i];
    });
  }
  return result;
}

Tensor gather_rows(const Tensor& table, std::span<const int> ids) {
  require_defined(table, "gather_rows");
  const std::size_t n = table.cols();
  const auto tv = table.values();
  std::vector<double> out(ids.size() * n);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] < 0 || static_cast<std::size_t>(ids[k]) >= table.rows()) {
      throw DimensionError(fmt::format("gather_rows: id {} outside table {}",
                                       ids[k], table.shape().str()));
    }
    std::copy_n(&tv[static_cast<std::size_t>(ids[k]) * n], n, &out[k * n]);
  }
  Tensor result = Tensor::from({ids.size(), n}, std::move(out));
  if (recording(table)) {
    StoragePtr pt = table.storage(), po = result.storage();
    std::vector<int> idv(ids.begin(), ids.end());
    attach(result, [pt, po, idv = std::move(idv), n] {
      if (po->grad.empty()) return;
      auto& gt = pt->ensure_grad();
      for (std::size_t k = 0; k < idv.size(); ++k) {
        double* dst = &gt[static_cast<std::size_t>(idv[k]) * n];
        for (std::size_t j = 0; j < n; ++j) dst[j] += po->grad[k * n + j];
      }
    });
  }
  return result;
}

std::vector<double> dropout_mask(std::size_t size, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ContractViolation(fmt::format("dropout rate {} outside [0, 1)", p));
  }
  std::vector<double> mask(size, 1.0);
  if (p == 0.0) return mask;
  std::bernoulli_distribution keep(1.0 - p);
  const double kept = 1.0 / (1.0 - p);
  for (double& m : mask) m = keep(rng) ? kept : 0.0;
  return mask;
}

Tensor dropout(const Tensor& a, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ContractViolation(fmt::format("dropout rate {} outside [0, 1)", p));
  }
  if (p == 0.0) return a;
  return mul(a, Tensor::from(a.shape(), dropout_mask(a.size(), p, rng)));
}

std::vector<Tensor> split_cols(const Tensor& a,
                               std::span<const std::size_t> widths) {
  std::size_t total = 0;
  for (std::size_t w : widths) total += w;
  if (total != a.cols()) {
    throw DimensionError(fmt::format("split_cols: widths sum to {} for {}",
                                     total, a.shape().str()));
  }
  std::vector<Tensor> parts;
  std::size_t off = 0;
  for (std::size_t w : widths) {
    parts.push_back(slice_cols(a, off, w));
    off += w;
  }
  return parts;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace mcrf
