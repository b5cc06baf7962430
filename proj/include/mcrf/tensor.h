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

#ifndef MCRF_TENSOR_H_
#define MCRF_TENSOR_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace mcrf {

// Row-major matrix shape. Vectors are 1 x n, scalars 1 x 1.
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

// A dense 64-bit tensor with an optional gradient accumulator.
//
// Tensor has reference semantics: copies alias the same storage, which is
// how parameters are shared between the model and the optimizer. Use clone()
// for an independent copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape);
  static Tensor filled(Shape shape, double value);
  static Tensor from(Shape shape, std::vector<double> values);
  static Tensor row_vector(std::vector<double> values);
  static Tensor scalar(double value);

  bool defined() const { return data_ != nullptr; }
  const Shape& shape() const;
  std::size_t rows() const { return shape().rows; }
  std::size_t cols() const { return shape().cols; }
  std::size_t size() const { return shape().size(); }

  std::span<const double> values() const;
  std::span<double> mutable_values();
  double at(std::size_t r, std::size_t c) const;
  double item() const;

  // Gradient storage is allocated lazily; an empty span means "no gradient
  // has reached this tensor yet".
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  bool has_grad() const;
  void zero_grad();

  bool requires_grad() const;
  void set_requires_grad(bool on);

  // Independent copy of the values (no gradient, same requires_grad flag).
  Tensor clone() const;
  // Copy of the values that never records onto a tape.
  Tensor detach() const;

  bool same_storage(const Tensor& other) const { return data_ == other.data_; }

  struct Storage;
  explicit Tensor(std::shared_ptr<Storage> data) : data_(std::move(data)) {}
  const std::shared_ptr<Storage>& storage() const { return data_; }

 private:
  std::shared_ptr<Storage> data_;
};

// A tensor paired with a stable name (checkpoint key, report label).
struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct Tensor::Storage {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;

  std::vector<double>& ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

// Ordered record of adjoint closures for one forward pass.
class Tape {
 public:
  void record(std::function<void()> adjoint);
  // Seeds d(loss)/d(loss) = seed and replays adjoints in reverse order.
  void backward(const Tensor& loss, double seed = 1.0);
  void clear();
  std::size_t size() const { return adjoints_.size(); }

 private:
  std::vector<std::function<void()>> adjoints_;
};

// Makes `tape` the recording target for ops on this thread while alive.
// Without an active tape, ops compute values only.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

Tape* active_tape();

using Rng = std::mt19937_64;

enum class Axis { kRows, kCols };

// Differentiable primitives. Every op checks shapes and throws DimensionError
// naming both operands on mismatch.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// a[m x n] + row[1 x n] on every row.
Tensor add_row(const Tensor& a, const Tensor& row);
// a[m x n] + col (any tensor with m entries) on every column.
Tensor add_col(const Tensor& a, const Tensor& col);
// a - s for a 1 x 1 tensor s.
Tensor sub_scalar(const Tensor& a, const Tensor& s);
Tensor scale(const Tensor& a, double factor);
// Row r of `a` multiplied by the constant factors[r]; no gradient into factors.
Tensor scale_rows(const Tensor& a, std::span<const double> factors);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
// Row-wise softmax / log-softmax.
Tensor softmax(const Tensor& a);
Tensor log_softmax(const Tensor& a);
// log sum exp over every entry -> 1 x 1.
Tensor log_sum_exp(const Tensor& v);
// Reduction along one axis: kRows collapses rows (-> 1 x cols), kCols
// collapses columns (-> 1 x rows).
Tensor log_sum_exp(const Tensor& m, Axis axis);
Tensor sum(const Tensor& a);
Tensor mean_rows(const Tensor& a);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& a, std::size_t start, std::size_t count);
Tensor row(const Tensor& a, std::size_t r);
Tensor element(const Tensor& a, std::size_t r, std::size_t c);
Tensor reshape(const Tensor& a, Shape shape);
Tensor gather_rows(const Tensor& table, std::span<const int> ids);
// Inverted dropout: survivors scaled by 1/(1-p). Identity when p == 0.
Tensor dropout(const Tensor& a, double p, Rng& rng);
std::vector<double> dropout_mask(std::size_t size, double p, Rng& rng);

// Splits along columns into pieces of the given widths (inverse of concat).
std::vector<Tensor> split_cols(const Tensor& a, std::span<const std::size_t> widths);

bool all_finite(std::span<const double> v);

}  // namespace mcrf

#endif  // MCRF_TENSOR_H_
