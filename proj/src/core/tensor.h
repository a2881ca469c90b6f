// Copyright 2026 The MI Observer Authors.
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

#ifndef MIOBS_CORE_TENSOR_H_
#define MIOBS_CORE_TENSOR_H_

// Dense float64 tensors (rank 0..2) and a define-by-run reverse-mode tape.
//
// A Tape records every primitive applied to its Vars in creation order, so
// node ids are already a topological order; backward() walks them in reverse.
// Parameters enter a tape through Tape::param() and receive accumulated
// gradients in Parameter::grad when backward() runs.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "core/random.h"

namespace miobs {

class Shape {
 public:
  Shape() = default;  // rank 0: a scalar
  Shape(std::initializer_list<std::size_t> dims);

  static Shape Vector(std::size_t n) { return Shape{n}; }
  static Shape Matrix(std::size_t r, std::size_t c) { return Shape{r, c}; }

  std::size_t rank() const { return rank_; }
  std::size_t operator[](std::size_t i) const { return dims_[i]; }
  std::size_t elements() const;
  bool operator==(const Shape& o) const {
    return rank_ == o.rank_ && dims_ == o.dims_;
  }
  std::string str() const;

 private:
  std::array<std::size_t, 2> dims_{0, 0};
  std::uint8_t rank_ = 0;
};

class Tensor {
 public:
  Tensor() : data_(1, 0.0) {}
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor Scalar(double v) { return Tensor(Shape{}, {v}); }
  static Tensor Vector(std::vector<double> v);
  static Tensor Matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> v);
  static Tensor Identity(std::size_t n);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.rank(); }
  std::size_t size() const { return data_.size(); }
  // Rank 2: (rows, cols). Rank 1 reads as a single row.
  std::size_t rows() const { return rank() == 2 ? shape_[0] : 1; }
  std::size_t cols() const {
    return rank() == 2 ? shape_[1] : (rank() == 1 ? shape_[0] : 1);
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  const std::vector<double>& values() const { return data_; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double item() const;

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols(), cols()};
  }
  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols(), cols()};
  }

  void fill(double v);
  bool operator==(const Tensor& o) const {
    return shape_ == o.shape_ && data_ == o.data_;
  }

 private:
  Shape shape_;
  std::vector<double> data_;
};

// A trainable array. Rows flagged by zero_first_row stay exactly zero.
struct Parameter {
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}
  std::string name;
  Tensor value;
  Tensor grad;
  bool zero_first_row = false;

  void zero_grad() { grad.fill(0.0); }
};

class Tape;

class Var {
 public:
  Var() = default;
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  int id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

namespace detail {

enum class Op : std::uint8_t {
  kLeaf,
  kParam,
  kMatMul,
  kTranspose,
  kAdd,
  kAddRow,
  kSub,
  kMul,
  kAffine,
  kSigmoid,
  kTanh,
  kRelu,
  kLog,
  kPow,
  kSoftmax,
  kSum,
  kConcat,
  kSlice,
  kRow,
  kStackRows,
  kRowMax,
  kRepeatRows,
  kGatherRows,
  kDropout,
  kPick,
  kGruStep,
  kCustom,
};

// Backward rule for user-defined primitives: given the output gradient and
// input values, return one gradient per input (same shapes as inputs).
using CustomBackward = std::function<std::vector<Tensor>(
    const Tensor& out_grad, const std::vector<const Tensor*>& inputs,
    const Tensor& output)>;

struct Node {
  Op op = Op::kLeaf;
  bool needs_grad = false;
  int a = -1;
  int b = -1;
  std::vector<int> more;  // variadic inputs (concat, stack, custom)
  Tensor value;
  Parameter* param = nullptr;
  double s0 = 0.0;
  double s1 = 0.0;
  std::size_t i0 = 0;
  std::size_t i1 = 0;
  std::vector<std::size_t> idx;
  Tensor aux;
  std::shared_ptr<CustomBackward> custom;
};

}  // namespace detail

// Gradients produced by one backward pass, indexed by node.
class Gradients {
 public:
  bool has(Var v) const;
  const Tensor& operator[](Var v) const;

 private:
  friend class Tape;
  std::vector<Tensor> grads_;
  std::vector<bool> present_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);
  // Each parameter is materialized once per tape.
  Var param(Parameter& p);

  // Runs the reverse sweep from a scalar loss. A tape can be swept once.
  Gradients backward(Var loss);

  Var custom(const std::vector<Var>& inputs, Tensor value,
             detail::CustomBackward backward);

  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

  // Op plumbing.
  const detail::Node& node(int id) const { return nodes_[id]; }
  Var push(detail::Node n);
  void check_owner(Var v) const;

 private:
  std::vector<detail::Node> nodes_;
  std::vector<std::pair<const Parameter*, int>> param_nodes_;
  bool consumed_ = false;
};

// ---- primitives -----------------------------------------------------------

// (m x k)(k x n) -> (m x n); (k)(k x n) -> (n).
Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
// Adds vector v to every row of matrix m.
Var add_row(Var m, Var v);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
// alpha * a + beta, elementwise.
Var affine(Var a, double alpha, double beta = 0.0);
inline Var scale(Var a, double s) { return affine(a, s, 0.0); }
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
// log(max(a, floor)); gradient is zero where the floor is active.
Var log(Var a, double floor = 1e-12);
Var pow(Var a, double exponent);
// Rank 1: axis 0. Rank 2: axis 1 normalizes each row, axis 0 each column.
Var softmax(Var a, int axis = -1);
Var sum(Var a);
// Rank-1 inputs: axis 0 joins end to end. Rank-2 inputs: axis 1 joins
// columns (equal row counts), axis 0 stacks rows (equal column counts).
Var concat(const std::vector<Var>& parts, int axis = 0);
Var slice(Var v, std::size_t start, std::size_t len);
std::vector<Var> split(Var v, const std::vector<std::size_t>& sizes);
Var row(Var m, std::size_t r);
Var stack_rows(const std::vector<Var>& rows);
// Per-row maximum of a matrix.
Var row_max(Var m);
Var repeat_rows(Var v, std::size_t n);
Var gather_rows(Var table, const std::vector<std::size_t>& indices);
// Inverted dropout: scales kept units by 1/(1-p) in training, identity in
// eval. p must lie in [0, 1).
Var dropout(Var a, double p, bool train, Rng* rng);
Var pick(Var v, std::size_t i);

// One GRU update from the projected input xw = [x Wz + bz; x Wr + br; x Wc + bc]
// (3d), state h (d), gate weights u_zr (d x 2d) and candidate weights u_c
// (d x d), recorded as a single node.
Var gru_step(Var xw, Var h, Var u_zr, Var u_c);

// ---- gradient verification -----------------------------------------------

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst;  // "param[index]" of the worst coordinate
};

// Relative error |a-n| / max(1, |a|, |n|) per coordinate, central differences.
double grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x,
                  double eps = 1e-5);

// Same measure over parameter entries read by f. When max_per_param > 0 a
// seeded subset of at most that many coordinates per parameter is checked.
GradCheckResult grad_check_params(const std::function<Var(Tape&)>& f,
                                  const std::vector<Parameter*>& params,
                                  double eps = 1e-5,
                                  std::size_t max_per_param = 0,
                                  std::uint64_t seed = 1);

}  // namespace miobs

#endif  // MIOBS_CORE_TENSOR_H_
