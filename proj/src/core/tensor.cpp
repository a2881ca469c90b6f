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

#include "core/tensor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include "core/error.h"

namespace miobs {

using detail::Node;
using detail::Op;

// ---- Shape / Tensor --------------------------------------------------------

Shape::Shape(std::initializer_list<std::size_t> dims) {
  if (dims.size() > 2) throw DimensionError("rank above 2 is not supported");
  rank_ = static_cast<std::uint8_t>(dims.size());
  std::size_t i = 0;
  for (auto d : dims) dims_[i++] = d;
}

std::size_t Shape::elements() const {
  std::size_t n = 1;
  for (std::size_t i = 0; i < rank_; ++i) n *= dims_[i];
  return n;
}

std::string Shape::str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < rank_; ++i) {
    if (i) os << 'x';
    os << dims_[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(shape), data_(shape.elements(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.elements()) {
    throw DimensionError("shape " + shape_.str() + " needs " +
                         std::to_string(shape_.elements()) + " values, got " +
                         std::to_string(data_.size()));
  }
}

Tensor Tensor::Vector(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor(Shape{n}, std::move(v));
}

Tensor Tensor::Matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> v) {
  return Tensor(Shape{rows, cols}, std::move(v));
}

Tensor Tensor::Identity(std::size_t n) {
  Tensor t(Shape{n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

double Tensor::item() const {
  if (data_.size() != 1) throw DimensionError("item() on non-scalar " + shape_.str());
  return data_[0];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

// ---- Var / Gradients / Tape ------------------------------------------------

const Tensor& Var::value() const { return tape_->node(id_).value; }

bool Gradients::has(Var v) const {
  return v.id() >= 0 && static_cast<std::size_t>(v.id()) < present_.size() &&
         present_[v.id()];
}

const Tensor& Gradients::operator[](Var v) const {
  if (!has(v)) throw ContractError("no gradient recorded for node " +
                                   std::to_string(v.id()));
  return grads_[v.id()];
}

void Tape::check_owner(Var v) const {
  if (v.tape() != this) throw ContractError("Var belongs to a different tape");
}

Var Tape::push(Node n) {
  auto flag = [&](int id) { return id >= 0 && nodes_[id].needs_grad; };
  if (n.op != Op::kLeaf && n.op != Op::kParam) {
    n.needs_grad = flag(n.a) || flag(n.b) ||
                   std::any_of(n.more.begin(), n.more.end(), flag);
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::variable(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = true;
  return push(std::move(n));
}

Var Tape::param(Parameter& p) {
  for (const auto& [ptr, id] : param_nodes_) {
    if (ptr == &p) return Var(this, id);
  }
  Node n;
  n.op = Op::kParam;
  n.value = p.value;
  n.param = &p;
  n.needs_grad = true;
  Var v = push(std::move(n));
  param_nodes_.emplace_back(&p, v.id());
  return v;
}

Var Tape::custom(const std::vector<Var>& inputs, Tensor value,
                 detail::CustomBackward backward) {
  Node n;
  n.op = Op::kCustom;
  for (Var v : inputs) {
    check_owner(v);
    n.more.push_back(v.id());
  }
  n.value = std::move(value);
  n.custom = std::make_shared<detail::CustomBackward>(std::move(backward));
  return push(std::move(n));
}

namespace {

void axpy(std::span<double> dst, std::span<const double> src, double s = 1.0) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += s * src[i];
}

}  // namespace

Gradients Tape::backward(Var loss) {
  check_owner(loss);
  if (consumed_) {
    throw ContractError("backward already ran on this tape; record a new forward pass");
  }
  if (loss.value().size() != 1) {
    throw ContractError("backward needs a scalar loss, got " + loss.shape().str());
  }
  consumed_ = true;

  Gradients out;
  out.grads_.resize(nodes_.size());
  out.present_.assign(nodes_.size(), false);
  auto& g = out.grads_;
  auto& present = out.present_;
  auto grad_of = [&](int id) -> Tensor& {
    if (!present[id]) {
      g[id] = Tensor(nodes_[id].value.shape());
      present[id] = true;
    }
    return g[id];
  };

  grad_of(loss.id()).fill(1.0);

  for (int id = loss.id(); id >= 0; --id) {
    if (!present[id]) continue;
    const Node& n = nodes_[id];
    if (!n.needs_grad) continue;
    const Tensor& dy = g[id];
    const Tensor& y = n.value;
    auto wants = [&](int in) { return in >= 0 && nodes_[in].needs_grad; };

    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kParam:
        axpy(n.param->grad.data(), dy.data());
        break;
      case Op::kMatMul: {
        const Tensor& A = nodes_[n.a].value;
        const Tensor& B = nodes_[n.b].value;
        const std::size_t m = A.rows(), k = A.cols(), cols = B.cols();
        if (wants(n.a)) {
          Tensor& dA = grad_of(n.a);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              double acc = 0.0;
              for (std::size_t j = 0; j < cols; ++j)
                acc += dy[i * cols + j] * B[p * cols + j];
              dA[i * k + p] += acc;
            }
        }
        if (wants(n.b)) {
          Tensor& dB = grad_of(n.b);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              const double aip = A[i * k + p];
              if (aip == 0.0) continue;
              for (std::size_t j = 0; j < cols; ++j)
                dB[p * cols + j] += aip * dy[i * cols + j];
            }
        }
        break;
      }
      case Op::kTranspose: {
        Tensor& dA = grad_of(n.a);
        const std::size_t r = y.rows(), c = y.cols();
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j) dA[j * r + i] += dy[i * c + j];
        break;
      }
      case Op::kAdd:
        if (wants(n.a)) axpy(grad_of(n.a).data(), dy.data());
        if (wants(n.b)) axpy(grad_of(n.b).data(), dy.data());
        break;
      case Op::kAddRow: {
        if (wants(n.a)) axpy(grad_of(n.a).data(), dy.data());
        if (wants(n.b)) {
          Tensor& dv = grad_of(n.b);
          for (std::size_t r = 0; r < y.rows(); ++r) axpy(dv.data(), dy.row(r));
        }
        break;
      }
      case Op::kSub:
        if (wants(n.a)) axpy(grad_of(n.a).data(), dy.data());
        if (wants(n.b)) axpy(grad_of(n.b).data(), dy.data(), -1.0);
        break;
      case Op::kMul: {
        const Tensor& A = nodes_[n.a].value;
        const Tensor& B = nodes_[n.b].value;
        if (wants(n.a)) {
          Tensor& dA = grad_of(n.a);
          for (std::size_t i = 0; i < dy.size(); ++i) dA[i] += dy[i] * B[i];
        }
        if (wants(n.b)) {
          Tensor& dB = grad_of(n.b);
          for (std::size_t i = 0; i < dy.size(); ++i) dB[i] += dy[i] * A[i];
        }
        break;
      }
      case Op::kAffine:
        axpy(grad_of(n.a).data(), dy.data(), n.s0);
        break;
      case Op::kSigmoid: {
        Tensor& dA = grad_of(n.a);
        for (std::size_t i = 0; i < dy.size(); ++i)
          dA[i] += dy[i] * y[i] * (1.0 - y[i]);
        break;
      }
      case Op::kTanh: {
        Tensor& dA = grad_of(n.a);
        for (std::size_t i = 0; i < dy.size(); ++i)
          dA[i] += dy[i] * (1.0 - y[i] * y[i]);
        break;
      }
      case Op::kRelu: {
        const Tensor& x = nodes_[n.a].value;
        Tensor& dA = grad_of(n.a);
        for (std::size_t i = 0; i < dy.size(); ++i)
          if (x[i] > 0.0) dA[i] += dy[i];
        break;
      }
      case Op::kLog: {
        const Tensor& x = nodes_[n.a].value;
        Tensor& dA = grad_of(n.a);
        for (std::size_t i = 0; i < dy.size(); ++i)
          if (x[i] > n.s0) dA[i] += dy[i] / x[i];
        break;
      }
      case Op::kPow: {
        const Tensor& x = nodes_[n.a].value;
        Tensor& dA = grad_of(n.a);
        const double e = n.s0;
        if (e == 0.0) break;
        for (std::size_t i = 0; i < dy.size(); ++i) {
          if (dy[i] == 0.0) continue;
          dA[i] += dy[i] * e * std::pow(x[i], e - 1.0);
        }
        break;
      }
      case Op::kSoftmax: {
        Tensor& dA = grad_of(n.a);
        // i0 = number of groups, i1 = group length, s0 = stride flag.
        const bool by_column = n.s0 != 0.0;
        const std::size_t groups = n.i0, len = n.i1;
        for (std::size_t gi = 0; gi < groups; ++gi) {
          auto at = [&](std::size_t e) {
            return by_column ? e * groups + gi : gi * len + e;
          };
          double dot = 0.0;
          for (std::size_t e = 0; e < len; ++e) dot += y[at(e)] * dy[at(e)];
          for (std::size_t e = 0; e < len; ++e)
            dA[at(e)] += y[at(e)] * (dy[at(e)] - dot);
        }
        break;
      }
      case Op::kSum: {
        Tensor& dA = grad_of(n.a);
        const double d = dy[0];
        for (auto& v : dA.data()) v += d;
        break;
      }
      case Op::kConcat: {
        const int axis = static_cast<int>(n.s0);
        if (y.rank() == 1 || axis == 0) {
          std::size_t off = 0;
          for (int in : n.more) {
            const std::size_t len = nodes_[in].value.size();
            if (wants(in)) {
              axpy(grad_of(in).data(), dy.data().subspan(off, len));
            }
            off += len;
          }
        } else {
          std::size_t col = 0;
          const std::size_t total = y.cols();
          for (int in : n.more) {
            const std::size_t w = nodes_[in].value.cols();
            if (wants(in)) {
              Tensor& dI = grad_of(in);
              for (std::size_t r = 0; r < y.rows(); ++r)
                for (std::size_t c = 0; c < w; ++c)
                  dI[r * w + c] += dy[r * total + col + c];
            }
            col += w;
          }
        }
        break;
      }
      case Op::kSlice:
      case Op::kRow: {
        Tensor& dA = grad_of(n.a);
        axpy(dA.data().subspan(n.i0, dy.size()), dy.data());
        break;
      }
      case Op::kStackRows: {
        std::size_t off = 0;
        for (int in : n.more) {
          const std::size_t len = nodes_[in].value.size();
          if (wants(in)) axpy(grad_of(in).data(), dy.data().subspan(off, len));
          off += len;
        }
        break;
      }
      case Op::kRowMax: {
        Tensor& dA = grad_of(n.a);
        const std::size_t c = nodes_[n.a].value.cols();
        for (std::size_t r = 0; r < dy.size(); ++r) dA[r * c + n.idx[r]] += dy[r];
        break;
      }
      case Op::kRepeatRows: {
        Tensor& dA = grad_of(n.a);
        for (std::size_t r = 0; r < y.rows(); ++r) axpy(dA.data(), dy.row(r));
        break;
      }
      case Op::kGatherRows: {
        Tensor& dT = grad_of(n.a);
        const std::size_t c = y.cols();
        for (std::size_t r = 0; r < n.idx.size(); ++r)
          axpy(dT.data().subspan(n.idx[r] * c, c), dy.row(r));
        break;
      }
      case Op::kDropout: {
        Tensor& dA = grad_of(n.a);
        for (std::size_t i = 0; i < dy.size(); ++i) dA[i] += dy[i] * n.aux[i];
        break;
      }
      case Op::kPick:
        grad_of(n.a)[n.i0] += dy[0];
        break;
      case Op::kGruStep: {
        // aux = [z ; r ; c ; r*h]
        const std::size_t d = y.size();
        const Tensor& h = nodes_[n.b].value;
        const Tensor& Uzr = nodes_[n.more[0]].value;
        const Tensor& Uc = nodes_[n.more[1]].value;
        const double* z = n.aux.data().data();
        const double* r = z + d;
        const double* c = r + d;
        const double* rh = c + d;
        std::vector<double> da(3 * d), dh(d), drh(d, 0.0);
        for (std::size_t j = 0; j < d; ++j) {
          da[j] = dy[j] * (c[j] - h[j]) * z[j] * (1.0 - z[j]);
          da[2 * d + j] = dy[j] * z[j] * (1.0 - c[j] * c[j]);
          dh[j] = dy[j] * (1.0 - z[j]);
        }
        for (std::size_t p = 0; p < d; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < d; ++j) acc += Uc[p * d + j] * da[2 * d + j];
          drh[p] = acc;
        }
        for (std::size_t j = 0; j < d; ++j) {
          da[d + j] = drh[j] * h[j] * r[j] * (1.0 - r[j]);
          dh[j] += drh[j] * r[j];
        }
        for (std::size_t p = 0; p < d; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < 2 * d; ++j) acc += Uzr[p * 2 * d + j] * da[j];
          dh[p] += acc;
        }
        if (wants(n.a)) axpy(grad_of(n.a).data(), da);
        if (wants(n.b)) axpy(grad_of(n.b).data(), dh);
        if (wants(n.more[0])) {
          Tensor& dU = grad_of(n.more[0]);
          for (std::size_t p = 0; p < d; ++p)
            for (std::size_t j = 0; j < 2 * d; ++j) dU[p * 2 * d + j] += h[p] * da[j];
        }
        if (wants(n.more[1])) {
          Tensor& dU = grad_of(n.more[1]);
          for (std::size_t p = 0; p < d; ++p)
            for (std::size_t j = 0; j < d; ++j) dU[p * d + j] += rh[p] * da[2 * d + j];
        }
        break;
      }
      case Op::kCustom: {
        std::vector<const Tensor*> ins;
        for (int in : n.more) ins.push_back(&nodes_[in].value);
        std::vector<Tensor> gi = (*n.custom)(dy, ins, y);
        if (gi.size() != n.more.size()) {
          throw ContractError("custom backward returned wrong gradient count");
        }
        for (std::size_t i = 0; i < gi.size(); ++i) {
          if (!wants(n.more[i])) continue;
          Tensor& dI = grad_of(n.more[i]);
          if (!(gi[i].shape() == dI.shape())) {
            throw DimensionError("custom backward gradient shape " +
                                 gi[i].shape().str() + " vs input " +
                                 dI.shape().str());
          }
          axpy(dI.data(), gi[i].data());
        }
        break;
      }
    }
  }
  return out;
}

// ---- primitives --------------------------------------------------------------

namespace {

Tape& same_tape(Var a, Var b) {
  if (!a.valid() || !b.valid()) throw ContractError("uninitialized Var");
  if (a.tape() != b.tape()) throw ContractError("Vars from different tapes");
  return *a.tape();
}

Tape& tape_of(Var a) {
  if (!a.valid()) throw ContractError("uninitialized Var");
  return *a.tape();
}

void require_same_shape(Var a, Var b, const char* op) {
  if (!(a.shape() == b.shape())) {
    throw DimensionError(std::string(op) + ": " + a.shape().str() + " vs " +
                         b.shape().str());
  }
}

Var unary(Var a, Op op, Tensor value, double s0 = 0.0) {
  Node n;
  n.op = op;
  n.a = a.id();
  n.value = std::move(value);
  n.s0 = s0;
  return tape_of(a).push(std::move(n));
}

template <typename F>
Tensor map(const Tensor& x, F f) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return out;
}

double stable_sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (B.rank() != 2 || A.rank() < 1) {
    throw DimensionError("matmul needs (m x k | k) times (k x n), got " +
                         A.shape().str() + " x " + B.shape().str());
  }
  const std::size_t m = A.rows(), k = A.cols(), cols = B.cols();
  if (B.rows() != k) {
    throw DimensionError("matmul inner dims differ: " + A.shape().str() +
                         " x " + B.shape().str());
  }
  Tensor C(A.rank() == 2 ? Shape{m, cols} : Shape{cols});
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = C.data().data() + i * cols;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = B.data().data() + p * cols;
      for (std::size_t j = 0; j < cols; ++j) crow[j] += aip * brow[j];
    }
  }
  Node n;
  n.op = Op::kMatMul;
  n.a = a.id();
  n.b = b.id();
  n.value = std::move(C);
  return t.push(std::move(n));
}

Var transpose(Var a) {
  const Tensor& A = a.value();
  if (A.rank() != 2) throw DimensionError("transpose needs a matrix");
  Tensor out(Shape{A.cols(), A.rows()});
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) out.at(j, i) = A.at(i, j);
  return unary(a, Op::kTranspose, std::move(out));
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  axpy(out.data(), b.value().data());
  Node n;
  n.op = Op::kAdd;
  n.a = a.id();
  n.b = b.id();
  n.value = std::move(out);
  return t.push(std::move(n));
}

Var add_row(Var m, Var v) {
  Tape& t = same_tape(m, v);
  const Tensor& M = m.value();
  if (M.rank() != 2 || v.value().rank() != 1 || v.value().size() != M.cols()) {
    throw DimensionError("add_row: " + M.shape().str() + " + " +
                         v.shape().str());
  }
  Tensor out = M;
  for (std::size_t r = 0; r < M.rows(); ++r) axpy(out.row(r), v.value().data());
  Node n;
  n.op = Op::kAddRow;
  n.a = m.id();
  n.b = v.id();
  n.value = std::move(out);
  return t.push(std::move(n));
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  axpy(out.data(), b.value().data(), -1.0);
  Node n;
  n.op = Op::kSub;
  n.a = a.id();
  n.b = b.id();
  n.value = std::move(out);
  return t.push(std::move(n));
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  const Tensor& B = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
  Node n;
  n.op = Op::kMul;
  n.a = a.id();
  n.b = b.id();
  n.value = std::move(out);
  return t.push(std::move(n));
}

Var affine(Var a, double alpha, double beta) {
  return unary(a, Op::kAffine,
               map(a.value(), [&](double v) { return alpha * v + beta; }),
               alpha);
}

Var sigmoid(Var a) { return unary(a, Op::kSigmoid, map(a.value(), stable_sigmoid)); }

Var tanh(Var a) {
  return unary(a, Op::kTanh, map(a.value(), [](double v) { return std::tanh(v); }));
}

Var relu(Var a) {
  return unary(a, Op::kRelu,
               map(a.value(), [](double v) { return v > 0.0 ? v : 0.0; }));
}

Var log(Var a, double floor) {
  return unary(a, Op::kLog,
               map(a.value(), [&](double v) { return std::log(std::max(v, floor)); }),
               floor);
}

Var pow(Var a, double exponent) {
  return unary(a, Op::kPow,
               map(a.value(), [&](double v) { return std::pow(v, exponent); }),
               exponent);
}

Var softmax(Var a, int axis) {
  const Tensor& x = a.value();
  if (x.rank() == 0) throw DimensionError("softmax of a scalar");
  if (axis < 0) axis = static_cast<int>(x.rank()) - 1;
  const bool by_column = x.rank() == 2 && axis == 0;
  const std::size_t groups = by_column ? x.cols() : x.rows();
  const std::size_t len = by_column ? x.rows() : x.cols();
  if (len == 0) throw DimensionError("softmax over an empty axis");
  Tensor out(x.shape());
  for (std::size_t g = 0; g < groups; ++g) {
    auto at = [&](std::size_t e) { return by_column ? e * groups + g : g * len + e; };
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < len; ++e) mx = std::max(mx, x[at(e)]);
    double z = 0.0;
    for (std::size_t e = 0; e < len; ++e) {
      out[at(e)] = std::exp(x[at(e)] - mx);
      z += out[at(e)];
    }
    for (std::size_t e = 0; e < len; ++e) out[at(e)] /= z;
  }
  Node n;
  n.op = Op::kSoftmax;
  n.a = a.id();
  n.value = std::move(out);
  n.s0 = by_column ? 1.0 : 0.0;
  n.i0 = groups;
  n.i1 = len;
  return tape_of(a).push(std::move(n));
}

Var sum(Var a) {
  const auto d = a.value().data();
  return unary(a, Op::kSum, Tensor::Scalar(std::accumulate(d.begin(), d.end(), 0.0)));
}

Var concat(const std::vector<Var>& parts, int axis) {
  if (parts.empty()) throw DimensionError("concat of nothing");
  Tape& t = tape_of(parts[0]);
  const std::size_t rank = parts[0].value().rank();
  Node n;
  n.op = Op::kConcat;
  n.s0 = axis;
  for (Var p : parts) {
    t.check_owner(p);
    if (p.value().rank() != rank) throw DimensionError("concat of mixed ranks");
    n.more.push_back(p.id());
  }
  if (rank == 1) {
    std::vector<double> out;
    for (Var p : parts) out.insert(out.end(), p.value().data().begin(), p.value().data().end());
    n.value = Tensor::Vector(std::move(out));
  } else if (rank == 2 && axis == 0) {
    const std::size_t c = parts[0].value().cols();
    std::size_t r = 0;
    std::vector<double> out;
    for (Var p : parts) {
      if (p.value().cols() != c) throw DimensionError("concat rows: column mismatch");
      r += p.value().rows();
      out.insert(out.end(), p.value().data().begin(), p.value().data().end());
    }
    n.value = Tensor::Matrix(r, c, std::move(out));
  } else if (rank == 2 && axis == 1) {
    const std::size_t r = parts[0].value().rows();
    std::size_t c = 0;
    for (Var p : parts) {
      if (p.value().rows() != r) throw DimensionError("concat columns: row mismatch");
      c += p.value().cols();
    }
    Tensor out(Shape{r, c});
    std::size_t col = 0;
    for (Var p : parts) {
      const Tensor& P = p.value();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < P.cols(); ++j) out.at(i, col + j) = P.at(i, j);
      col += P.cols();
    }
    n.value = std::move(out);
  } else {
    throw DimensionError("concat: unsupported rank/axis");
  }
  return t.push(std::move(n));
}

Var slice(Var v, std::size_t start, std::size_t len) {
  const Tensor& x = v.value();
  if (x.rank() != 1 || start + len > x.size()) {
    throw DimensionError("slice [" + std::to_string(start) + ", +" +
                         std::to_string(len) + ") of " + x.shape().str());
  }
  Node n;
  n.op = Op::kSlice;
  n.a = v.id();
  n.i0 = start;
  n.value = Tensor::Vector(std::vector<double>(x.data().begin() + start,
                                               x.data().begin() + start + len));
  return tape_of(v).push(std::move(n));
}

std::vector<Var> split(Var v, const std::vector<std::size_t>& sizes) {
  std::vector<Var> out;
  std::size_t off = 0;
  for (auto s : sizes) {
    out.push_back(slice(v, off, s));
    off += s;
  }
  if (off != v.value().size()) throw DimensionError("split sizes do not cover input");
  return out;
}

Var row(Var m, std::size_t r) {
  const Tensor& x = m.value();
  if (x.rank() != 2 || r >= x.rows()) {
    throw DimensionError("row " + std::to_string(r) + " of " + x.shape().str());
  }
  Node n;
  n.op = Op::kRow;
  n.a = m.id();
  n.i0 = r * x.cols();
  auto span = x.row(r);
  n.value = Tensor::Vector(std::vector<double>(span.begin(), span.end()));
  return tape_of(m).push(std::move(n));
}

Var stack_rows(const std::vector<Var>& rows) {
  if (rows.empty()) throw DimensionError("stack_rows of nothing");
  Tape& t = tape_of(rows[0]);
  const std::size_t c = rows[0].value().size();
  Node n;
  n.op = Op::kStackRows;
  std::vector<double> out;
  out.reserve(c * rows.size());
  for (Var r : rows) {
    t.check_owner(r);
    if (r.value().rank() != 1 || r.value().size() != c) {
      throw DimensionError("stack_rows needs equal-length vectors");
    }
    n.more.push_back(r.id());
    out.insert(out.end(), r.value().data().begin(), r.value().data().end());
  }
  n.value = Tensor::Matrix(rows.size(), c, std::move(out));
  return t.push(std::move(n));
}

Var row_max(Var m) {
  const Tensor& x = m.value();
  if (x.rank() != 2 || x.cols() == 0) throw DimensionError("row_max needs a non-empty matrix");
  Node n;
  n.op = Op::kRowMax;
  n.a = m.id();
  Tensor out(Shape{x.rows()});
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto span = x.row(r);
    auto it = std::max_element(span.begin(), span.end());
    n.idx.push_back(static_cast<std::size_t>(it - span.begin()));
    out[r] = *it;
  }
  n.value = std::move(out);
  return tape_of(m).push(std::move(n));
}

Var repeat_rows(Var v, std::size_t count) {
  const Tensor& x = v.value();
  if (x.rank() != 1) throw DimensionError("repeat_rows needs a vector");
  Tensor out(Shape{count, x.size()});
  for (std::size_t r = 0; r < count; ++r)
    std::copy(x.data().begin(), x.data().end(), out.row(r).begin());
  return unary(v, Op::kRepeatRows, std::move(out));
}

Var gather_rows(Var table, const std::vector<std::size_t>& indices) {
  const Tensor& x = table.value();
  if (x.rank() != 2) throw DimensionError("gather_rows needs a matrix");
  Tensor out(Shape{indices.size(), x.cols()});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= x.rows()) throw DimensionError("gather index out of range");
    std::copy(x.row(indices[r]).begin(), x.row(indices[r]).end(), out.row(r).begin());
  }
  Node n;
  n.op = Op::kGatherRows;
  n.a = table.id();
  n.idx = indices;
  n.value = std::move(out);
  return tape_of(table).push(std::move(n));
}

Var dropout(Var a, double p, bool train, Rng* rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(p));
  }
  if (!train || p == 0.0) return a;
  if (rng == nullptr) throw ContractError("training dropout needs an Rng");
  const Tensor& x = a.value();
  Tensor mask(x.shape());
  Tensor out(x.shape());
  const double keep = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask[i] = rng->uniform() < p ? 0.0 : keep;
    out[i] = x[i] * mask[i];
  }
  Node n;
  n.op = Op::kDropout;
  n.a = a.id();
  n.value = std::move(out);
  n.aux = std::move(mask);
  return tape_of(a).push(std::move(n));
}

Var pick(Var v, std::size_t i) {
  const Tensor& x = v.value();
  if (i >= x.size()) throw DimensionError("pick index out of range");
  Node n;
  n.op = Op::kPick;
  n.a = v.id();
  n.i0 = i;
  n.value = Tensor::Scalar(x[i]);
  return tape_of(v).push(std::move(n));
}

Var gru_step(Var xw, Var h, Var u_zr, Var u_c) {
  Tape& t = same_tape(xw, h);
  same_tape(xw, u_zr);
  same_tape(xw, u_c);
  const std::size_t d = h.value().size();
  if (h.shape().rank() != 1 || !(xw.shape() == Shape{3 * d}) ||
      !(u_zr.shape() == Shape{d, 2 * d}) || !(u_c.shape() == Shape{d, d})) {
    throw DimensionError("gru_step: xw " + xw.shape().str() + ", h " + h.shape().str() +
                         ", u_zr " + u_zr.shape().str() + ", u_c " + u_c.shape().str());
  }
  const Tensor& X = xw.value();
  const Tensor& H = h.value();
  const Tensor& Uzr = u_zr.value();
  const Tensor& Uc = u_c.value();
  Tensor aux(Shape{4 * d});
  double* z = aux.data().data();
  double* r = z + d;
  double* c = r + d;
  double* rh = c + d;
  for (std::size_t j = 0; j < 2 * d; ++j) {
    double acc = X[j];
    for (std::size_t p = 0; p < d; ++p) acc += H[p] * Uzr[p * 2 * d + j];
    (j < d ? z[j] : r[j - d]) = stable_sigmoid(acc);
  }
  for (std::size_t p = 0; p < d; ++p) rh[p] = r[p] * H[p];
  Tensor out(Shape{d});
  for (std::size_t j = 0; j < d; ++j) {
    double acc = X[2 * d + j];
    for (std::size_t p = 0; p < d; ++p) acc += rh[p] * Uc[p * d + j];
    c[j] = std::tanh(acc);
    out[j] = (1.0 - z[j]) * H[j] + z[j] * c[j];
  }
  Node n;
  n.op = Op::kGruStep;
  n.a = xw.id();
  n.b = h.id();
  n.more = {u_zr.id(), u_c.id()};
  n.value = std::move(out);
  n.aux = std::move(aux);
  return t.push(std::move(n));
}

// ---- gradient checking ----------------------------------------------------

namespace {

double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

double eval_scalar(Var out) {
  if (out.value().size() != 1) {
    throw ContractError("gradient check needs a scalar function, got " +
                        out.shape().str());
  }
  return out.value()[0];
}

}  // namespace

double grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x,
                  double eps) {
  Tensor analytic;
  {
    Tape tape;
    Var in = tape.variable(x);
    Var out = f(tape, in);
    eval_scalar(out);
    Gradients g = tape.backward(out);
    analytic = g.has(in) ? g[in] : Tensor(x.shape());
  }
  double worst = 0.0;
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    double up, down;
    {
      Tape tape;
      up = eval_scalar(f(tape, tape.variable(probe)));
    }
    probe[i] = orig - eps;
    {
      Tape tape;
      down = eval_scalar(f(tape, tape.variable(probe)));
    }
    probe[i] = orig;
    worst = std::max(worst, rel_error(analytic[i], (up - down) / (2.0 * eps)));
  }
  return worst;
}

GradCheckResult grad_check_params(const std::function<Var(Tape&)>& f,
                                  const std::vector<Parameter*>& params,
                                  double eps, std::size_t max_per_param,
                                  std::uint64_t seed) {
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    Var out = f(tape);
    eval_scalar(out);
    tape.backward(out);
  }
  std::vector<Tensor> analytic;
  for (Parameter* p : params) analytic.push_back(p->grad);

  GradCheckResult result;
  Rng rng(seed);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    std::vector<std::size_t> coords(p.value.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (max_per_param > 0 && coords.size() > max_per_param) {
      rng.shuffle(coords.begin(), coords.end());
      coords.resize(max_per_param);
    }
    for (std::size_t i : coords) {
      const double orig = p.value[i];
      p.value[i] = orig + eps;
      double up, down;
      {
        Tape tape;
        up = eval_scalar(f(tape));
      }
      p.value[i] = orig - eps;
      {
        Tape tape;
        down = eval_scalar(f(tape));
      }
      p.value[i] = orig;
      const double e = rel_error(analytic[pi][i], (up - down) / (2.0 * eps));
      ++result.coordinates;
      if (e > result.max_rel_error || result.worst.empty()) {
        if (e >= result.max_rel_error) {
          result.max_rel_error = e;
          result.worst = p.name + "[" + std::to_string(i) + "]";
        }
      }
    }
  }
  for (Parameter* p : params) p->zero_grad();
  return result;
}

}  // namespace miobs
