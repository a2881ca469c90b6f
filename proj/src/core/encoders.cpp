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

#include "core/encoders.h"

#include <cmath>

#include "core/error.h"

namespace miobs {

GruCell::GruCell(ParameterStore& store, const std::string& name,
                 std::size_t d_in, std::size_t d_h)
    : d_in_(d_in), d_h_(d_h) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(d_h));
  w_x_ = &store.add_uniform(name + ".w_x", Shape{d_in, 3 * d_h}, bound);
  u_zr_ = &store.add_uniform(name + ".u_zr", Shape{d_h, 2 * d_h}, bound);
  u_c_ = &store.add_uniform(name + ".u_c", Shape{d_h, d_h}, bound);
  b_ = &store.add_zeros(name + ".b", Shape{3 * d_h});
}

Var GruCell::project(Tape& tape, Var X) const {
  return add_row(matmul(X, tape.param(*w_x_)), tape.param(*b_));
}

Var GruCell::step(Tape& tape, Var x, Var h) const {
  if (x.shape() != Shape{d_in_} || h.shape() != Shape{d_h_}) {
    throw DimensionError("gru step expects x[" + std::to_string(d_in_) + "], h[" +
                         std::to_string(d_h_) + "], got " + x.shape().str() + ", " +
                         h.shape().str());
  }
  Var xw = add(matmul(x, tape.param(*w_x_)), tape.param(*b_));
  return step_projected(tape, xw, h);
}

Var GruCell::step_projected(Tape& tape, Var xw, Var h) const {
  if (h.shape() != Shape{d_h_} || xw.shape() != Shape{3 * d_h_}) {
    throw DimensionError("gru step width mismatch");
  }
  return gru_step(xw, h, tape.param(*u_zr_), tape.param(*u_c_));
}

BiGru::BiGru(ParameterStore& store, const std::string& name, std::size_t d_in,
             std::size_t d_h)
    : forward_(store, name + ".fwd", d_in, d_h),
      backward_(store, name + ".bwd", d_in, d_h) {}

SequenceEncoding BiGru::encode(Tape& tape, Var X) const {
  const std::size_t d_h = hidden_width();
  if (X.shape().rank() != 2 || X.shape()[1] != input_width()) {
    throw DimensionError("bigru input must be T x " + std::to_string(input_width()) +
                         ", got " + X.shape().str());
  }
  const std::size_t T = X.shape()[0];
  if (T == 0) {
    return {tape.constant(Tensor(Shape{0, 2 * d_h})),
            tape.constant(Tensor(Shape{2 * d_h}))};
  }
  Var xf = forward_.project(tape, X);
  Var xb = backward_.project(tape, X);
  std::vector<Var> fwd(T), bwd(T);
  Var h = tape.constant(Tensor(Shape{d_h}));
  for (std::size_t t = 0; t < T; ++t) {
    h = forward_.step_projected(tape, row(xf, t), h);
    fwd[t] = h;
  }
  h = tape.constant(Tensor(Shape{d_h}));
  for (std::size_t t = T; t-- > 0;) {
    h = backward_.step_projected(tape, row(xb, t), h);
    bwd[t] = h;
  }
  std::vector<Var> rows(T);
  for (std::size_t t = 0; t < T; ++t) rows[t] = concat({fwd[t], bwd[t]});
  return {stack_rows(rows), concat({fwd[T - 1], bwd[0]})};
}

DialogueGru::DialogueGru(ParameterStore& store, const std::string& name,
                         std::size_t d_in, std::size_t d_h)
    : cell_(store, name, d_in, d_h) {}

std::vector<Var> DialogueGru::encode(Tape& tape, const std::vector<Var>& inputs) const {
  std::vector<Var> states;
  states.reserve(inputs.size());
  Var h = tape.constant(Tensor(Shape{cell_.hidden_width()}));
  for (Var x : inputs) {
    h = cell_.step(tape, x, h);
    states.push_back(h);
  }
  return states;
}

ConcatEncoding encode_dialogue_concat(Tape& tape, const BiGru& bigru,
                                      const std::vector<Var>& utterances,
                                      Var boundary) {
  const std::size_t d_h = bigru.hidden_width();
  ConcatEncoding out;
  std::vector<Var> pieces;
  std::size_t pos = 0;
  for (Var u : utterances) {
    const std::size_t T = u.shape()[0];
    out.empty.push_back(T == 0);
    if (T == 0) {
      out.start.push_back(0);
      out.end.push_back(0);
      continue;
    }
    if (!pieces.empty()) {
      pieces.push_back(repeat_rows(boundary, 1));
      ++pos;
    }
    pieces.push_back(u);
    out.start.push_back(pos);
    out.end.push_back(pos + T - 1);
    pos += T;
  }
  Var flat = pieces.empty() ? tape.constant(Tensor(Shape{0, bigru.input_width()}))
                            : (pieces.size() == 1 ? pieces[0] : concat(pieces, 0));
  SequenceEncoding enc = bigru.encode(tape, flat);
  out.states = enc.states;
  out.final_state = enc.summary;
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    if (out.empty[i]) {
      out.segments.push_back(tape.constant(Tensor(Shape{4 * d_h})));
    } else {
      out.segments.push_back(
          concat({row(enc.states, out.start[i]), row(enc.states, out.end[i])}));
    }
  }
  return out;
}

}  // namespace miobs
