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

#ifndef MIOBS_CORE_ENCODERS_H_
#define MIOBS_CORE_ENCODERS_H_

#include <cstddef>
#include <string>
#include <vector>

#include "core/parameters.h"
#include "core/tensor.h"

namespace miobs {

// Standard GRU recurrence:
//   z = sigmoid(x Wz + h Uz + bz), r = sigmoid(x Wr + h Ur + br)
//   c = tanh(x Wc + (r * h) Uc + bc), h' = (1 - z) * h + z * c
// Input weights are stored fused as [Wz | Wr | Wc].
class GruCell {
 public:
  GruCell(ParameterStore& store, const std::string& name, std::size_t d_in,
          std::size_t d_h);

  std::size_t input_width() const { return d_in_; }
  std::size_t hidden_width() const { return d_h_; }

  Var step(Tape& tape, Var x, Var h) const;
  // x W + b for every row of X (T x d_in), feeding step_projected.
  Var project(Tape& tape, Var X) const;
  Var step_projected(Tape& tape, Var xw, Var h) const;

  Parameter& input_weights() const { return *w_x_; }        // d_in x 3d_h
  Parameter& gate_weights() const { return *u_zr_; }        // d_h x 2d_h
  Parameter& candidate_weights() const { return *u_c_; }    // d_h x d_h
  Parameter& bias() const { return *b_; }                   // 3d_h

 private:
  std::size_t d_in_;
  std::size_t d_h_;
  Parameter* w_x_;
  Parameter* u_zr_;
  Parameter* u_c_;
  Parameter* b_;
};

struct SequenceEncoding {
  Var states;   // T x 2d_h, row j = [fwd_j ; bwd_j]
  Var summary;  // 2d_h = [fwd_last ; bwd_first], zero when T = 0
};

class BiGru {
 public:
  BiGru(ParameterStore& store, const std::string& name, std::size_t d_in,
        std::size_t d_h);

  std::size_t input_width() const { return forward_.input_width(); }
  std::size_t hidden_width() const { return forward_.hidden_width(); }
  std::size_t output_width() const { return 2 * hidden_width(); }

  SequenceEncoding encode(Tape& tape, Var X) const;

  const GruCell& forward_cell() const { return forward_; }
  const GruCell& backward_cell() const { return backward_; }

 private:
  GruCell forward_;
  GruCell backward_;
};

// Unidirectional GRU over per-utterance inputs; state i sees inputs 0..i.
class DialogueGru {
 public:
  DialogueGru(ParameterStore& store, const std::string& name, std::size_t d_in,
              std::size_t d_h);

  std::vector<Var> encode(Tape& tape, const std::vector<Var>& inputs) const;
  const GruCell& cell() const { return cell_; }

 private:
  GruCell cell_;
};

struct ConcatEncoding {
  Var states;                   // L x 2d_h over the flattened window
  Var final_state;              // C_n, 2d_h
  std::vector<Var> segments;    // v_seg per utterance, 4d_h (zero if empty)
  std::vector<std::size_t> start;  // first token position per utterance
  std::vector<std::size_t> end;    // last token position per utterance
  std::vector<bool> empty;
};

// Flattens the word matrices of a window into one sequence, inserting the
// boundary embedding between consecutive non-empty utterances, and runs
// `bigru` over it.
ConcatEncoding encode_dialogue_concat(Tape& tape, const BiGru& bigru,
                                      const std::vector<Var>& utterances,
                                      Var boundary);

}  // namespace miobs

#endif  // MIOBS_CORE_ENCODERS_H_
