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

#include "core/attention.h"

#include <cmath>

#include "core/error.h"

namespace miobs {

namespace {

WordAttentionOutput empty_queries(Tape& tape, std::size_t z_width, std::size_t d_h) {
  WordAttentionOutput out;
  out.z = tape.constant(Tensor(Shape{0, z_width}));
  out.states = tape.constant(Tensor(Shape{0, 2 * d_h}));
  out.vector = tape.constant(Tensor(Shape{2 * d_h}));
  return out;
}

void check_word_inputs(Var queries, Var keys, std::size_t d_word) {
  if (queries.shape().rank() != 2 || queries.shape()[1] != d_word ||
      keys.shape().rank() != 2 || keys.shape()[1] != d_word) {
    throw DimensionError("word attention expects T x " + std::to_string(d_word) +
                         " queries and keys, got " + queries.shape().str() + ", " +
                         keys.shape().str());
  }
}

}  // namespace

Var bidaf_combine(Var v, Var a, Var a_prime) {
  const std::size_t T = v.shape()[0];
  Var broadcast = a_prime.shape().rank() == 1 ? repeat_rows(a_prime, T) : a_prime;
  return concat({v, a, mul(v, a), mul(v, broadcast)}, 1);
}

// ---- BiDAF ------------------------------------------------------------------

BidafAttention::BidafAttention(ParameterStore& store, const std::string& name,
                               std::size_t d_word, std::size_t d_h)
    : d_word_(d_word), reencoder_(store, name + ".reencode", 4 * d_word, d_h) {}

WordAttentionOutput BidafAttention::attend(Tape& tape, Var queries, Var keys) const {
  check_word_inputs(queries, keys, d_word_);
  const std::size_t Tq = queries.shape()[0];
  const std::size_t Tk = keys.shape()[0];
  if (Tq == 0) return empty_queries(tape, combined_width(), reencoder_.hidden_width());

  WordAttentionOutput out;
  Var attended, query_summary;
  if (Tk == 0) {
    out.empty_keys = true;
    attended = tape.constant(Tensor(Shape{Tq, d_word_}));
    query_summary = tape.constant(Tensor(Shape{d_word_}));
  } else {
    Var scores = matmul(queries, transpose(keys));     // Tq x Tk
    Var alpha = softmax(scores, 1);                    // over keys
    attended = matmul(alpha, keys);                    // Tq x d
    Var beta = softmax(row_max(scores));               // over queries
    query_summary = matmul(beta, queries);             // d
    for (std::size_t j = 0; j < Tq; ++j) {
      auto r = alpha.value().row(j);
      out.weights.push_back(Tensor::Vector({r.begin(), r.end()}));
    }
    out.weights.push_back(beta.value());
  }
  out.z = bidaf_combine(queries, attended, query_summary);
  SequenceEncoding enc = reencoder_.encode(tape, out.z);
  out.states = enc.states;
  out.vector = enc.summary;
  return out;
}

// ---- GMGRU ------------------------------------------------------------------

GmgruAttention::GmgruAttention(ParameterStore& store, const std::string& name,
                               std::size_t d_word, std::size_t d_h)
    : d_word_(d_word),
      d_h_(d_h),
      forward_(store, name + ".fwd", 2 * d_word, d_h),
      backward_(store, name + ".bwd", 2 * d_word, d_h) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(d_word));
  w_e_ = &store.add_uniform(name + ".w_e", Shape{d_word}, bound);
  w_k_ = &store.add_uniform(name + ".w_k", Shape{d_word, d_word}, bound);
  w_q_ = &store.add_uniform(name + ".w_q", Shape{d_word + d_h, d_word}, bound);
}

WordAttentionOutput GmgruAttention::attend(Tape& tape, Var queries, Var keys) const {
  check_word_inputs(queries, keys, d_word_);
  const std::size_t Tq = queries.shape()[0];
  const std::size_t Tk = keys.shape()[0];
  if (Tq == 0) return empty_queries(tape, combined_width(), d_h_);

  WordAttentionOutput out;
  out.empty_keys = Tk == 0;
  Var keys_proj;
  if (Tk > 0) keys_proj = matmul(keys, tape.param(*w_k_));
  Var w_e = tape.param(*w_e_);
  Var w_q = tape.param(*w_q_);

  auto attend_step = [&](Var v, Var h_prev) -> Var {
    if (Tk == 0) return tape.constant(Tensor(Shape{d_word_}));
    Var q = matmul(concat({v, h_prev}), w_q);               // d
    Var hidden = tanh(add_row(keys_proj, q));               // Tk x d
    Var scores = matmul(w_e, transpose(hidden));            // Tk
    Var alpha = softmax(scores);
    out.weights.push_back(alpha.value());
    return matmul(alpha, keys);                             // d
  };

  std::vector<Var> fwd(Tq), bwd(Tq), z(Tq);
  Var h = tape.constant(Tensor(Shape{d_h_}));
  for (std::size_t j = 0; j < Tq; ++j) {
    Var v = row(queries, j);
    z[j] = concat({v, attend_step(v, h)});
    h = forward_.step(tape, z[j], h);
    fwd[j] = h;
  }
  h = tape.constant(Tensor(Shape{d_h_}));
  for (std::size_t j = Tq; j-- > 0;) {
    Var v = row(queries, j);
    h = backward_.step(tape, concat({v, attend_step(v, h)}), h);
    bwd[j] = h;
  }
  std::vector<Var> rows(Tq);
  for (std::size_t j = 0; j < Tq; ++j) rows[j] = concat({fwd[j], bwd[j]});
  out.z = stack_rows(z);
  out.states = stack_rows(rows);
  out.vector = concat({fwd[Tq - 1], bwd[0]});
  return out;
}

std::unique_ptr<WordAttention> make_word_attention(WordAttentionKind kind,
                                                   ParameterStore& store,
                                                   const std::string& name,
                                                   std::size_t d_word,
                                                   std::size_t d_h) {
  switch (kind) {
    case WordAttentionKind::kBidaf:
      return std::make_unique<BidafAttention>(store, name, d_word, d_h);
    case WordAttentionKind::kGmgru:
      return std::make_unique<GmgruAttention>(store, name, d_word, d_h);
    case WordAttentionKind::kNone:
      break;
  }
  return nullptr;
}

// ---- multi-head -------------------------------------------------------------

MultiHeadAttention::MultiHeadAttention(ParameterStore& store, const std::string& name,
                                       std::size_t d_model, std::size_t heads,
                                       std::size_t hops)
    : d_model_(d_model), heads_(heads), hops_(hops) {
  if (heads == 0 || hops == 0) throw ConfigError("multihead needs heads >= 1 and hops >= 1");
  if (d_model % heads != 0) {
    throw ConfigError("model width " + std::to_string(d_model) +
                      " is not divisible by " + std::to_string(heads) + " heads");
  }
  d_k_ = d_model / heads;
  const double bound = 1.0 / std::sqrt(static_cast<double>(d_model));
  for (std::size_t t = 0; t < hops; ++t) {
    const std::string hop = name + ".hop" + std::to_string(t);
    for (std::size_t i = 0; i < heads; ++i) {
      const std::string head = hop + ".head" + std::to_string(i);
      wq_.push_back(&store.add_uniform(head + ".w_q", Shape{d_model, d_k_}, bound));
      wk_.push_back(&store.add_uniform(head + ".w_k", Shape{d_model, d_k_}, bound));
      wv_.push_back(&store.add_uniform(head + ".w_v", Shape{d_model, d_k_}, bound));
    }
    wo_.push_back(&store.add_uniform(hop + ".w_o", Shape{d_model, d_model}, bound));
  }
}

Parameter& MultiHeadAttention::query_proj(std::size_t hop, std::size_t head) const {
  return *wq_.at(hop * heads_ + head);
}
Parameter& MultiHeadAttention::key_proj(std::size_t hop, std::size_t head) const {
  return *wk_.at(hop * heads_ + head);
}
Parameter& MultiHeadAttention::value_proj(std::size_t hop, std::size_t head) const {
  return *wv_.at(hop * heads_ + head);
}
Parameter& MultiHeadAttention::output_proj(std::size_t hop) const { return *wo_.at(hop); }

MultiHeadAttention::Output MultiHeadAttention::apply(Tape& tape, Var Q, Var K, Var V) const {
  for (Var m : {Q, K, V}) {
    if (m.shape().rank() != 2 || m.shape()[1] != d_model_) {
      throw DimensionError("multihead inputs must be n x " + std::to_string(d_model_) +
                           ", got " + m.shape().str());
    }
  }
  if (K.shape()[0] != V.shape()[0] || K.shape()[0] == 0) {
    throw DimensionError("multihead keys/values must be non-empty and aligned");
  }
  Output out;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(d_k_));
  Var query = Q;
  for (std::size_t t = 0; t < hops_; ++t) {
    std::vector<Var> heads;
    for (std::size_t i = 0; i < heads_; ++i) {
      Var q = matmul(query, tape.param(query_proj(t, i)));
      Var k = matmul(K, tape.param(key_proj(t, i)));
      Var v = matmul(V, tape.param(value_proj(t, i)));
      Var weights = softmax(scale(matmul(q, transpose(k)), inv_scale), 1);
      out.weights.push_back(weights.value());
      heads.push_back(matmul(weights, v));
    }
    Var joined = heads.size() == 1 ? heads[0] : concat(heads, 1);
    query = matmul(joined, tape.param(output_proj(t)));
  }
  out.out = query;
  return out;
}

UtteranceAttentionOutput utterance_attention(Tape& tape, const MultiHeadAttention& mha,
                                             UtteranceAttentionKind mode,
                                             const std::vector<Var>& utterances) {
  if (utterances.empty()) throw ContractError("utterance attention needs n >= 1");
  if (mode == UtteranceAttentionKind::kNone) {
    throw ContractError("utterance attention called with mode none");
  }
  Var values = stack_rows(utterances);
  Var queries = mode == UtteranceAttentionKind::kAnchor ? stack_rows({utterances.back()})
                                                        : values;
  MultiHeadAttention::Output res = mha.apply(tape, queries, values, values);
  UtteranceAttentionOutput out;
  out.context = row(res.out, res.out.shape()[0] - 1);
  out.weights = std::move(res.weights);
  return out;
}

}  // namespace miobs
