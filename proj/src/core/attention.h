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

#ifndef MIOBS_CORE_ATTENTION_H_
#define MIOBS_CORE_ATTENTION_H_

// Word-level attention between the word encodings of a history utterance
// (queries) and those of the anchor utterance (keys), and multi-head
// multi-hop attention over utterance vectors.

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "core/encoders.h"
#include "core/parameters.h"
#include "core/tensor.h"

namespace miobs {

enum class WordAttentionKind { kNone, kBidaf, kGmgru };
enum class UtteranceAttentionKind { kNone, kAnchor, kSelf };

struct WordAttentionOutput {
  Var z;        // T_q x combined width (GMGRU: forward direction inputs)
  Var states;   // T_q x 2d_h re-encoded word states
  Var vector;   // 2d_h attention-enhanced utterance vector
  std::vector<Tensor> weights;  // one simplex over keys per query step
  bool empty_keys = false;      // keys were empty; attended vectors are zero
};

class WordAttention {
 public:
  virtual ~WordAttention() = default;
  virtual WordAttentionKind kind() const = 0;
  virtual std::size_t combined_width() const = 0;
  virtual WordAttentionOutput attend(Tape& tape, Var queries, Var keys) const = 0;
};

// f_c = [v ; a ; v*a ; v*a'] where a' is the query-aware key summary
// (softmax over queries of each query's best key score).
Var bidaf_combine(Var v, Var a, Var a_prime);

// Multiplicative scores v_q . v_k, combine with bidaf_combine, then a BiGRU
// re-encodes the combined rows.
class BidafAttention : public WordAttention {
 public:
  BidafAttention(ParameterStore& store, const std::string& name,
                 std::size_t d_word, std::size_t d_h);
  WordAttentionKind kind() const override { return WordAttentionKind::kBidaf; }
  std::size_t combined_width() const override { return 4 * d_word_; }
  WordAttentionOutput attend(Tape& tape, Var queries, Var keys) const override;

 private:
  std::size_t d_word_;
  BiGru reencoder_;
};

// Gated-match GRU: at query step j the additive score
//   w_e . tanh(W_k v_k + W_q [v_j ; h_{j-1}])
// depends on the matching GRU's previous state; the GRU consumes
// [v_j ; a_j]. Both directions share the scoring parameters.
class GmgruAttention : public WordAttention {
 public:
  GmgruAttention(ParameterStore& store, const std::string& name,
                 std::size_t d_word, std::size_t d_h);
  WordAttentionKind kind() const override { return WordAttentionKind::kGmgru; }
  std::size_t combined_width() const override { return 2 * d_word_; }
  WordAttentionOutput attend(Tape& tape, Var queries, Var keys) const override;

  Parameter& score_vector() const { return *w_e_; }
  Parameter& key_weights() const { return *w_k_; }
  Parameter& query_weights() const { return *w_q_; }

 private:
  std::size_t d_word_;
  std::size_t d_h_;
  GruCell forward_;
  GruCell backward_;
  Parameter* w_e_;
  Parameter* w_k_;
  Parameter* w_q_;
};

std::unique_ptr<WordAttention> make_word_attention(WordAttentionKind kind,
                                                   ParameterStore& store,
                                                   const std::string& name,
                                                   std::size_t d_word,
                                                   std::size_t d_h);

// [head_1; ...; head_h] W_O with head_i = softmax(Q Wq_i (K Wk_i)^T / sqrt(d_k)) V Wv_i,
// stacked for several hops: each hop's output is the next hop's query while
// K and V stay fixed. Projections are not shared between hops.
class MultiHeadAttention {
 public:
  MultiHeadAttention(ParameterStore& store, const std::string& name,
                     std::size_t d_model, std::size_t heads, std::size_t hops);

  struct Output {
    Var out;                      // rows(Q) x d_model
    std::vector<Tensor> weights;  // per hop, per head: rows(Q) x rows(K)
  };
  Output apply(Tape& tape, Var Q, Var K, Var V) const;

  std::size_t heads() const { return heads_; }
  std::size_t hops() const { return hops_; }
  std::size_t model_width() const { return d_model_; }
  Parameter& query_proj(std::size_t hop, std::size_t head) const;
  Parameter& key_proj(std::size_t hop, std::size_t head) const;
  Parameter& value_proj(std::size_t hop, std::size_t head) const;
  Parameter& output_proj(std::size_t hop) const;

 private:
  std::size_t d_model_;
  std::size_t heads_;
  std::size_t hops_;
  std::size_t d_k_;
  std::vector<Parameter*> wq_, wk_, wv_, wo_;
};

struct UtteranceAttentionOutput {
  Var context;                  // pooled vector fed to the head
  std::vector<Tensor> weights;  // all attention simplexes
};

// Anchor mode queries with the last utterance vector only; self mode queries
// with all of them and pools the last position's output.
UtteranceAttentionOutput utterance_attention(Tape& tape,
                                             const MultiHeadAttention& mha,
                                             UtteranceAttentionKind mode,
                                             const std::vector<Var>& utterances);

}  // namespace miobs

#endif  // MIOBS_CORE_ATTENTION_H_
