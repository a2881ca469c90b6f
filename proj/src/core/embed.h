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

#ifndef MIOBS_CORE_EMBED_H_
#define MIOBS_CORE_EMBED_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "core/labels.h"
#include "core/parameters.h"
#include "core/tensor.h"

namespace miobs {

// Lower-cases and splits on whitespace; runs of letters, digits and
// apostrophes form words, any other printable character is its own token.
std::vector<std::string> tokenize(std::string_view text);

class Vocab {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocab();

  // Tokens with count >= min_count, by descending count then lexical order.
  static Vocab Build(const std::vector<std::vector<std::string>>& corpus,
                     std::size_t min_count = 1);
  // Inverse of tokens(); the first two entries must be PAD and UNK.
  static Vocab FromTokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  std::size_t index(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(std::size_t i) const { return tokens_.at(i); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::vector<std::size_t> encode(const std::vector<std::string>& tokens) const;

 private:
  void add(std::string token);
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Reads "token v1 v2 ... vd" lines. Returns a |V| x d table where vocab
// tokens found in the file take the file's vector, the rest are drawn from
// uniform(-0.1, 0.1) with `rng`, and the PAD row is zero.
Tensor load_static_vectors(const std::string& path, const Vocab& vocab,
                           Rng& rng);

// Word and speaker embeddings.
class Embedder {
 public:
  // `init`, when given, must be |V| x d_w (see load_static_vectors).
  Embedder(ParameterStore& store, const Vocab& vocab, std::size_t d_w,
           std::size_t d_s, const Tensor* init = nullptr);

  struct Embedded {
    Var words;    // T x d_w
    Var speaker;  // d_s
  };

  Embedded embed_utterance(Tape& tape, const std::vector<std::size_t>& ids,
                           Speaker speaker, double dropout, bool train,
                           Rng* rng) const;
  Var speaker(Tape& tape, Speaker s) const;

  std::size_t word_width() const { return d_w_; }
  std::size_t speaker_width() const { return d_s_; }
  Parameter& words() const { return *words_; }
  Parameter& speakers() const { return *speakers_; }

 private:
  std::size_t d_w_;
  std::size_t d_s_;
  Parameter* words_;
  Parameter* speakers_;
};

}  // namespace miobs

#endif  // MIOBS_CORE_EMBED_H_
