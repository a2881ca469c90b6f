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

#include "core/embed.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "core/error.h"

namespace miobs {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (std::isalnum(c) || c == '\'' || c >= 0x80) {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
      out.emplace_back(1, ch);
    }
  }
  flush();
  return out;
}

Vocab::Vocab() {
  add(std::string(kPadToken));
  add(std::string(kUnkToken));
}

void Vocab::add(std::string token) {
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
}

Vocab Vocab::Build(const std::vector<std::vector<std::string>>& corpus,
                   std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& stream : corpus)
    for (const auto& t : stream) ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts) {
    if (n >= min_count && tok != kPadToken && tok != kUnkToken) kept.emplace_back(tok, n);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  for (auto& [tok, n] : kept) v.add(tok);
  return v;
}

Vocab Vocab::FromTokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kUnkToken) {
    throw ParseError("vocabulary must start with <pad>, <unk>");
  }
  Vocab v;
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    if (v.contains(tokens[i])) throw ParseError("duplicate vocabulary token '" + tokens[i] + "'");
    v.add(std::move(tokens[i]));
  }
  return v;
}

std::size_t Vocab::index(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

std::vector<std::size_t> Vocab::encode(const std::vector<std::string>& tokens) const {
  std::vector<std::size_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(index(t));
  return ids;
}

Tensor load_static_vectors(const std::string& path, const Vocab& vocab, Rng& rng) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vector file " + path);
  std::unordered_map<std::string, std::vector<double>> found;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    std::vector<double> vec;
    std::string field;
    while (ls >> field) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != field.size()) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": bad number '" + field + "'");
      }
      vec.push_back(v);
    }
    if (vec.empty()) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": no vector values");
    }
    if (width == 0) width = vec.size();
    if (vec.size() != width) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": width " +
                       std::to_string(vec.size()) + " differs from " +
                       std::to_string(width));
    }
    if (vocab.contains(token)) found.emplace(token, std::move(vec));
  }
  if (width == 0) throw ParseError(path + ": no vectors");

  Tensor table(Shape{vocab.size(), width});
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    auto row = table.row(r);
    auto it = found.find(vocab.token(r));
    if (it != found.end()) {
      std::copy(it->second.begin(), it->second.end(), row.begin());
    } else {
      for (auto& v : row) v = rng.uniform(-0.1, 0.1);
    }
  }
  for (auto& v : table.row(Vocab::kPad)) v = 0.0;
  return table;
}

Embedder::Embedder(ParameterStore& store, const Vocab& vocab, std::size_t d_w,
                   std::size_t d_s, const Tensor* init)
    : d_w_(d_w), d_s_(d_s) {
  if (init != nullptr) {
    if (!(init->shape() == Shape{vocab.size(), d_w})) {
      throw ConfigError("embedding init " + init->shape().str() + " does not match vocab x d_w");
    }
    words_ = &store.add("embed.words", *init);
  } else {
    words_ = &store.add_uniform("embed.words", Shape{vocab.size(), d_w}, 0.1);
  }
  words_->zero_first_row = true;
  for (auto& v : words_->value.row(Vocab::kPad)) v = 0.0;
  speakers_ = &store.add_uniform("embed.speakers", Shape{2, d_s}, 0.1);
}

Embedder::Embedded Embedder::embed_utterance(Tape& tape,
                                             const std::vector<std::size_t>& ids,
                                             Speaker speaker_id, double dropout_p,
                                             bool train, Rng* rng) const {
  Var table = tape.param(*words_);
  Var words = gather_rows(table, ids);
  if (!ids.empty()) words = dropout(words, dropout_p, train, rng);
  return {words, speaker(tape, speaker_id)};
}

Var Embedder::speaker(Tape& tape, Speaker s) const {
  return row(tape.param(*speakers_), static_cast<std::size_t>(s));
}

}  // namespace miobs
