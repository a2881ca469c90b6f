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

#ifndef MIOBS_CORE_DATA_H_
#define MIOBS_CORE_DATA_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/labels.h"
#include "core/random.h"

namespace miobs {

struct Utterance {
  Speaker speaker = Speaker::kClient;
  std::string text;
  std::optional<std::string> label;  // absent while serving
};

struct Session {
  std::string id;
  std::vector<Utterance> utterances;
};

using Corpus = std::vector<Session>;

// One record per line: {"session_id": ..., "utterances": [{"speaker": "C",
// "text": ..., "label": "Fn"}, ...]}. Labels must belong to the speaker's
// role. Blank lines are skipped.
Corpus load_corpus(const std::string& path);
Corpus parse_corpus(const std::string& text, const std::string& origin = "<memory>");
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::string& path);

struct Slot {
  bool pad = false;
  Speaker speaker = Speaker::kClient;
  std::vector<std::string> tokens;
};

// A fixed-length history, oldest slot first; the last slot is the anchor.
struct Window {
  std::vector<Slot> slots;
  std::optional<std::size_t> label;        // index into the role's LabelSet
  std::optional<Speaker> next_speaker;     // forecast only
  std::string session_id;
  std::size_t anchor = 0;                  // utterance index in the session
};

// Left-pads utterances [end - n + 1, end] of `history` to n slots.
Window make_window(const std::vector<Utterance>& history, std::size_t end,
                   std::size_t n);

// Categorize: one window per utterance spoken by `role`. Forecast: one window
// per position whose next utterance is spoken by `role`; the session-initial
// position (empty history) is skipped. Windows are labelled when the target
// utterance carries a label.
std::vector<Window> make_windows(const Session& session, std::size_t n,
                                 Task task, Speaker role);
std::vector<Window> make_windows(const Corpus& corpus, std::size_t n, Task task,
                                 Speaker role);

struct Split {
  Corpus train;
  Corpus dev;
  Corpus test;
};

// Whole-session split after a seeded shuffle.
Split split_sessions(const Corpus& corpus, double dev_fraction,
                     double test_fraction, std::uint64_t seed);

// ---- synthetic corpus -------------------------------------------------------

struct SyntheticConfig {
  std::uint64_t seed = 7;
  std::size_t sessions = 200;
  std::size_t min_length = 40;
  std::size_t max_length = 40;
  std::size_t min_words = 3;
  std::size_t max_words = 7;
};

// The 11 codes in generator order: client codes then therapist codes.
const std::vector<std::string>& synthetic_codes();
// Row-stochastic first-order transition matrix over synthetic_codes().
const std::vector<std::vector<double>>& synthetic_transitions();
std::vector<double> synthetic_stationary();

Corpus gen_synthetic(const SyntheticConfig& cfg);

// Reads the label off an utterance produced by gen_synthetic from its keyword.
std::optional<std::string> oracle_label(const std::string& text);

}  // namespace miobs

#endif  // MIOBS_CORE_DATA_H_
