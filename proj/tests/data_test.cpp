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

#include "core/data.h"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "core/error.h"
#include "core/labels.h"
#include "test_util.h"

namespace miobs {
namespace {

Session session_of(std::initializer_list<std::pair<Speaker, const char*>> spec) {
  Session s;
  s.id = "s";
  for (const auto& [sp, label] : spec) s.utterances.push_back({sp, std::string("word ") + label, label});
  return s;
}

constexpr auto C = Speaker::kClient;
constexpr auto T = Speaker::kTherapist;

TEST(CorpusIoTest, ParsesTwoUtteranceRecord) {
  const Corpus c = parse_corpus(
      R"({"session_id":"a","utterances":[{"speaker":"T","text":"hi there","label":"Fa"},)"
      R"({"speaker":"C","text":"I quit","label":"Ct"}]})"
      "\n\n");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].id, "a");
  ASSERT_EQ(c[0].utterances.size(), 2u);
  EXPECT_EQ(c[0].utterances[1].speaker, C);
  EXPECT_EQ(c[0].utterances[1].label, "Ct");
}

TEST(CorpusIoTest, LabelOfWrongRoleIsParseErrorWithLocation) {
  try {
    parse_corpus("\n" R"({"session_id":"a","utterances":[{"speaker":"T","text":"x","label":"Ct"}]})",
                 "f.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("f.jsonl:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_corpus(R"({"session_id":"a","utterances":[{"speaker":"X","text":"x"}]})"),
               Error);
  EXPECT_THROW(parse_corpus("{not json"), Error);
}

TEST(CorpusIoTest, EmptyFileIsEmptyCorpus) {
  testing::TempDir dir;
  std::ofstream(dir.file("empty.jsonl")).flush();
  EXPECT_TRUE(load_corpus(dir.file("empty.jsonl")).empty());
  EXPECT_THROW(load_corpus(dir.file("missing.jsonl")), Error);
}

TEST(CorpusIoTest, UnlabelledUtterancesRoundTrip) {
  Corpus c{session_of({{T, "Fa"}, {C, "Fn"}})};
  c[0].utterances[1].label.reset();
  const Corpus back = parse_corpus(serialize_corpus(c));
  EXPECT_FALSE(back[0].utterances[1].label.has_value());
  EXPECT_EQ(serialize_corpus(back), serialize_corpus(c));
}

TEST(WindowTest, ClientCategorizeLeftPads) {
  const Session s = session_of({{T, "Fa"}, {C, "Ct"}, {T, "Res"}});
  const auto ws = make_windows(s, 8, Task::kCategorize, C);
  ASSERT_EQ(ws.size(), 1u);
  const Window& w = ws[0];
  EXPECT_EQ(w.anchor, 1u);
  ASSERT_EQ(w.slots.size(), 8u);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_TRUE(w.slots[k].pad);
  EXPECT_EQ(w.slots[6].speaker, T);
  EXPECT_EQ(w.slots[7].speaker, C);
  EXPECT_EQ(w.slots[7].tokens, (std::vector<std::string>{"word", "ct"}));
  EXPECT_EQ(w.label, LabelSet::For(C).index("Ct"));
  EXPECT_FALSE(w.next_speaker.has_value());
}

TEST(WindowTest, TherapistForecastSkipsEmptyHistory) {
  const Session s = session_of({{T, "Fa"}, {C, "Ct"}, {T, "Res"}});
  const auto ws = make_windows(s, 8, Task::kForecast, T);
  ASSERT_EQ(ws.size(), 1u);
  EXPECT_EQ(ws[0].anchor, 1u);
  EXPECT_EQ(ws[0].label, LabelSet::For(T).index("Res"));
  EXPECT_EQ(ws[0].next_speaker, T);
  EXPECT_EQ(ws[0].slots[7].speaker, C);  // the target itself is not in the window
}

TEST(WindowTest, SizeOneIsAnchorAlone) {
  const Session s = session_of({{T, "Fa"}, {C, "Ct"}, {C, "St"}});
  const auto ws = make_windows(s, 1, Task::kCategorize, C);
  ASSERT_EQ(ws.size(), 2u);
  for (const auto& w : ws) {
    ASSERT_EQ(w.slots.size(), 1u);
    EXPECT_FALSE(w.slots[0].pad);
  }
  EXPECT_THROW(make_windows(s, 0, Task::kCategorize, C), Error);
}

TEST(WindowTest, CountsAndNoLookahead) {
  const Corpus corpus = gen_synthetic({.seed = 3, .sessions = 5});
  for (const Session& s : corpus) {
    std::size_t client = 0, forecast_client = 0;
    for (std::size_t i = 0; i < s.utterances.size(); ++i) {
      if (s.utterances[i].speaker == C) {
        ++client;
        if (i > 0) ++forecast_client;
      }
    }
    EXPECT_EQ(make_windows(s, 4, Task::kCategorize, C).size(), client);
    const auto fw = make_windows(s, 4, Task::kForecast, C);
    EXPECT_EQ(fw.size(), forecast_client);
    for (const Window& w : fw) {
      // Slot contents are exactly the history up to the anchor.
      for (std::size_t k = 0; k < 4; ++k) {
        if (w.slots[k].pad) continue;
        const std::size_t idx = w.anchor + k + 1 - 4;
        EXPECT_EQ(w.slots[k].speaker, s.utterances[idx].speaker);
      }
      EXPECT_LT(w.anchor + 1, s.utterances.size());
    }
  }
}

TEST(SplitTest, WholeSessionsAndSeeded) {
  const Corpus corpus = gen_synthetic({.seed = 1, .sessions = 20});
  const Split a = split_sessions(corpus, 0.1, 0.2, 5);
  const Split b = split_sessions(corpus, 0.1, 0.2, 5);
  EXPECT_EQ(a.dev.size(), 2u);
  EXPECT_EQ(a.test.size(), 4u);
  EXPECT_EQ(a.train.size(), 14u);
  EXPECT_EQ(serialize_corpus(a.test), serialize_corpus(b.test));
  std::set<std::string> ids;
  for (const Corpus* part : {&a.train, &a.dev, &a.test})
    for (const Session& s : *part) EXPECT_TRUE(ids.insert(s.id).second);
  EXPECT_EQ(ids.size(), 20u);
  EXPECT_THROW(split_sessions(corpus, 0.5, 0.5, 1), Error);
}

TEST(SyntheticTest, SameSeedSameBytes) {
  const SyntheticConfig cfg{.seed = 7, .sessions = 10};
  EXPECT_EQ(serialize_corpus(gen_synthetic(cfg)), serialize_corpus(gen_synthetic(cfg)));
  EXPECT_NE(serialize_corpus(gen_synthetic(cfg)),
            serialize_corpus(gen_synthetic({.seed = 8, .sessions = 10})));
}

TEST(SyntheticTest, TransitionsAreStochasticWithDesignedStructure) {
  const auto& codes = synthetic_codes();
  const auto& P = synthetic_transitions();
  ASSERT_EQ(codes.size(), 11u);
  auto at = [&](const char* a, const char* b) {
    const auto i = std::find(codes.begin(), codes.end(), a) - codes.begin();
    const auto j = std::find(codes.begin(), codes.end(), b) - codes.begin();
    return P[i][j];
  };
  for (const auto& row : P) {
    double s = 0.0;
    for (double v : row) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  // A closed question is most often answered with follow/neutral.
  for (const auto& c : codes) {
    if (c == "Fn") continue;
    EXPECT_GT(at("Quc", "Fn"), at("Quc", c.c_str()));
  }
}

TEST(SyntheticTest, MarginalsMatchStationaryDistribution) {
  // Power iteration from uniform as the reference stationary vector.
  const auto& P = synthetic_transitions();
  const std::size_t n = P.size();
  std::vector<double> pi(n, 1.0 / n);
  for (int it = 0; it < 5000; ++it) {
    std::vector<double> next(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) next[j] += pi[i] * P[i][j];
    pi = next;
  }
  testing::expect_near(synthetic_stationary(), pi, 1e-9);

  const Corpus corpus = gen_synthetic({.seed = 11, .sessions = 250});
  std::map<std::string, double> freq;
  std::size_t total = 0;
  for (const Session& s : corpus)
    for (const Utterance& u : s.utterances) {
      freq[*u.label] += 1.0;
      ++total;
    }
  ASSERT_GE(total, 10000u);
  for (std::size_t i = 0; i < n; ++i)
    EXPECT_NEAR(freq[synthetic_codes()[i]] / total, pi[i], 0.02) << synthetic_codes()[i];
}

TEST(SyntheticTest, OracleReadsEveryLabel) {
  const Corpus corpus = gen_synthetic({.seed = 2, .sessions = 30});
  std::size_t seen = 0;
  for (const Session& s : corpus)
    for (const Utterance& u : s.utterances) {
      EXPECT_EQ(oracle_label(u.text), u.label);
      EXPECT_TRUE(LabelSet::For(u.speaker).index(*u.label).has_value());
      ++seen;
    }
  EXPECT_EQ(seen, 30u * 40u);
  EXPECT_FALSE(oracle_label("nothing here").has_value());
}

}  // namespace
}  // namespace miobs
