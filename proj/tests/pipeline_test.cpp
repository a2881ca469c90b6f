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

#include "core/pipeline.h"

#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "core/error.h"
#include "test_util.h"

namespace miobs {
namespace {

RunConfig toy_run(const char* preset) {
  return parse_config(std::string("preset = ") + preset +
                      "\nwindow = 3\nd_w = 6\nd_h = 4\nd_s = 3\nheads = 2\nhops = 1\n"
                      "lr = 0.01\nepochs = 2\nbatch = 16\nseed = 5\n");
}

Corpus toy_corpus() {
  return gen_synthetic({.seed = 12, .sessions = 20, .min_length = 12, .max_length = 12});
}

TEST(PipelineTest, TrainRunSplitsAndReports) {
  const Corpus corpus = toy_corpus();
  std::size_t epochs_seen = 0;
  const TrainOutcome o = train_run(toy_run("C_C"), corpus, 2, [&](const EpochLog&) { ++epochs_seen; });
  EXPECT_EQ(epochs_seen, o.fit.log.size());
  EXPECT_EQ(o.meta.seed, 5u);
  EXPECT_EQ(o.meta.best_epoch, o.fit.best_epoch);
  EXPECT_EQ(o.test.k, 2u);
  EXPECT_GT(o.test.instances, 0u);

  std::set<std::string> ids;
  std::size_t total = 0;
  for (const char* split : {"train", "dev", "test"}) {
    for (const Session& s : select_split(corpus, o.meta, split)) {
      ids.insert(s.id);
      ++total;
    }
  }
  EXPECT_EQ(total, corpus.size());
  EXPECT_EQ(ids.size(), corpus.size());
  EXPECT_EQ(select_split(corpus, o.meta, "all").size(), corpus.size());
  EXPECT_EQ(select_split(corpus, o.meta, "test").size(), 4u);
  EXPECT_THROW(select_split(corpus, o.meta, "holdout"), Error);

  const Corpus test = select_split(corpus, o.meta, "test");
  EXPECT_EQ(evaluate_corpus(*o.model, test, 2).to_json(), o.test.to_json());
}

TEST(PipelineTest, PredictionRecordsScoreLikeTheModel) {
  testing::TempDir dir;
  const Corpus corpus = toy_corpus();
  for (const char* preset : {"C_T", "F_C"}) {
    const TrainOutcome o = train_run(toy_run(preset), corpus);
    const auto records = predict_records(*o.model, corpus, 3);
    ASSERT_FALSE(records.empty());
    const auto& r = records.front();
    for (const char* key : {"session_id", "index", "task", "speaker", "distribution"})
      EXPECT_TRUE(r.contains(key)) << key;
    if (o.model->config().task == Task::kForecast) {
      EXPECT_EQ(r["top"].size(), 3u);
      EXPECT_TRUE(r.contains("warning"));
    } else {
      EXPECT_TRUE(r.contains("code"));
    }
    std::vector<nlohmann::json> plain;
    {
      std::ofstream out(dir.file("p.jsonl"));
      for (const auto& rec : records) out << rec.dump() << "\n";
    }
    plain = load_jsonl(dir.file("p.jsonl"));
    ASSERT_EQ(plain.size(), records.size());
    const EvalReport from_records = evaluate_predictions(corpus, plain, 3);
    const EvalReport direct = evaluate_corpus(*o.model, corpus, 3);
    EXPECT_EQ(from_records.instances, direct.instances);
    EXPECT_NEAR(from_records.macro_f1, direct.macro_f1, 1e-12) << preset;
    EXPECT_NEAR(from_records.recall_at_k, direct.recall_at_k, 1e-12) << preset;
  }
}

TEST(PipelineTest, GoldPredictionsScorePerfectly) {
  const Corpus corpus = toy_corpus();
  std::vector<nlohmann::json> records;
  for (const Session& s : corpus)
    for (std::size_t i = 0; i < s.utterances.size(); ++i)
      if (s.utterances[i].speaker == Speaker::kClient)
        records.push_back({{"session_id", s.id},
                           {"index", i},
                           {"task", "categorize"},
                           {"speaker", "C"},
                           {"code", *s.utterances[i].label}});
  const EvalReport r = evaluate_predictions(corpus, records, 1);
  EXPECT_DOUBLE_EQ(r.macro_f1, 1.0);
  EXPECT_DOUBLE_EQ(r.recall_at_k, 1.0);

  records.front()["session_id"] = "nope";
  EXPECT_THROW(evaluate_predictions(corpus, records, 1), Error);
  records.front()["session_id"] = corpus.front().id;
  records.back()["speaker"] = "T";
  EXPECT_THROW(evaluate_predictions(corpus, records, 1), Error);
}

TEST(PipelineTest, PredictKMustFitTheLabels) {
  const Corpus corpus = toy_corpus();
  const TrainOutcome o = train_run(toy_run("F_C"), corpus);
  EXPECT_THROW(predict_records(*o.model, corpus, 0), Error);
  EXPECT_THROW(predict_records(*o.model, corpus, 4), Error);
}

TEST(AblationTest, GridParsing) {
  const AblationGrid g = parse_grid("window=0,1,4; word_attention=none,gmgru");
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0].first, "window");
  EXPECT_EQ(g[0].second, (std::vector<std::string>{"0", "1", "4"}));
  EXPECT_EQ(g[1].second.size(), 2u);
  EXPECT_THROW(parse_grid("depth=1,2"), Error);
  EXPECT_THROW(parse_grid("window"), Error);
  EXPECT_THROW(parse_grid(""), Error);
}

TEST(AblationTest, OneRowPerValueInGridOrder) {
  const Corpus corpus = toy_corpus();
  const auto rows = ablate(toy_run("C_C"), corpus, parse_grid("window=1,4"), 3, 2);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].value, "1");
  EXPECT_EQ(rows[1].value, "4");
  for (const auto& r : rows) {
    EXPECT_EQ(r.axis, "window");
    EXPECT_GE(r.best_epoch, 1u);
  }
  // Single-threaded runs give identical numbers.
  const auto again = ablate(toy_run("C_C"), corpus, parse_grid("window=1,4"), 3, 1);
  EXPECT_EQ(again[1].test_macro_f1, rows[1].test_macro_f1);
  const std::string table = ablation_table(rows, 3);
  EXPECT_NE(table.find("| window | 4 |"), std::string::npos) << table;
}

TEST(AblationTest, AxesAdaptHeadInputs) {
  const Corpus corpus = toy_corpus();
  // C_T reads v_selfatt; dropping utterance attention falls back to H_n alone.
  const auto rows = ablate(toy_run("C_T"), corpus,
                           parse_grid("utterance_attention=none;skeleton=concat;window=0"), 3, 3);
  EXPECT_EQ(rows.size(), 3u);
  EXPECT_THROW(ablate(toy_run("C_C"), corpus, parse_grid("skeleton=tree"), 3, 1), Error);
}

}  // namespace
}  // namespace miobs
