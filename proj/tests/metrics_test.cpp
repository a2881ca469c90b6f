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

#include "core/metrics.h"

#include <gtest/gtest.h>

#include <numeric>

#include "core/error.h"
#include "core/labels.h"

namespace miobs {
namespace {

TEST(MetricsTest, DiagonalConfusionScoresOne) {
  ConfusionMatrix cm(3);
  for (std::size_t i = 0; i < 3; ++i) cm.add(i, i, 10 + i);
  const Prf1 s = prf1(cm);
  EXPECT_DOUBLE_EQ(s.macro_f1, 1.0);
  for (const auto& l : s.per_label) {
    EXPECT_DOUBLE_EQ(l.precision, 1.0);
    EXPECT_DOUBLE_EQ(l.recall, 1.0);
  }
}

TEST(MetricsTest, AlwaysFollowNeutralOnClientCounts) {
  ConfusionMatrix cm(3);
  cm.add(0, 0, 47715);
  cm.add(1, 0, 5099);
  cm.add(2, 0, 4378);
  const Prf1 s = prf1(cm);
  const double p = 47715.0 / (47715 + 5099 + 4378);
  EXPECT_NEAR(s.per_label[0].f1, 2 * p / (p + 1), 1e-12);
  EXPECT_NEAR(s.per_label[0].f1, 0.9097, 1e-4);
  EXPECT_NEAR(s.macro_f1, 0.3032, 1e-4);
  EXPECT_EQ(s.per_label[1].f1, 0.0);
  EXPECT_EQ(s.per_label[2].precision, 0.0);
  EXPECT_EQ(s.per_label[1].support, 5099u);
}

TEST(MetricsTest, UnseenLabelScoresZeroWithoutNan) {
  ConfusionMatrix cm(3);
  cm.add(0, 0, 5);
  cm.add(1, 1, 5);
  const Prf1 s = prf1(cm);
  EXPECT_EQ(s.per_label[2].f1, 0.0);
  EXPECT_NEAR(s.macro_f1, 2.0 / 3.0, 1e-15);
}

TEST(MetricsTest, RecallAtThreeOnTherapistCounts) {
  // Constant ranking Fa > Gi > Res > rest, gold drawn with the table counts.
  const auto& labels = LabelSet::For(Speaker::kTherapist);
  const std::vector<std::pair<std::string, int>> counts = {
      {"Fa", 17468}, {"Gi", 15271}, {"Res", 6246}, {"Rec", 4651},
      {"Quc", 5218}, {"Quo", 4509}, {"Mia", 3869}, {"Min", 1019}};
  std::vector<double> p(8, 0.01);
  p[*labels.index("Fa")] = 0.5;
  p[*labels.index("Gi")] = 0.3;
  p[*labels.index("Res")] = 0.1;
  std::vector<std::vector<double>> probs;
  std::vector<std::size_t> gold;
  for (const auto& [code, n] : counts) {
    for (int i = 0; i < n; ++i) {
      probs.push_back(p);
      gold.push_back(*labels.index(code));
    }
  }
  ASSERT_EQ(gold.size(), 58251u);
  EXPECT_NEAR(recall_at_k(probs, gold, 3), (17468.0 + 15271 + 6246) / 58251, 1e-15);
  EXPECT_NEAR(recall_at_k(probs, gold, 3), 0.6692, 1e-4);
  EXPECT_DOUBLE_EQ(recall_at_k(probs, gold, 8), 1.0);
}

TEST(MetricsTest, TopKBreaksTiesByLabelOrder) {
  const std::vector<double> p = {0.2, 0.4, 0.2, 0.2};
  EXPECT_EQ(top_k(p, 3), (std::vector<std::size_t>{1, 0, 2}));
  EXPECT_EQ(argmax(p), 1u);
  EXPECT_THROW(top_k(p, 5), Error);
}

TEST(MetricsTest, RowNormalizedConfusion) {
  ConfusionMatrix cm(2);
  cm.add(0, 0, 3);
  cm.add(0, 1, 1);
  const auto rows = cm.row_normalized();
  EXPECT_EQ(rows[0], (std::vector<double>{0.75, 0.25}));
  EXPECT_EQ(rows[1], (std::vector<double>{0.0, 0.0}));
}

TEST(MetricsTest, ReportJsonCarriesEveryField) {
  const std::vector<std::vector<double>> probs = {{0.7, 0.2, 0.1}, {0.1, 0.8, 0.1}, {0.3, 0.3, 0.4}};
  const std::vector<std::size_t> gold = {0, 1, 0};
  const EvalReport r = make_report({"Fn", "Ct", "St"}, probs, gold, 2);
  EXPECT_EQ(r.instances, 3u);
  EXPECT_EQ(r.confusion.at(0, 2), 1u);
  EXPECT_NEAR(r.recall_at_k, 1.0, 1e-15);
  const auto j = r.to_json();
  for (const char* key : {"labels", "per_label", "macro_f1", "k", "recall_at_k", "confusion",
                          "instances"})
    EXPECT_TRUE(j.contains(key)) << key;
}

}  // namespace
}  // namespace miobs
