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

#include "core/model.h"

#include <gtest/gtest.h>

#include <algorithm>

#include "core/error.h"
#include "core/loss.h"
#include "model_fixture.h"
#include "test_util.h"

namespace miobs {
namespace {

using testing::random_window;
using testing::tiny_config;
using testing::toy_vocab;

TEST(PresetTest, Contents) {
  const auto cc = ModelConfig::Preset("C_C");
  EXPECT_EQ(cc.skeleton, Skeleton::kHgru);
  EXPECT_EQ(cc.word_attention, WordAttentionKind::kNone);
  EXPECT_EQ(cc.utterance_attention, UtteranceAttentionKind::kNone);
  EXPECT_EQ(cc.head_inputs, (std::vector<HeadInput>{HeadInput::kH, HeadInput::kV}));
  EXPECT_EQ(cc.scoring, Scoring::kAdd);

  const auto ct = ModelConfig::Preset("C_T");
  EXPECT_EQ(ct.role, Speaker::kTherapist);
  EXPECT_EQ(ct.word_attention, WordAttentionKind::kGmgru);
  EXPECT_EQ(ct.utterance_attention, UtteranceAttentionKind::kAnchor);
  EXPECT_EQ(ct.heads, 4u);
  EXPECT_EQ(ct.hops, 2u);

  for (const char* name : {"F_C", "F_T"}) {
    const auto f = ModelConfig::Preset(name);
    EXPECT_EQ(f.task, Task::kForecast);
    EXPECT_EQ(f.skeleton, Skeleton::kHgru);
    EXPECT_EQ(f.word_attention, WordAttentionKind::kNone);
    EXPECT_EQ(f.utterance_attention, UtteranceAttentionKind::kSelf);
  }
  EXPECT_EQ(ModelConfig::Preset("F_T").role, Speaker::kTherapist);
  EXPECT_EQ(ModelConfig::Preset("C_C").window, 8u);
  EXPECT_THROW(ModelConfig::Preset("X_Y"), Error);
}

TEST(ModelTest, EveryPresetOutputsADistributionOverItsLabels) {
  Rng rng(1);
  for (const char* name : {"C_C", "C_T", "F_C", "F_T"}) {
    Model m(tiny_config(name), toy_vocab(), 3);
    Window w = random_window(rng, 4, 1, m.config().role);
    if (m.config().task == Task::kForecast) w.next_speaker = m.config().role;
    Tape tape;
    auto out = m.forward(tape, w);
    ASSERT_EQ(out.logits.value().size(), LabelSet::For(m.config().role).size()) << name;
    double s = 0.0;
    for (double p : out.probs.value().values()) s += p;
    EXPECT_NEAR(s, 1.0, 1e-12) << name;
  }
}

TEST(ModelTest, CategorizeDependsOnTheAnchor) {
  Model m(tiny_config("C_C"), toy_vocab(), 5);
  Rng rng(2);
  Window a = random_window(rng, 4, 0, Speaker::kClient);
  Window b = a;
  b.slots.back().tokens = {"w7", "w9", "w11"};
  a.slots.back().tokens = {"w1", "w2"};
  EXPECT_NE(m.predict(a), m.predict(b));
}

TEST(ModelTest, ForecastTakesOnlyHistoryAndNextSpeaker) {
  Model m(tiny_config("F_T"), toy_vocab(), 5);
  Rng rng(3);
  Window w = random_window(rng, 4, 2, Speaker::kClient);
  Window with = w;
  with.next_speaker = Speaker::kTherapist;
  EXPECT_EQ(m.forecast(w, Speaker::kTherapist), m.predict(with));
  EXPECT_THROW(m.predict(w), Error);  // no next speaker

  Model cat(tiny_config("C_C"), toy_vocab(), 5);
  EXPECT_THROW(cat.forecast(w, Speaker::kClient), Error);
}

TEST(ModelTest, AddScoringWithSecondMlpZeroedIsFirstMlpAlone) {
  Model m(tiny_config("C_C"), toy_vocab(), 7);
  ASSERT_EQ(m.head(0).size(), 2u);
  m.head(0)[1].w2->value.fill(0.0);
  m.head(0)[1].b2->value.fill(0.0);
  Rng rng(4);
  const Window w = random_window(rng, 4, 0, Speaker::kClient);
  Tape tape;
  auto out = m.forward(tape, w);
  const auto& mlp = m.head(0)[0];
  Tape ref;
  Var x = ref.constant(out.inputs.at(HeadInput::kH).value());
  Var h = relu(add(matmul(x, ref.constant(mlp.w1->value)), ref.constant(mlp.b1->value)));
  Var logits = add(matmul(h, ref.constant(mlp.w2->value)), ref.constant(mlp.b2->value));
  EXPECT_EQ(out.logits.value().values(), logits.value().values());
}

TEST(ModelTest, ConcatAndAddScoringDiffer) {
  ModelConfig add_cfg = tiny_config("C_C");
  ModelConfig cat_cfg = add_cfg;
  cat_cfg.scoring = Scoring::kConcat;
  Model a(add_cfg, toy_vocab(), 9), c(cat_cfg, toy_vocab(), 9);
  Rng rng(5);
  const Window w = random_window(rng, 4, 0, Speaker::kClient);
  EXPECT_NE(a.predict(w), c.predict(w));
  EXPECT_EQ(c.head(0).size(), 1u);
  EXPECT_EQ(c.head(0)[0].w1->value.rows(), 4u + 8u);
}

TEST(ModelTest, PadSlotContentsAndOrderAreIgnored) {
  Rng rng(6);
  for (const char* name : {"C_C", "C_T", "F_C"}) {
    Model m(tiny_config(name, 6), toy_vocab(), 11);
    Window w = random_window(rng, 6, 3, m.config().role);
    w.next_speaker = m.config().role;
    Window junk = w;
    junk.slots[0].tokens = {"w3", "w4"};
    junk.slots[0].speaker = Speaker::kTherapist;
    junk.slots[2].speaker = Speaker::kClient;
    std::swap(junk.slots[0], junk.slots[2]);
    EXPECT_EQ(m.predict(w), m.predict(junk)) << name;
  }
}

TEST(ModelTest, WindowLengthMustMatch) {
  Model m(tiny_config("C_C", 4), toy_vocab(), 1);
  Rng rng(7);
  try {
    m.predict(random_window(rng, 3, 0, Speaker::kClient));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kContract);
  }
  Window w = random_window(rng, 4, 0, Speaker::kClient);
  w.slots.back().pad = true;
  EXPECT_THROW(m.predict(w), Error);
}

TEST(ModelTest, EncoderStatesAreCausal) {
  Model m(tiny_config("C_C", 5), toy_vocab(), 13);
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    Window w = random_window(rng, 5, rng.below(3), Speaker::kClient);
    Tape t1;
    auto base = m.forward(t1, w);
    const std::size_t j = 1 + rng.below(4);
    if (w.slots[j].pad) continue;
    Window p = w;
    p.slots[j].tokens.push_back("w" + std::to_string(rng.below(18)));
    Tape t2;
    auto pert = m.forward(t2, p);
    for (std::size_t i = 0; i < j; ++i)
      EXPECT_EQ(base.dialogue_states[i].value().values(), pert.dialogue_states[i].value().values());
  }
}

TEST(ModelTest, ConcatSkeletonVariantsRun) {
  Rng rng(9);
  for (const auto& [word, inputs] :
       std::vector<std::pair<WordAttentionKind, std::vector<HeadInput>>>{
           {WordAttentionKind::kNone, {HeadInput::kSeg}},
           {WordAttentionKind::kBidaf, {HeadInput::kSeg, HeadInput::kWordAtt}},
           {WordAttentionKind::kGmgru, {HeadInput::kWordAtt, HeadInput::kV}}}) {
    ModelConfig c = tiny_config("C_T");
    c.skeleton = Skeleton::kConcat;
    c.word_attention = word;
    c.utterance_attention = UtteranceAttentionKind::kNone;
    c.head_inputs = inputs;
    Model m(c, toy_vocab(), 2);
    auto p = m.predict(random_window(rng, 4, 1, Speaker::kTherapist));
    EXPECT_EQ(p.size(), 8u);
  }
  ModelConfig bad = tiny_config("C_C");
  bad.skeleton = Skeleton::kConcat;
  EXPECT_THROW(Model(bad, toy_vocab(), 1), Error);  // H_n needs the hgru skeleton
}

TEST(ModelTest, FullForwardAndLossPassGradientCheck) {
  Model m(tiny_config("C_T", 2), toy_vocab(), 21);
  Rng rng(10);
  const Window w = random_window(rng, 2, 0, Speaker::kTherapist);
  const FocalConfig loss = m.config().loss_for(Speaker::kTherapist);
  auto f = [&](Tape& tape) { return focal_loss(m.forward(tape, w).probs, 3, loss); };
  EXPECT_LT(grad_check_params(f, m.parameters().all(), 1e-5, 12).max_rel_error, 1e-4);
}

TEST(ModelTest, ConfigRoundTripsThroughJson) {
  ModelConfig c = tiny_config("C_T");
  c.alpha = {1, 1, 1, 1, 1, 1, 1, 0.5};
  const ModelConfig back = ModelConfig::FromJson(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
}

}  // namespace
}  // namespace miobs
