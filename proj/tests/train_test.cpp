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

#include "core/train.h"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "core/error.h"
#include "core/loss.h"
#include "model_fixture.h"
#include "test_util.h"

namespace miobs {
namespace {

using testing::tiny_config;

Corpus small_corpus(std::uint64_t seed = 4, std::size_t sessions = 10) {
  return gen_synthetic({.seed = seed, .sessions = sessions, .min_length = 12, .max_length = 12});
}

TrainConfig quick_train(std::size_t epochs = 2) {
  TrainConfig t;
  t.lr = 1e-2;
  t.batch = 16;
  t.epochs = epochs;
  t.patience = 5;
  t.seed = 3;
  return t;
}

TEST(AdamTest, ZeroGradientLeavesParametersUnchanged) {
  Parameter p("p", testing::random_tensor(Shape::Vector(5), 1));
  const Tensor before = p.value;
  AdamState st;
  for (int i = 0; i < 3; ++i) adam_step({&p}, st, 1e-3);
  EXPECT_EQ(p.value, before);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  Parameter p("p", Tensor::Vector({0.5, -2.0}));
  p.grad = Tensor::Vector({1.0, 1.0});
  AdamState st;
  adam_step({&p}, st, 1e-3);
  // m_hat = v_hat = 1, so the step is lr / (1 + eps).
  const double step = 1e-3 / (1.0 + st.eps);
  EXPECT_NEAR(p.value[0], 0.5 - step, 1e-15);
  EXPECT_NEAR(p.value[1], -2.0 - step, 1e-15);
  EXPECT_NEAR(step, 1e-3, 1e-10);
  EXPECT_EQ(st.step, 1u);
}

TEST(AdamTest, KeepsFlaggedFirstRowAtZero) {
  Parameter p("emb", Tensor(Shape::Matrix(2, 2)));
  p.zero_first_row = true;
  p.grad.fill(1.0);
  AdamState st;
  adam_step({&p}, st, 0.1);
  EXPECT_EQ(p.value.at(0, 0), 0.0);
  EXPECT_NE(p.value.at(1, 0), 0.0);
}

TEST(AdamTest, Deterministic) {
  auto run = [] {
    Parameter p("p", testing::random_tensor(Shape::Matrix(3, 3), 2));
    AdamState st;
    for (int i = 0; i < 4; ++i) {
      p.grad = testing::random_tensor(Shape::Matrix(3, 3), 10 + i);
      adam_step({&p}, st, 1e-2);
    }
    return p.value;
  };
  EXPECT_EQ(run(), run());
}

TEST(ClipTest, SmallNormUnchanged) {
  Parameter p("p", Tensor::Vector({0.0}));
  p.grad = Tensor::Vector({0.5});
  EXPECT_DOUBLE_EQ(clip_global_norm({&p}, 1.0), 0.5);
  EXPECT_EQ(p.grad[0], 0.5);
}

TEST(ClipTest, RescalesToMaxNorm) {
  Parameter a("a", Tensor::Vector({0.0})), b("b", Tensor::Vector({0.0}));
  a.grad = Tensor::Vector({3.0});
  b.grad = Tensor::Vector({4.0});
  EXPECT_DOUBLE_EQ(clip_global_norm({&a, &b}, 1.0), 5.0);
  EXPECT_NEAR(a.grad[0], 0.6, 1e-15);
  EXPECT_NEAR(b.grad[0], 0.8, 1e-15);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Parameter p("p", Tensor(Shape::Vector(7)));
    p.grad = testing::random_tensor(Shape::Vector(7), seed, -10, 10);
    clip_global_norm({&p}, 2.0);
    EXPECT_LE(global_norm({&p}), 2.0 + 1e-12);
  }
}

TEST(MtlTest, SchedulesAndNames) {
  const TaskSpec ct{Task::kCategorize, Speaker::kTherapist};
  const auto all = MtlSchedule::For(MtlMode::kAll, ct);
  EXPECT_EQ(all.tasks.size(), 4u);
  EXPECT_EQ(all.groups.size(), 2u);
  EXPECT_EQ(all.tasks[all.primary_index(ct)], ct);
  EXPECT_THROW(MtlSchedule::For(MtlMode::kAlternateFore, ct), Error);
  EXPECT_EQ(parse_mtl_mode("ct_all"), MtlMode::kAll);
  EXPECT_THROW(parse_mtl_mode("both"), Error);
}

TEST(FitTest, PatienceZeroStopsAfterFirstFlatEpoch) {
  const Corpus corpus = small_corpus();
  const auto schedule = MtlSchedule::For(MtlMode::kSingle, {Task::kCategorize, Speaker::kClient});
  for (std::size_t patience : {0u, 2u}) {
    auto model = build_model(tiny_config("C_C", 3), schedule, corpus, 1);
    TrainConfig t = quick_train(10);
    t.lr = 1e-15;  // dev metric cannot move
    t.patience = patience;
    const FitResult r = fit(*model, corpus, corpus, t, schedule);
    EXPECT_TRUE(r.stopped_early);
    EXPECT_EQ(r.log.size(), patience + 2);
    EXPECT_EQ(r.best_epoch, 1u);
  }
}

TEST(FitTest, AllTasksScheduleTrainsEveryHead) {
  const Corpus corpus = small_corpus();
  const TaskSpec ct{Task::kCategorize, Speaker::kTherapist};
  const auto schedule = MtlSchedule::For(MtlMode::kAll, ct);
  auto model = build_model(tiny_config("C_T", 3), schedule, corpus, 2);
  std::vector<Tensor> before;
  for (std::size_t t = 0; t < 4; ++t) before.push_back(model->head(t)[0].w2->value);
  fit(*model, corpus, corpus, quick_train(1), schedule);
  for (std::size_t t = 0; t < 4; ++t) EXPECT_NE(model->head(t)[0].w2->value, before[t]) << t;
}

TEST(FitTest, LossFallsOverFirstSteps) {
  const Corpus corpus = small_corpus();
  const auto schedule = MtlSchedule::For(MtlMode::kSingle, {Task::kCategorize, Speaker::kClient});
  auto model = build_model(tiny_config("C_C", 3), schedule, corpus, 5);
  const auto windows = task_windows(*model, corpus)[0];
  const FocalConfig loss = model->config().loss_for(Speaker::kClient);
  auto params = model->parameters().all();
  AdamState st;
  double prev = INFINITY;
  for (int step = 0; step < 5; ++step) {
    model->parameters().zero_grad();
    Tape tape;
    Var total;
    for (std::size_t i = 0; i < 16; ++i) {
      Var l = focal_loss(model->forward(tape, windows[i]).probs, *windows[i].label, loss);
      total = total.valid() ? add(total, l) : l;
    }
    const double value = total.value().item();
    EXPECT_LT(value, prev) << "step " << step;
    prev = value;
    tape.backward(total);
    clip_global_norm(params, 5.0);
    adam_step(params, st, 1e-2);
  }
}

TEST(FitTest, NoTrainingWindowsIsTrainingError) {
  Corpus corpus = small_corpus();
  for (auto& s : corpus)
    for (auto& u : s.utterances) u.label.reset();
  const auto schedule = MtlSchedule::For(MtlMode::kSingle, {Task::kCategorize, Speaker::kClient});
  auto model = build_model(tiny_config("C_C", 3), schedule, small_corpus(), 5);
  try {
    fit(*model, corpus, corpus, quick_train(1), schedule);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTraining);
  }
}

CheckpointMeta meta_for(const Model& m, const TrainConfig& t, const FitResult& r) {
  CheckpointMeta meta;
  meta.model = m.config();
  meta.train = t;
  meta.tasks = m.tasks();
  meta.seed = t.seed;
  meta.rng_state = r.rng_state;
  meta.best_metric = r.best_metric;
  meta.best_epoch = r.best_epoch;
  return meta;
}

std::string train_bytes(const char* preset) {
  const Corpus corpus = small_corpus(9, 8);
  ModelConfig c = tiny_config(preset, 3);
  c.embed_dropout = 0.2;  // exercise the rng
  const auto schedule = MtlSchedule::For(MtlMode::kSingle, c.primary());
  auto model = build_model(c, schedule, corpus, 3);
  const TrainConfig t = quick_train(2);
  const FitResult r = fit(*model, corpus, corpus, t, schedule);
  return checkpoint_bytes(*model, meta_for(*model, t, r));
}

TEST(CheckpointTest, SameSeedSameBytes) {
  EXPECT_EQ(train_bytes("C_C"), train_bytes("C_C"));
  EXPECT_EQ(train_bytes("F_T"), train_bytes("F_T"));
}

TEST(CheckpointTest, RoundTripPreservesOutputsExactly) {
  testing::TempDir dir;
  const Corpus corpus = small_corpus(6, 6);
  for (const char* preset : {"C_T", "F_C"}) {
    ModelConfig c = tiny_config(preset, 3);
    const auto schedule = MtlSchedule::For(MtlMode::kJoint, c.primary());
    auto model = build_model(c, schedule, corpus, 8);
    const TrainConfig t = quick_train(1);
    const FitResult r = fit(*model, corpus, corpus, t, schedule);
    const std::string path = dir.file(std::string(preset) + ".ckpt");
    save_checkpoint(*model, meta_for(*model, t, r), path);
    const LoadedCheckpoint back = load_checkpoint(path);
    EXPECT_EQ(back.meta.tasks, model->tasks());
    EXPECT_EQ(back.meta.best_epoch, r.best_epoch);
    EXPECT_EQ(back.model->vocab().tokens(), model->vocab().tokens());
    const auto windows = task_windows(*model, corpus);
    for (std::size_t task = 0; task < 2; ++task) {
      for (const Window& w : windows[task])
        ASSERT_EQ(back.model->predict(w, task), model->predict(w, task));
    }
    EXPECT_EQ(checkpoint_bytes(*back.model, back.meta), checkpoint_bytes(*model, back.meta));
  }
}

TEST(CheckpointTest, CorruptFilesAreRejected) {
  testing::TempDir dir;
  EXPECT_THROW(load_checkpoint(dir.file("missing.ckpt")), Error);
  std::ofstream(dir.file("junk.ckpt")) << "not a checkpoint";
  EXPECT_THROW(load_checkpoint(dir.file("junk.ckpt")), Error);
  const std::string good = train_bytes("C_C");
  EXPECT_THROW(parse_checkpoint(good.substr(0, good.size() / 2), "half"), Error);
}

TEST(TrainConfigTest, SetAndValidate) {
  TrainConfig t;
  EXPECT_TRUE(t.set("lr", "0.001"));
  EXPECT_DOUBLE_EQ(t.lr, 0.001);
  EXPECT_TRUE(t.set("mtl", "joint"));
  EXPECT_FALSE(t.set("d_h", "4"));
  EXPECT_THROW(t.set("batch", "many"), Error);
  t.batch = 0;
  EXPECT_THROW(t.validate(), Error);
  EXPECT_EQ(TrainConfig::FromJson(TrainConfig{}.to_json()).to_json(), TrainConfig{}.to_json());
}

}  // namespace
}  // namespace miobs
