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

#include "core/encoders.h"

#include <gtest/gtest.h>

#include <cmath>

#include "core/error.h"
#include "core/parameters.h"
#include "test_util.h"

namespace miobs {
namespace {

using testing::expect_near;
using testing::random_tensor;

// Scalar GRU step written out coordinate by coordinate.
std::vector<double> reference_step(const GruCell& cell, const std::vector<double>& x,
                                   const std::vector<double>& h) {
  const std::size_t d = cell.hidden_width();
  const Tensor& W = cell.input_weights().value;
  const Tensor& U = cell.gate_weights().value;
  const Tensor& Uc = cell.candidate_weights().value;
  const Tensor& b = cell.bias().value;
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  std::vector<double> z(d), r(d), out(d);
  for (std::size_t j = 0; j < d; ++j) {
    double az = b[j], ar = b[d + j];
    for (std::size_t i = 0; i < x.size(); ++i) {
      az += x[i] * W.at(i, j);
      ar += x[i] * W.at(i, d + j);
    }
    for (std::size_t i = 0; i < d; ++i) {
      az += h[i] * U.at(i, j);
      ar += h[i] * U.at(i, d + j);
    }
    z[j] = sig(az);
    r[j] = sig(ar);
  }
  for (std::size_t j = 0; j < d; ++j) {
    double ac = b[2 * d + j];
    for (std::size_t i = 0; i < x.size(); ++i) ac += x[i] * W.at(i, 2 * d + j);
    for (std::size_t i = 0; i < d; ++i) ac += r[i] * h[i] * Uc.at(i, j);
    out[j] = (1.0 - z[j]) * h[j] + z[j] * std::tanh(ac);
  }
  return out;
}

std::vector<double> values(Var v) { return v.value().values(); }

TEST(GruCellTest, ZeroWeightsHalveTheState) {
  ParameterStore store(1);
  GruCell cell(store, "g", 3, 2);
  for (Parameter* p : store.all()) p->value.fill(0.0);
  Tape tape;
  Var h = cell.step(tape, tape.constant(random_tensor(Shape::Vector(3), 2)),
                    tape.constant(Tensor::Vector({1, 1})));
  EXPECT_EQ(h.value(), Tensor::Vector({0.5, 0.5}));
}

TEST(GruCellTest, SaturatedUpdateGateKeepsTheState) {
  ParameterStore store(1);
  GruCell cell(store, "g", 3, 2);
  cell.candidate_weights().value.fill(0.0);
  for (std::size_t j = 0; j < 2; ++j) cell.bias().value[j] = -50.0;  // z -> 0
  Tape tape;
  const Tensor h0 = Tensor::Vector({0.3, -0.7});
  Var h = cell.step(tape, tape.constant(random_tensor(Shape::Vector(3), 3)), tape.constant(h0));
  expect_near(h.value(), h0, 1e-15);
}

TEST(GruCellTest, MatchesScalarReference) {
  ParameterStore store(4);
  GruCell cell(store, "g", 5, 3);
  cell.bias().value = random_tensor(Shape::Vector(9), 5);
  const Tensor x = random_tensor(Shape::Vector(5), 6);
  const Tensor h0 = random_tensor(Shape::Vector(3), 7);
  Tape tape;
  Var h = cell.step(tape, tape.constant(x), tape.constant(h0));
  expect_near(values(h), reference_step(cell, x.values(), h0.values()), 1e-14);
}

TEST(GruCellTest, DeterministicAcrossCalls) {
  ParameterStore store(4);
  GruCell cell(store, "g", 5, 3);
  const Tensor x = random_tensor(Shape::Vector(5), 6);
  Tape t1, t2;
  EXPECT_EQ(cell.step(t1, t1.constant(x), t1.constant(Tensor(Shape::Vector(3)))).value(),
            cell.step(t2, t2.constant(x), t2.constant(Tensor(Shape::Vector(3)))).value());
}

TEST(GruCellTest, WidthMismatchIsDimensionError) {
  ParameterStore store(4);
  GruCell cell(store, "g", 5, 3);
  Tape tape;
  try {
    cell.step(tape, tape.constant(Tensor(Shape::Vector(4))), tape.constant(Tensor(Shape::Vector(3))));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimension);
  }
}

TEST(GruCellTest, InitBoundIsInverseSqrtHidden) {
  ParameterStore store(8);
  GruCell cell(store, "g", 6, 4);
  for (const Parameter* p : {&cell.input_weights(), &cell.gate_weights(), &cell.candidate_weights()})
    for (double v : p->value.values()) EXPECT_LE(std::abs(v), 0.5);
}

TEST(BiGruTest, EmptySequenceGivesZeroSummary) {
  ParameterStore store(1);
  BiGru g(store, "u", 4, 3);
  Tape tape;
  auto enc = g.encode(tape, tape.constant(Tensor(Shape{0, 4})));
  EXPECT_EQ(enc.states.value().rows(), 0u);
  EXPECT_EQ(enc.summary.value(), Tensor(Shape::Vector(6)));
}

TEST(BiGruTest, SingleStepSummaryEqualsItsState) {
  ParameterStore store(1);
  BiGru g(store, "u", 4, 3);
  Tape tape;
  auto enc = g.encode(tape, tape.constant(random_tensor(Shape::Matrix(1, 4), 2)));
  expect_near(enc.summary.value().values(), std::vector<double>(enc.states.value().row(0).begin(),
                                                                enc.states.value().row(0).end()),
              0.0);
}

TEST(BiGruTest, BothDirectionsMatchUnrolledReference) {
  ParameterStore store(3);
  BiGru g(store, "u", 4, 3);
  const Tensor X = random_tensor(Shape::Matrix(5, 4), 4);
  Tape tape;
  auto enc = g.encode(tape, tape.constant(X));

  auto row_of = [&](std::size_t t) { return std::vector<double>(X.row(t).begin(), X.row(t).end()); };
  std::vector<std::vector<double>> fwd(5), bwd(5);
  std::vector<double> h(3, 0.0);
  for (std::size_t t = 0; t < 5; ++t) fwd[t] = h = reference_step(g.forward_cell(), row_of(t), h);
  // The reverse pass is the backward cell run forward over the reversed rows.
  h.assign(3, 0.0);
  for (std::size_t k = 0; k < 5; ++k) bwd[4 - k] = h = reference_step(g.backward_cell(), row_of(4 - k), h);

  for (std::size_t t = 0; t < 5; ++t) {
    std::vector<double> want = fwd[t];
    want.insert(want.end(), bwd[t].begin(), bwd[t].end());
    expect_near(std::vector<double>(enc.states.value().row(t).begin(), enc.states.value().row(t).end()),
                want, 1e-14);
  }
  std::vector<double> summary = fwd[4];
  summary.insert(summary.end(), bwd[0].begin(), bwd[0].end());
  expect_near(values(enc.summary), summary, 1e-14);
}

TEST(DialogueGruTest, SingleStepIsOneCellUpdateFromZero) {
  ParameterStore store(5);
  DialogueGru d(store, "d", 6, 4);
  const Tensor x = random_tensor(Shape::Vector(6), 1);
  Tape tape;
  auto H = d.encode(tape, {tape.constant(x)});
  ASSERT_EQ(H.size(), 1u);
  expect_near(values(H[0]), reference_step(d.cell(), x.values(), std::vector<double>(4, 0.0)), 1e-14);
}

TEST(DialogueGruTest, MatchesHandUnrolledLoop) {
  ParameterStore store(5);
  DialogueGru d(store, "d", 6, 4);
  std::vector<Tensor> xs = {random_tensor(Shape::Vector(6), 11), random_tensor(Shape::Vector(6), 12),
                            random_tensor(Shape::Vector(6), 13)};
  Tape tape;
  std::vector<Var> in;
  for (const auto& x : xs) in.push_back(tape.constant(x));
  auto H = d.encode(tape, in);
  std::vector<double> h(4, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    h = reference_step(d.cell(), xs[i].values(), h);
    expect_near(values(H[i]), h, 1e-14);
  }
}

TEST(DialogueGruTest, AppendingNeverChangesEarlierStates) {
  ParameterStore store(5);
  DialogueGru d(store, "d", 6, 4);
  std::vector<Tensor> xs;
  for (std::uint64_t s = 0; s < 4; ++s) xs.push_back(random_tensor(Shape::Vector(6), 20 + s));
  Tape t1, t2;
  std::vector<Var> short_in, long_in;
  for (std::size_t i = 0; i < 3; ++i) short_in.push_back(t1.constant(xs[i]));
  for (std::size_t i = 0; i < 4; ++i) long_in.push_back(t2.constant(xs[i]));
  auto a = d.encode(t1, short_in);
  auto b = d.encode(t2, long_in);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a[i].value(), b[i].value());
}

class ConcatEncoderTest : public ::testing::Test {
 protected:
  ConcatEncoderTest() : store_(7), bigru_(store_, "c", 3, 2) {}
  ParameterStore store_;
  BiGru bigru_;
};

TEST_F(ConcatEncoderTest, SegmentJoinsFirstAndLastTokenStates) {
  Tape tape;
  const Tensor u = random_tensor(Shape::Matrix(4, 3), 1);
  auto enc = encode_dialogue_concat(tape, bigru_, {tape.constant(u)},
                                    tape.constant(random_tensor(Shape::Vector(3), 2)));
  ASSERT_EQ(enc.segments.size(), 1u);
  EXPECT_EQ(enc.start[0], 0u);
  EXPECT_EQ(enc.end[0], 3u);
  std::vector<double> want(enc.states.value().row(0).begin(), enc.states.value().row(0).end());
  want.insert(want.end(), enc.states.value().row(3).begin(), enc.states.value().row(3).end());
  expect_near(values(enc.segments[0]), want, 0.0);
  EXPECT_EQ(enc.segments[0].value().size(), 8u);
}

TEST_F(ConcatEncoderTest, SingleTokenSegmentsDuplicateTheirState) {
  Tape tape;
  auto enc = encode_dialogue_concat(
      tape, bigru_,
      {tape.constant(random_tensor(Shape::Matrix(1, 3), 3)),
       tape.constant(random_tensor(Shape::Matrix(1, 3), 4))},
      tape.constant(random_tensor(Shape::Vector(3), 5)));
  // Token, boundary, token.
  EXPECT_EQ(enc.states.value().rows(), 3u);
  EXPECT_EQ(enc.start[1], 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& s = enc.segments[i].value();
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(s[j], s[4 + j]);
  }
}

TEST_F(ConcatEncoderTest, OneUtteranceMatchesPlainBiGru) {
  const Tensor u = random_tensor(Shape::Matrix(5, 3), 6);
  Tape t1, t2;
  auto enc = encode_dialogue_concat(t1, bigru_, {t1.constant(u)},
                                    t1.constant(random_tensor(Shape::Vector(3), 7)));
  auto plain = bigru_.encode(t2, t2.constant(u));
  EXPECT_EQ(enc.states.value(), plain.states.value());
  EXPECT_EQ(enc.final_state.value(), plain.summary.value());
}

TEST_F(ConcatEncoderTest, EmptyUtterancesGetZeroSegments) {
  Tape tape;
  auto enc = encode_dialogue_concat(
      tape, bigru_,
      {tape.constant(Tensor(Shape{0, 3})), tape.constant(random_tensor(Shape::Matrix(2, 3), 8))},
      tape.constant(random_tensor(Shape::Vector(3), 9)));
  EXPECT_TRUE(enc.empty[0]);
  EXPECT_EQ(enc.segments[0].value(), Tensor(Shape::Vector(8)));
  EXPECT_EQ(enc.states.value().rows(), 2u);  // no boundary before the first real utterance
}

TEST(EncoderGradTest, SkeletonsPassFiniteDifferences) {
  ParameterStore store(9);
  BiGru utt(store, "u", 3, 2);
  DialogueGru dlg(store, "d", 4, 3);
  BiGru cat(store, "c", 3, 2);
  Parameter& boundary = store.add_uniform("b", Shape::Vector(3), 0.5);
  const Tensor u1 = random_tensor(Shape::Matrix(3, 3), 1);
  const Tensor u2 = random_tensor(Shape::Matrix(2, 3), 2);
  auto f = [&](Tape& tape) {
    auto e1 = utt.encode(tape, tape.constant(u1));
    auto e2 = utt.encode(tape, tape.constant(u2));
    auto H = dlg.encode(tape, {e1.summary, e2.summary});
    auto c = encode_dialogue_concat(tape, cat, {tape.constant(u1), tape.constant(u2)},
                                    tape.param(boundary));
    return add(sum(mul(H.back(), H.back())),
               add(sum(tanh(c.segments[1])), sum(mul(c.final_state, c.final_state))));
  };
  EXPECT_LT(grad_check_params(f, store.all()).max_rel_error, 1e-6);
}

}  // namespace
}  // namespace miobs
