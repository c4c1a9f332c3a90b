#include <cmath>
#include <filesystem>
#include <numeric>

#include <gtest/gtest.h>

#include "gwrl/autodiff/checkpoint.h"
#include "gwrl/autodiff/param_store.h"
#include "gwrl/autodiff/tape.h"
#include "gwrl/util/rng.h"
#include "testing/grad_check.h"

namespace gwrl::ad {
namespace {

Tensor RandomTensor(Rng& rng, Shape shape, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.Uniform(-scale, scale);
  return t;
}

double Sigm(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Gate-by-gate reference, written independently of the fused tape op.
void ReferenceLstm(const std::vector<double>& x, const std::vector<double>& h,
                   const std::vector<double>& c, const Tensor& wx,
                   const Tensor& wh, const Tensor& b, std::vector<double>& h_out,
                   std::vector<double>& c_out) {
  const std::size_t n = h.size();
  auto pre = [&](std::size_t gate, std::size_t k) {
    const std::size_t col = gate * n + k;
    double z = b[col];
    for (std::size_t p = 0; p < x.size(); ++p) z += x[p] * wx.at(p, col);
    for (std::size_t p = 0; p < n; ++p) z += h[p] * wh.at(p, col);
    return z;
  };
  h_out.assign(n, 0.0);
  c_out.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double in_gate = Sigm(pre(0, k));
    const double forget = Sigm(pre(1, k));
    const double cand = std::tanh(pre(2, k));
    const double out_gate = Sigm(pre(3, k));
    c_out[k] = forget * c[k] + in_gate * cand;
    h_out[k] = out_gate * std::tanh(c_out[k]);
  }
}

TEST(SoftmaxTest, UniformForEqualLogits) {
  const std::vector<double> logits{0.0, 0.0, 0.0};
  for (double p : Softmax(logits)) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
}

TEST(SoftmaxTest, LogTwoAgainstZero) {
  const std::vector<double> logits{std::log(2.0), 0.0};
  auto p = Softmax(logits);
  EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-15);
}

TEST(SoftmaxTest, MatchesExpNormalizeOracle) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> logits(10);
    for (double& v : logits) v = rng.Uniform(-5.0, 5.0);
    std::vector<double> oracle(10);
    double total = 0.0;
    for (std::size_t i = 0; i < 10; ++i) total += (oracle[i] = std::exp(logits[i]));
    auto p = Softmax(logits);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(p[i], oracle[i] / total, 1e-12);
  }
}

TEST(SoftmaxTest, SumsToOneAndShiftInvariant) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.Index(20);
    std::vector<double> logits(n), shifted(n);
    const double shift = rng.Uniform(-50.0, 50.0);
    for (std::size_t i = 0; i < n; ++i) {
      logits[i] = rng.Uniform(-30.0, 30.0);
      shifted[i] = logits[i] + shift;
    }
    auto p = Softmax(logits);
    auto q = Softmax(shifted);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_GE(p[i], 0.0);
      EXPECT_NEAR(p[i], q[i], 1e-12);
    }
  }
}

TEST(SoftmaxTest, RejectsNonFiniteLogits) {
  const std::vector<double> logits{0.0, std::nan("")};
  try {
    Softmax(logits);
    FAIL() << "expected an exception";
  } catch (const std::domain_error& e) {
    EXPECT_STREQ(e.what(), "non-finite logits");
  }
  const std::vector<double> inf_logits{INFINITY, 0.0};
  EXPECT_THROW(Softmax(inf_logits), std::domain_error);
}

TEST(SoftmaxTest, MaskedEntriesGetZeroMass) {
  const std::vector<double> logits{1.0, 2.0, 3.0};
  const Mask mask{1, 0, 1};
  auto p = Softmax(logits, mask);
  EXPECT_EQ(p[1], 0.0);
  EXPECT_NEAR(p[0], 1.0 / (1.0 + std::exp(2.0)), 1e-15);
}

TEST(LstmCellTest, ZeroParametersAndInputsGiveZeroState) {
  Tape tape;
  auto zeros = [&](Shape s) { return tape.Constant(Tensor(std::move(s))); };
  auto out = LstmCell(zeros({3}), zeros({2}), zeros({2}), zeros({3, 8}),
                      zeros({2, 8}), zeros({8}));
  for (double v : out.h.value().values()) EXPECT_EQ(v, 0.0);
  for (double v : out.c.value().values()) EXPECT_EQ(v, 0.0);
}

TEST(LstmCellTest, UnitCellWithZeroParameters) {
  Tape tape;
  auto zeros = [&](Shape s) { return tape.Constant(Tensor(std::move(s))); };
  auto out = LstmCell(zeros({1}), zeros({1}), tape.Constant(Tensor::Vector({1.0})),
                      zeros({1, 4}), zeros({1, 4}), zeros({4}));
  EXPECT_NEAR(out.c.item(), 0.5, 1e-15);
  EXPECT_NEAR(out.h.item(), 0.5 * std::tanh(0.5), 1e-15);
}

TEST(LstmCellTest, MatchesGateByGateOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t in = 1 + rng.Index(5), hid = 1 + rng.Index(5);
    Tensor x = RandomTensor(rng, {in}), h = RandomTensor(rng, {hid}),
           c = RandomTensor(rng, {hid});
    Tensor wx = RandomTensor(rng, {in, 4 * hid}), wh = RandomTensor(rng, {hid, 4 * hid}),
           b = RandomTensor(rng, {4 * hid});
    Tape tape;
    auto out = LstmCell(tape.Constant(x), tape.Constant(h), tape.Constant(c),
                        tape.Constant(wx), tape.Constant(wh), tape.Constant(b));
    std::vector<double> h_ref, c_ref;
    ReferenceLstm(x.buffer(), h.buffer(), c.buffer(), wx, wh, b, h_ref, c_ref);
    for (std::size_t k = 0; k < hid; ++k) {
      EXPECT_NEAR(out.h.value()[k], h_ref[k], 1e-12);
      EXPECT_NEAR(out.c.value()[k], c_ref[k], 1e-12);
    }
  }
}

TEST(LstmCellTest, ShapeErrorNamesParameter) {
  ParamStore store(1);
  store.Add("qgen.lstm.W_x", {3, 8}, 3);
  store.Add("qgen.lstm.W_h", {3, 8}, 3);  // wrong: hidden is 2
  store.Add("qgen.lstm.b", {8}, 2);
  Tape tape;
  try {
    LstmCell(tape.Constant(Tensor({3})), tape.Constant(Tensor({2})),
             tape.Constant(Tensor({2})), tape.Param(store, "qgen.lstm.W_x"),
             tape.Param(store, "qgen.lstm.W_h"), tape.Param(store, "qgen.lstm.b"));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("qgen.lstm.W_h"), std::string::npos)
        << e.what();
  }
}

TEST(BackwardTest, SumGivesOnes) {
  ParamStore store;
  store.Add("p", Tensor::Vector({0.3, -1.0, 2.0}));
  Tape tape;
  Var p = tape.Param(store, "p");
  tape.Backward(Sum(p));
  for (double g : tape.Grad(p)->values()) EXPECT_EQ(g, 1.0);
}

TEST(BackwardTest, DotWithItself) {
  ParamStore store;
  store.Add("p", Tensor::Vector({1.0, 2.0}));
  Tape tape;
  Var p = tape.Param(store, "p");
  tape.Backward(Dot(p, p));
  EXPECT_EQ((*tape.Grad(p))[0], 2.0);
  EXPECT_EQ((*tape.Grad(p))[1], 4.0);
}

TEST(BackwardTest, RejectsNonScalarLoss) {
  Tape tape;
  Var v = tape.Constant(Tensor::Vector({1.0, 2.0}));
  EXPECT_THROW(tape.Backward(Tanh(v)), ShapeError);
}

TEST(BackwardTest, RepeatedCallsAccumulate) {
  ParamStore store;
  store.Add("p", Tensor::Vector({0.5, -0.25}));
  Tape tape;
  Var p = tape.Param(store, "p");
  Var loss = Sum(Tanh(Mul(p, p)));
  tape.Backward(loss);
  const Tensor once = *tape.Grad(p);
  tape.Backward(loss);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_DOUBLE_EQ((*tape.Grad(p))[i], 2 * once[i]);
  tape.ZeroGrad();
  tape.Backward(loss);
  EXPECT_EQ(*tape.Grad(p), once);
}

TEST(BackwardTest, IgnoredParameterGetsExactZero) {
  ParamStore store(5);
  store.Add("used", {3}, 3);
  store.Add("ignored", {4}, 4);
  Tape tape;
  Var used = tape.Param(store, "used");
  Var ignored = tape.Param(store, "ignored");
  Var unused_branch = Sum(Exp(ignored));
  (void)unused_branch;
  tape.Backward(Sum(Mul(used, used)));
  Gradients grads;
  tape.AccumulateParamGrads(store, grads);
  for (double g : grads.Get("ignored").values()) EXPECT_EQ(g, 0.0);
}

TEST(BackwardTest, ReplayIsBitIdentical) {
  auto run = [] {
    ParamStore store(42);
    store.Add("w", {4, 3}, 4);
    store.Add("b", {3}, 4);
    Tape tape;
    Var x = tape.Constant(Tensor::Vector({0.1, -0.2, 0.3, 0.7}));
    Var logits = Add(MatMul(x, tape.Param(store, "w")), tape.Param(store, "b"));
    Var loss = CrossEntropy(Tanh(logits), 1);
    tape.Backward(loss);
    Gradients g;
    tape.AccumulateParamGrads(store, g);
    return std::make_pair(loss.item(), g.Flatten());
  };
  auto a = run();
  auto b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

// Every primitive against central differences on 100 random cases. Each op
// output is contracted with a random weight vector to form a scalar.
class PrimitiveGradientTest : public ::testing::Test {
 protected:
  void Check(const std::function<std::vector<Tensor>(Rng&)>& make_inputs,
             const testing::LossOnInputs& op, int cases = 100) {
    Rng rng(1234);
    for (int trial = 0; trial < cases; ++trial) {
      auto inputs = make_inputs(rng);
      Rng wrng(trial);
      auto contracted = [&](Tape& tape, const std::vector<Var>& vars) {
        Var out = op(tape, vars);
        Tensor w(out.value().shape());
        Rng local(trial + 99);
        for (double& v : w.values()) v = local.Uniform(-1.0, 1.0);
        if (out.value().size() == 1) return out;
        return Sum(Mul(out, tape.Constant(w)));
      };
      auto report = testing::CheckInputGradients(inputs, contracted);
      ASSERT_TRUE(report.ok()) << "trial " << trial << ": " << report.first_failure;
    }
  }
};

TEST_F(PrimitiveGradientTest, MatMulVectorMatrix) {
  Check([](Rng& r) { return std::vector{RandomTensor(r, {3}), RandomTensor(r, {3, 4})}; },
        [](Tape&, const std::vector<Var>& v) { return MatMul(v[0], v[1]); });
}

TEST_F(PrimitiveGradientTest, MatMulMatrixMatrix) {
  Check([](Rng& r) { return std::vector{RandomTensor(r, {2, 3}), RandomTensor(r, {3, 2})}; },
        [](Tape&, const std::vector<Var>& v) { return MatMul(v[0], v[1]); });
}

TEST_F(PrimitiveGradientTest, AddSubMulWithBroadcast) {
  Check([](Rng& r) {
          return std::vector{RandomTensor(r, {2, 3}), RandomTensor(r, {3}),
                             RandomTensor(r, {2, 3})};
        },
        [](Tape&, const std::vector<Var>& v) {
          return Mul(Sub(Add(v[0], v[1]), v[1]), Add(v[2], v[1]));
        });
}

TEST_F(PrimitiveGradientTest, ScaleConcatSlice) {
  Check([](Rng& r) { return std::vector{RandomTensor(r, {3}), RandomTensor(r, {2})}; },
        [](Tape&, const std::vector<Var>& v) {
          return Slice(Scale(Concat({v[0], v[1], v[0]}), -1.7), 2, 5);
        });
}

TEST_F(PrimitiveGradientTest, TanhSigmoidExp) {
  Check([](Rng& r) { return std::vector{RandomTensor(r, {5}, 2.0)}; },
        [](Tape&, const std::vector<Var>& v) {
          return Mul(Tanh(v[0]), Add(Sigmoid(v[0]), Exp(v[0])));
        });
}

TEST_F(PrimitiveGradientTest, LogOfPositive) {
  Check([](Rng& r) {
          Tensor t({4});
          for (double& x : t.values()) x = r.Uniform(0.5, 3.0);
          return std::vector{t};
        },
        [](Tape&, const std::vector<Var>& v) { return Log(v[0]); });
}

TEST_F(PrimitiveGradientTest, EmbeddingLookup) {
  Check([](Rng& r) { return std::vector{RandomTensor(r, {4, 3})}; },
        [](Tape&, const std::vector<Var>& v) {
          return Concat({Embedding(v[0], 2), Embedding(v[0], 0), Embedding(v[0], 2)});
        });
}

TEST_F(PrimitiveGradientTest, SumDotPick) {
  Check([](Rng& r) { return std::vector{RandomTensor(r, {4}), RandomTensor(r, {4})}; },
        [](Tape&, const std::vector<Var>& v) {
          return Add(Mul(Sum(v[0]), Dot(v[0], v[1])), Pick(v[1], 3));
        });
}

TEST_F(PrimitiveGradientTest, SoftmaxAndLogSoftmax) {
  Check([](Rng& r) { return std::vector{RandomTensor(r, {5}, 3.0)}; },
        [](Tape&, const std::vector<Var>& v) {
          return Concat({Softmax(v[0]), LogSoftmax(v[0])});
        });
}

TEST_F(PrimitiveGradientTest, MaskedLogSoftmax) {
  static const Mask mask{1, 0, 1, 1, 0};
  Check([](Rng& r) { return std::vector{RandomTensor(r, {5}, 3.0)}; },
        [](Tape&, const std::vector<Var>& v) {
          Var ls = LogSoftmax(v[0], mask);
          return Add(Add(Pick(ls, 0), Scale(Pick(ls, 2), 0.3)), Pick(ls, 3));
        });
}

TEST_F(PrimitiveGradientTest, CrossEntropy) {
  static const Mask mask{1, 1, 0, 1};
  Check([](Rng& r) { return std::vector{RandomTensor(r, {4}, 3.0)}; },
        [](Tape&, const std::vector<Var>& v) {
          return Add(CrossEntropy(v[0], 1), CrossEntropy(v[0], 3, mask));
        });
}

TEST_F(PrimitiveGradientTest, LstmCellAllInputs) {
  Check([](Rng& r) {
          return std::vector{RandomTensor(r, {3}), RandomTensor(r, {2}),
                             RandomTensor(r, {2}), RandomTensor(r, {3, 8}),
                             RandomTensor(r, {2, 8}), RandomTensor(r, {8})};
        },
        [](Tape&, const std::vector<Var>& v) {
          auto out = LstmCell(v[0], v[1], v[2], v[3], v[4], v[5]);
          auto out2 = LstmCell(v[0], out.h, out.c, v[3], v[4], v[5]);
          return Concat({out2.h, out2.c});
        });
}

TEST(ParamStoreTest, InitWithinFanInBoundAndNameSeeded) {
  ParamStore a(9), b(9);
  a.Add("x.w", {16, 4}, 16);
  b.Add("other", {3}, 3);
  b.Add("x.w", {16, 4}, 16);
  EXPECT_EQ(a.Get("x.w"), b.Get("x.w"));
  for (double v : a.Get("x.w").values()) EXPECT_LE(std::abs(v), 0.25);
  EXPECT_THROW(a.Add("x.w", {2}, 2), std::invalid_argument);
  EXPECT_THROW(a.Set("x.w", Tensor({2})), ShapeError);
}

TEST(SgdTest, DescentStep) {
  ParamStore store;
  store.Add("p", Tensor::Vector({1.0}));
  Gradients g;
  g.Accumulate("p", Tensor::Vector({2.0}));
  SgdStep(store, g, 0.5, StepDirection::kDescent);
  EXPECT_EQ(store.Get("p")[0], 0.0);
}

TEST(SgdTest, ZeroLearningRateIsIdentity) {
  ParamStore store(3);
  store.Add("a", {5}, 5);
  const ParamStore before = store;
  Gradients g = Gradients::ZerosLike(store);
  g.Accumulate("a", Tensor::Vector({1, 2, 3, 4, 5}));
  SgdStep(store, g, 0.0, StepDirection::kAscent);
  EXPECT_TRUE(store == before);
}

TEST(SgdTest, MissingGradientListsNames) {
  ParamStore store;
  store.Add("alpha", Tensor::Vector({1.0}));
  store.Add("beta", Tensor::Vector({1.0}));
  store.Add("gamma", Tensor::Vector({1.0}));
  Gradients g;
  g.Accumulate("beta", Tensor::Vector({1.0}));
  try {
    SgdStep(store, g, 0.1, StepDirection::kDescent);
    FAIL();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("alpha"), std::string::npos);
    EXPECT_NE(msg.find("gamma"), std::string::npos);
    EXPECT_EQ(msg.find("beta"), std::string::npos);
  }
}

TEST(SgdTest, ClipRescalesToNorm) {
  ParamStore store;
  store.Add("p", Tensor::Vector({0.0, 0.0}));
  Gradients g;
  g.Accumulate("p", Tensor::Vector({3.0, 4.0}));
  SgdStep(store, g, 1.0, StepDirection::kAscent, 1.0);
  EXPECT_NEAR(store.Get("p")[0], 0.6, 1e-15);
  EXPECT_NEAR(store.Get("p")[1], 0.8, 1e-15);
}

// Two-armed bandit with softmax([theta, 0]); J is exact by enumerating arms.
TEST(SgdTest, AscentIncreasesEnumeratedBanditValue) {
  const double reward[2] = {1.0, 0.2};
  auto exact_j = [&](double theta) {
    const double p0 = 1.0 / (1.0 + std::exp(-theta));
    return p0 * reward[0] + (1.0 - p0) * reward[1];
  };
  ParamStore store;
  store.Add("theta", Tensor::Vector({-0.4}));
  for (int step = 0; step < 10; ++step) {
    const double before = exact_j(store.Get("theta")[0]);
    Tape tape;
    Var theta = tape.Param(store, "theta");
    Var logits = Concat({theta, tape.Constant(Tensor::Scalar(0.0))});
    Var j = Dot(Softmax(logits), tape.Constant(Tensor::Vector({reward[0], reward[1]})));
    EXPECT_NEAR(j.item(), before, 1e-15);
    tape.Backward(j);
    Gradients g;
    tape.AccumulateParamGrads(store, g);
    SgdStep(store, g, 0.5, StepDirection::kAscent);
    EXPECT_GT(exact_j(store.Get("theta")[0]), before);
  }
}

TEST(CheckpointTest, RoundTripIsBitExact) {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    ParamStore store(trial);
    const std::size_t n = 1 + rng.Index(5);
    for (std::size_t p = 0; p < n; ++p) {
      Shape shape;
      const std::size_t rank = 1 + rng.Index(3);
      for (std::size_t r = 0; r < rank; ++r) shape.push_back(1 + rng.Index(4));
      store.Add("m.p" + std::to_string(p) + "\xc3\xa9", shape, 3);
    }
    // Awkward values must survive unchanged.
    store.mutable_value(0).values().back() = 5e-324;
    store.mutable_value(0)[0] = -0.0;
    const std::string bytes = SerializeParams(store);
    ParamStore back = DeserializeParams(bytes, trial);
    EXPECT_TRUE(back == store);
    EXPECT_EQ(SerializeParams(back), bytes);
    EXPECT_TRUE(std::signbit(back.value(0)[0]));
  }
}

TEST(CheckpointTest, HeaderLayout) {
  ParamStore store;
  store.Add("ab", Tensor::Vector({1.0}));
  const std::string bytes = SerializeParams(store);
  // u32 version, u64 count, u32 len, "ab", u32 rank, u64 extent, f64 value
  ASSERT_EQ(bytes.size(), 4u + 8 + 4 + 2 + 4 + 8 + 8);
  EXPECT_EQ(bytes[0], 1);
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes.substr(16, 2), "ab");
  EXPECT_THROW(DeserializeParams(bytes.substr(0, bytes.size() - 1)), std::runtime_error);
}

TEST(CheckpointTest, FileRoundTripAndMissingFile) {
  ParamStore store(1);
  store.Add("oracle.mlp.w", {3, 2}, 3);
  const auto path = std::filesystem::temp_directory_path() / "gwrl_ckpt_test.bin";
  SaveCheckpoint(store, path);
  EXPECT_TRUE(LoadCheckpoint(path) == store);
  std::filesystem::remove(path);
  try {
    LoadCheckpoint(path);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("gwrl_ckpt_test.bin"), std::string::npos);
  }
}

}  // namespace
}  // namespace gwrl::ad
