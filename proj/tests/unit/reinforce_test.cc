#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "gwrl/reinforce/reinforce.h"
#include "support/tiny_mdp.h"

namespace gwrl::reinforce {
namespace {

using gwrl::testing::TinyMdp;

mdp::Trajectory FakeTrajectory(std::size_t steps, double reward, std::size_t hidden,
                               Rng& rng) {
  mdp::Trajectory t;
  for (std::size_t i = 0; i < steps; ++i) {
    mdp::TrajectoryStep s;
    for (std::size_t k = 0; k < hidden; ++k) s.hidden.push_back(rng.Uniform(-1, 1));
    t.steps.push_back(s);
  }
  t.reward = reward;
  if (!t.steps.empty()) t.steps.back().reward = reward;
  return t;
}

TEST(ReturnsTest, UndiscountedTerminalReward) {
  Rng rng(1);
  const auto t = FakeTrajectory(4, 1.0, 2, rng);
  EXPECT_EQ(Returns(t, 1.0), std::vector<double>(4, 1.0));
}

TEST(ReturnsTest, DiscountedGeometric) {
  Rng rng(1);
  const auto g = Returns(FakeTrajectory(3, 1.0, 2, rng), 0.9);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_NEAR(g[0], 0.81, 1e-15);
  EXPECT_NEAR(g[1], 0.9, 1e-15);
  EXPECT_EQ(g[2], 1.0);
}

TEST(ReturnsTest, ZeroReward) {
  Rng rng(1);
  EXPECT_EQ(Returns(FakeTrajectory(5, 0.0, 2, rng), 0.7), std::vector<double>(5, 0.0));
  EXPECT_TRUE(Returns(FakeTrajectory(0, 0.0, 2, rng), 1.0).empty());
}

TEST(BaselineTest, ZeroParametersPredictZero) {
  BaselineNet b(4, 3, 1);
  b.mutable_params().FillAll(0.0);
  EXPECT_EQ(b.Predict(std::vector<double>{1, 2, 3, 4}), 0.0);
}

TEST(BaselineTest, MatchesHandRolledMlp) {
  BaselineNet b(3, 2, 7);
  const std::vector<double> x{0.3, -0.7, 1.1};
  const auto& p = b.params();
  const auto& w1 = p.Get("baseline.W1");
  const auto& b1 = p.Get("baseline.b1");
  const auto& w2 = p.Get("baseline.W2");
  const auto& b2 = p.Get("baseline.b2");
  double y = b2[0];
  for (std::size_t j = 0; j < 2; ++j) {
    double a = b1[j];
    for (std::size_t i = 0; i < 3; ++i) a += x[i] * w1[i * 2 + j];
    y += std::tanh(a) * w2[j];
  }
  EXPECT_NEAR(b.Predict(x), y, 1e-12);
  EXPECT_EQ(b.Predict(x), b.Predict(x));
  ad::Tape tape;
  EXPECT_NEAR(b.Predict(tape, x).item(), y, 1e-12);
}

TEST(BaselineTest, DimensionMismatchThrows) {
  BaselineNet b(4, 3, 1);
  EXPECT_THROW(b.Predict(std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(BaselineLossTest, TrivialCases) {
  Rng rng(2);
  BaselineNet b(3, 2, 1);
  b.mutable_params().FillAll(0.0);
  std::vector<mdp::Trajectory> zeros{FakeTrajectory(3, 0.0, 3, rng),
                                     FakeTrajectory(2, 0.0, 3, rng)};
  std::vector<mdp::Trajectory> ones{FakeTrajectory(3, 1.0, 3, rng),
                                    FakeTrajectory(5, 1.0, 3, rng)};
  EXPECT_EQ(BaselineLossValue(b, zeros, 1.0), 0.0);
  EXPECT_EQ(BaselineLossValue(b, ones, 1.0), 1.0);
}

TEST(BaselineLossTest, MatchesTwoLoopMse) {
  Rng rng(3);
  BaselineNet b(4, 3, 5);
  std::vector<mdp::Trajectory> batch;
  for (int i = 0; i < 6; ++i) {
    batch.push_back(FakeTrajectory(rng.UniformInt(1, 5), rng.UniformInt(0, 1), 4, rng));
  }
  const double gamma = 0.8;
  double sum = 0.0;
  int count = 0;
  for (const auto& t : batch) {
    const std::size_t T = t.steps.size();
    for (std::size_t s = 0; s < T; ++s) {
      const double target = std::pow(gamma, static_cast<double>(T - 1 - s)) * t.reward;
      const double d = b.Predict(t.steps[s].hidden) - target;
      sum += d * d;
      ++count;
    }
  }
  EXPECT_NEAR(BaselineLossValue(b, batch, gamma), sum / count, 1e-12);
  ad::Tape tape;
  EXPECT_NEAR(BaselineLoss(tape, b, batch, gamma).item(), sum / count, 1e-12);
}

TEST(BaselineLossTest, GradientTouchesBaselineOnlyAndMatchesFiniteDifferences) {
  Rng rng(4);
  BaselineNet b(4, 3, 6);
  std::vector<mdp::Trajectory> batch{FakeTrajectory(3, 1.0, 4, rng),
                                     FakeTrajectory(2, 0.0, 4, rng)};
  const auto grads = BaselineGradient(b, batch, 0.9);
  for (const auto& [name, g] : grads.entries()) EXPECT_EQ(name.rfind("baseline.", 0), 0u);
  for (std::size_t i = 0; i < b.params().size(); ++i) {
    const std::string name = b.params().name(i);
    for (std::size_t k = 0; k < b.params().value(i).size(); ++k) {
      double& v = b.mutable_params().mutable_value(i)[k];
      const double saved = v;
      v = saved + 1e-5;
      const double up = BaselineLossValue(b, batch, 0.9);
      v = saved - 1e-5;
      const double down = BaselineLossValue(b, batch, 0.9);
      v = saved;
      const double fd = (up - down) / 2e-5;
      const double an = grads.Get(name)[k];
      EXPECT_NEAR(an, fd, std::max(1e-7, 1e-4 * std::abs(fd))) << name << "[" << k << "]";
    }
  }
}

TEST(PolicyGradientTest, EmptyBatchThrows) {
  TinyMdp mdp(1);
  EXPECT_THROW(PolicyGradient(mdp.qgen(), nullptr, {}, 1.0), std::invalid_argument);
}

TEST(PolicyGradientTest, ZeroAdvantageGivesExactlyZero) {
  TinyMdp mdp(1);
  BaselineNet b(mdp.qgen().hidden_dim(), 3, 1);
  b.mutable_params().FillAll(0.0);
  b.mutable_params().mutable_value(b.params().IndexOf("baseline.b2"))[0] = 1.0;
  std::vector<mdp::Trajectory> winners;
  for (const auto& t : mdp.Enumerate()) {
    if (t.reward == 1.0) winners.push_back(t);
  }
  ASSERT_FALSE(winners.empty());
  const auto flat = mdp.Flatten(PolicyGradient(mdp.qgen(), &b, winners, 1.0));
  for (double v : flat) EXPECT_EQ(v, 0.0);
}

// With reward 1 and no baseline the estimate is the gradient of the summed
// log-probabilities, checked here against finite differences of the
// inference path.
TEST(PolicyGradientTest, SingleWinningTrajectoryIsScoreFunction) {
  TinyMdp mdp(2);
  mdp::Trajectory winner;
  std::vector<scenes::TokenId> actions;
  for (const auto& t : mdp.Enumerate()) {
    if (t.reward == 1.0 && t.length() == 2) {
      winner = t;
      for (const auto& s : t.steps) actions.push_back(s.action);
      break;
    }
  }
  ASSERT_FALSE(actions.empty());
  const auto analytic = mdp.Flatten(
      PolicyGradient(mdp.qgen(), nullptr, std::span<const mdp::Trajectory>(&winner, 1), 1.0));
  auto log_prob = [&] {
    double lp = 0.0;
    for (const auto& s : mdp.Play(actions).steps) lp += s.log_prob;
    return lp;
  };
  std::size_t idx = 0;
  auto& params = mdp.qgen().mutable_params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t k = 0; k < params.value(i).size(); ++k, ++idx) {
      double& v = params.mutable_value(i)[k];
      const double saved = v;
      v = saved + 1e-5;
      const double up = log_prob();
      v = saved - 1e-5;
      const double down = log_prob();
      v = saved;
      const double fd = (up - down) / 2e-5;
      EXPECT_NEAR(analytic[idx], fd, std::max(1e-7, 1e-4 * std::abs(fd)))
          << params.name(i) << "[" << k << "]";
    }
  }
}

std::vector<double> ExpectedEstimate(TinyMdp& mdp,
                                     const std::function<std::vector<double>(
                                         const mdp::Trajectory&)>& weights) {
  std::vector<double> total;
  for (const auto& t : mdp.Enumerate()) {
    double lp = 0.0;
    for (const auto& s : t.steps) lp += s.log_prob;
    const std::vector<std::vector<double>> w{weights(t)};
    const auto g = mdp.Flatten(WeightedLogLikelihoodGradient(
        mdp.qgen(), std::span<const mdp::Trajectory>(&t, 1), w));
    if (total.empty()) total.assign(g.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) total[k] += std::exp(lp) * g[k];
  }
  return total;
}

// The estimator's exact expectation, summed over every trajectory, equals the
// finite-difference gradient of the enumerated expected reward, for several
// baselines that do not look at the action.
TEST(PolicyGradientTest, ExactExpectationIsTrueGradient) {
  TinyMdp mdp(3);
  const auto exact = mdp.ExactGradient();
  BaselineNet net(mdp.qgen().hidden_dim(), 3, 11);
  const std::vector<std::function<std::vector<double>(const mdp::Trajectory&)>> baselines{
      [](const mdp::Trajectory& t) { return Returns(t, 1.0); },
      [](const mdp::Trajectory& t) {
        auto g = Returns(t, 1.0);
        for (double& v : g) v -= 0.3;
        return g;
      },
      [](const mdp::Trajectory& t) {
        auto g = Returns(t, 1.0);
        for (double& v : g) v -= 0.9;
        return g;
      },
      [&](const mdp::Trajectory& t) { return Advantages(t, &net, 1.0); },
  };
  double largest = 0.0;
  for (double v : exact) largest = std::max(largest, std::abs(v));
  ASSERT_GT(largest, 1e-4);
  for (std::size_t b = 0; b < baselines.size(); ++b) {
    const auto expected = ExpectedEstimate(mdp, baselines[b]);
    ASSERT_EQ(expected.size(), exact.size());
    for (std::size_t k = 0; k < exact.size(); ++k) {
      EXPECT_NEAR(expected[k], exact[k], std::max(1e-8, 1e-5 * std::abs(exact[k])))
          << "baseline " << b << " coordinate " << k;
    }
  }
}

TEST(PolicyGradientTest, SampledMeanApproachesExpectation) {
  TinyMdp mdp(4);
  const auto exact = mdp.ExactGradient();
  Rng rng(5);
  const int n = 20000;
  std::vector<double> sum(exact.size(), 0.0), sq(exact.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    const auto t = mdp.Sample(rng);
    const auto g = mdp.Flatten(
        PolicyGradient(mdp.qgen(), nullptr, std::span<const mdp::Trajectory>(&t, 1), 1.0));
    for (std::size_t k = 0; k < g.size(); ++k) {
      sum[k] += g[k];
      sq[k] += g[k] * g[k];
    }
  }
  // Loose 5 standard errors here; the acceptance run uses 200k samples and 3.
  for (std::size_t k = 0; k < exact.size(); ++k) {
    const double mean = sum[k] / n;
    const double se = std::sqrt(std::max(0.0, sq[k] / n - mean * mean) / n);
    EXPECT_LE(std::abs(mean - exact[k]), 5 * se + 1e-12) << k;
  }
}

class EpochTest : public ::testing::Test {
 protected:
  EpochTest()
      : vocab_(scenes::Vocabulary::ForCategories(5)),
        qgen_(vocab_.size(), Sizes(), 1, vocab_.PolicyMask()),
        oracle_(vocab_.size(), 5, Sizes(), 2),
        guesser_(vocab_.size(), 5, Sizes(), 3),
        baseline_(Sizes().hidden, Sizes().baseline_hidden, 4) {
    Rng rng(5);
    for (int i = 0; i < 24; ++i) scenes_.push_back(scenes::GenerateScene(rng, {}, i));
    config_.batch_size = 8;
    config_.lr_policy = 0.05;
    config_.lr_baseline = 0.05;
  }

  static models::ModelSizes Sizes() {
    models::ModelSizes s;
    s.word_dim = 4;
    s.category_dim = 3;
    s.hidden = 6;
    s.mlp_hidden = 5;
    s.baseline_hidden = 4;
    return s;
  }

  scenes::Vocabulary vocab_;
  models::QGen qgen_;
  models::Oracle oracle_;
  models::Guesser guesser_;
  BaselineNet baseline_;
  std::vector<scenes::Game> scenes_;
  RLConfig config_;
};

bool Same(const ad::ParamStore& a, const ad::ParamStore& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::ranges::equal(a.value(i).values(), b.value(i).values())) return false;
  }
  return a.size() == b.size();
}

TEST_F(EpochTest, ZeroPolicyRateLeavesGeneratorUnchanged) {
  const auto before = qgen_.params();
  config_.lr_policy = 0.0;
  Rng rng(1);
  ReinforceEpoch(qgen_, baseline_, oracle_, guesser_, scenes_, config_, vocab_, rng, 1);
  EXPECT_TRUE(Same(before, qgen_.params()));
}

TEST_F(EpochTest, OnlyGeneratorAndBaselineChange) {
  const auto q0 = qgen_.params();
  const auto o0 = oracle_.params();
  const auto g0 = guesser_.params();
  const auto b0 = baseline_.params();
  Rng rng(1);
  for (int e = 1; e <= 2; ++e) {
    ReinforceEpoch(qgen_, baseline_, oracle_, guesser_, scenes_, config_, vocab_, rng, e);
  }
  EXPECT_TRUE(Same(o0, oracle_.params()));
  EXPECT_TRUE(Same(g0, guesser_.params()));
  EXPECT_FALSE(Same(q0, qgen_.params()));
  EXPECT_FALSE(Same(b0, baseline_.params()));
}

TEST_F(EpochTest, SameSeedSameCheckpoints) {
  auto run = [&](int workers) {
    models::QGen q = qgen_;
    BaselineNet b = baseline_;
    RLConfig c = config_;
    c.workers = workers;
    Rng rng(9);
    const auto m = ReinforceEpoch(q, b, oracle_, guesser_, scenes_, c, vocab_, rng, 1);
    return std::make_tuple(q.params(), b.params(), MetricsToJson(m));
  };
  const auto [q1, b1, m1] = run(1);
  const auto [q2, b2, m2] = run(1);
  EXPECT_TRUE(Same(q1, q2));
  EXPECT_TRUE(Same(b1, b2));
  EXPECT_EQ(m1, m2);
  const auto [q3, b3, m3] = run(3);
  const auto [q4, b4, m4] = run(3);
  EXPECT_TRUE(Same(q3, q4));
  EXPECT_EQ(m3, m4);
}

TEST_F(EpochTest, RolloutsDoNotDependOnWorkerCount) {
  const mdp::Environment env{&vocab_, config_.limits()};
  const auto a = RolloutBatch(qgen_, oracle_, guesser_, scenes_, {}, 17, env, 1);
  const auto b = RolloutBatch(qgen_, oracle_, guesser_, scenes_, {}, 17, env, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].stream, b[i].stream);
}

TEST_F(EpochTest, MetricsAreConsistent) {
  Rng rng(2);
  const auto m = ReinforceEpoch(qgen_, baseline_, oracle_, guesser_, scenes_, config_, vocab_,
                                rng, 4);
  EXPECT_EQ(m.epoch, 4);
  EXPECT_GE(m.success_rate, 0.0);
  EXPECT_LE(m.success_rate, 1.0);
  EXPECT_LE(m.mean_questions, config_.max_questions);
  EXPECT_GE(m.mean_dialogue_len, m.mean_questions);
  EXPECT_GE(m.baseline_mse, 0.0);
  const std::string line = MetricsToJson(m);
  for (const char* key : {"epoch", "success_rate", "mean_dialogue_len", "mean_questions",
                          "baseline_mse", "stop_token_fraction"}) {
    EXPECT_NE(line.find(std::string("\"") + key + "\""), std::string::npos) << key;
  }
}

TEST(RLConfigTest, ValidationListsEveryProblem) {
  RLConfig c;
  EXPECT_TRUE(c.Validate("rl").empty());
  c.gamma = 1.5;
  c.batch_size = 0;
  c.lr_policy = -1;
  EXPECT_EQ(c.Validate("rl").size(), 3u);
}

}  // namespace
}  // namespace gwrl::reinforce
