#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "gwrl/supervised/supervised.h"

namespace gwrl::supervised {
namespace {

models::ModelSizes Small() {
  models::ModelSizes s;
  s.word_dim = 6;
  s.category_dim = 4;
  s.hidden = 12;
  s.feature_dim = 32;
  s.mlp_hidden = 10;
  return s;
}

scenes::Corpus SmallCorpus(std::size_t n, std::uint64_t seed, scenes::SceneConfig config = {}) {
  return scenes::GenerateCorpus(n, seed, config, scenes::GameLimits{});
}

TrainConfig Quick(int epochs) {
  TrainConfig c;
  c.epochs = epochs;
  return c;
}

bool SameParams(const ad::ParamStore& a, const ad::ParamStore& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.name(i) != b.name(i) || !std::ranges::equal(a.value(i).values(), b.value(i).values())) return false;
  }
  return true;
}

TEST(SupervisedTest, AllYesOracleReachesZeroErrorInTwoEpochs) {
  auto corpus = SmallCorpus(200, 1);
  for (auto* split : {&corpus.train, &corpus.valid, &corpus.test}) {
    for (auto& r : *split) {
      for (auto& p : r.dialogue.pairs) p.answer = scenes::Answer::kYes;
    }
  }
  models::Oracle oracle(corpus.vocab.size(), 5, Small(), 3);
  const auto result = TrainOracle(oracle, corpus, Quick(2));
  EXPECT_EQ(EvaluateOracle(oracle, OracleExamples(corpus.train)).error_rate, 0.0);
  EXPECT_EQ(result.rows.back().split, "test");
  EXPECT_EQ(result.rows.back().error_rate, 0.0);
}

TEST(SupervisedTest, OneSmallStepLowersBatchLoss) {
  auto corpus = SmallCorpus(40, 2);
  corpus.valid.clear();
  const auto examples = OracleExamples(corpus.train);
  models::Oracle oracle(corpus.vocab.size(), 5, Small(), 4);
  const double before = EvaluateOracle(oracle, examples).loss;
  TrainConfig c = Quick(1);
  c.lr = 1e-2;
  c.batch_size = static_cast<int>(examples.size());
  c.halve_on_plateau = false;
  c.clip_norm = 0.0;
  TrainOracle(oracle, corpus, c);
  // With an empty valid split the kept parameters are the trained ones.
  EXPECT_LT(EvaluateOracle(oracle, examples).loss, before);
}

TEST(SupervisedTest, SameSeedSameResult) {
  const auto corpus = SmallCorpus(80, 3);
  auto run = [&](std::uint64_t seed) {
    models::Guesser g(corpus.vocab.size(), 5, Small(), 5);
    TrainConfig c = Quick(2);
    c.seed = seed;
    auto result = TrainGuesser(g, corpus, c);
    return std::make_pair(result, g.params());
  };
  const auto [r1, p1] = run(7);
  const auto [r2, p2] = run(7);
  ASSERT_EQ(r1.rows.size(), r2.rows.size());
  for (std::size_t i = 0; i < r1.rows.size(); ++i) {
    EXPECT_EQ(MetricsToJson(r1.rows[i]), MetricsToJson(r2.rows[i]));
  }
  EXPECT_TRUE(SameParams(p1, p2));
  const auto [r3, p3] = run(8);
  EXPECT_FALSE(SameParams(p1, p3));
}

TEST(SupervisedTest, WorkerCountIsDeterministicPerSetting) {
  const auto corpus = SmallCorpus(60, 4);
  auto run = [&] {
    models::QGen q(corpus.vocab.size(), Small(), 6, corpus.vocab.PolicyMask());
    TrainConfig c = Quick(1);
    c.workers = 3;
    PretrainQGen(q, corpus, c);
    return q.params();
  };
  EXPECT_TRUE(SameParams(run(), run()));
}

TEST(SupervisedTest, SingleObjectScenesGiveZeroGuesserError) {
  scenes::SceneConfig config;
  config.min_objects = 1;
  config.max_objects = 1;
  const auto corpus = SmallCorpus(50, 5, config);
  models::Guesser g(corpus.vocab.size(), 5, Small(), 7);
  const auto result = TrainGuesser(g, corpus, Quick(1));
  for (const auto& row : result.rows) EXPECT_EQ(row.error_rate, 0.0) << row.split;
}

// Two objects of different categories and one question naming the first
// object's category: the answer alone identifies the target.
TEST(SupervisedTest, SeparableTwoObjectCaseIsLearned) {
  const auto vocab = scenes::Vocabulary::ForCategories(5);
  Rng rng(9);
  auto make = [&](std::size_t n) {
    std::vector<scenes::GameRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
      scenes::GameRecord r;
      r.game.scene_id = i;
      r.game.width = 640;
      r.game.height = 480;
      const int a = static_cast<int>(rng.UniformInt(1, 5));
      int b = static_cast<int>(rng.UniformInt(1, 4));
      if (b >= a) ++b;
      r.game.objects = {{a, {10, 10, 200, 200}}, {b, {300, 200, 600, 460}}};
      r.game.target_index = rng.Index(2);
      r.game.scene_features = scenes::SceneFeatures(r.game.objects, 640, 480, 5, 32);
      scenes::QuestionTemplate q{scenes::QuestionTemplate::Kind::kCategory, a, 0};
      const auto question = scenes::RenderTemplate(q, vocab);
      r.dialogue.pairs.push_back(
          {question, scenes::ExactAnswer(question, r.game.target(), 640, 480, vocab)});
      r.success = true;
      out.push_back(std::move(r));
    }
    return out;
  };
  scenes::Corpus corpus{vocab, make(400), make(100), make(100)};
  models::Guesser g(vocab.size(), 5, Small(), 8);
  TrainConfig c = Quick(15);
  c.lr = 0.5;
  TrainGuesser(g, corpus, c);
  EXPECT_EQ(EvaluateGuesser(g, GuesserExamples(corpus.train, vocab)).error_rate, 0.0);
  EXPECT_EQ(EvaluateGuesser(g, GuesserExamples(corpus.test, vocab)).error_rate, 0.0);
}

TEST(SupervisedTest, RepeatedDialogueIsMemorised) {
  auto corpus = SmallCorpus(10, 6);
  const auto one = corpus.train.front();
  corpus.train.assign(64, one);
  corpus.valid.assign(1, one);
  corpus.test.assign(1, one);
  models::QGen q(corpus.vocab.size(), Small(), 9, corpus.vocab.PolicyMask());
  TrainConfig c = Quick(40);
  c.lr = 1.0;
  const auto result = PretrainQGen(q, corpus, c);
  EXPECT_LT(result.rows.back().perplexity, 1.05);
}

TEST(SupervisedTest, OneEpochBeatsUniformPerplexity) {
  const auto corpus = SmallCorpus(300, 7);
  models::QGen q(corpus.vocab.size(), Small(), 10, corpus.vocab.PolicyMask());
  const auto result = PretrainQGen(q, corpus, Quick(1));
  const auto& valid = result.rows[1];
  ASSERT_EQ(valid.split, "valid");
  EXPECT_LE(valid.perplexity, static_cast<double>(corpus.vocab.size()));
  EXPECT_NEAR(valid.perplexity, std::exp(valid.loss), 1e-12);
}

TEST(SupervisedTest, ReportedTrainLossNeverRises) {
  const auto corpus = SmallCorpus(120, 8);
  models::Oracle oracle(corpus.vocab.size(), 5, Small(), 11);
  TrainConfig c = Quick(6);
  c.lr = 4.0;  // large enough to overshoot now and then
  const auto result = TrainOracle(oracle, corpus, c);
  double last = INFINITY;
  double last_lr = c.lr;
  for (const auto& row : result.rows) {
    if (row.split != "train") continue;
    EXPECT_LE(row.loss, last);
    EXPECT_LE(row.lr, last_lr);
    last = row.loss;
    last_lr = row.lr;
  }
}

TEST(SupervisedTest, EmptyTrainingSetThrows) {
  auto corpus = SmallCorpus(10, 9);
  corpus.train.clear();
  models::Oracle oracle(corpus.vocab.size(), 5, Small(), 1);
  models::Guesser guesser(corpus.vocab.size(), 5, Small(), 1);
  models::QGen qgen(corpus.vocab.size(), Small(), 1, corpus.vocab.PolicyMask());
  EXPECT_THROW(TrainOracle(oracle, corpus, Quick(1)), std::invalid_argument);
  EXPECT_THROW(TrainGuesser(guesser, corpus, Quick(1)), std::invalid_argument);
  EXPECT_THROW(PretrainQGen(qgen, corpus, Quick(1)), std::invalid_argument);
}

TEST(SupervisedTest, ExampleBuilders) {
  const auto corpus = SmallCorpus(100, 10);
  std::size_t questions = 0, successes = 0;
  for (const auto& r : corpus.train) {
    questions += r.dialogue.pairs.size();
    successes += r.success;
  }
  EXPECT_EQ(OracleExamples(corpus.train).size(), questions);
  EXPECT_EQ(GuesserExamples(corpus.train, corpus.vocab).size(), successes);
  for (const auto& e : QGenExamples(corpus.train, corpus.vocab)) {
    EXPECT_EQ(e.sequence.tokens.front(), corpus.vocab.start());
  }
}

TEST(SupervisedTest, ConfigValidationListsEveryProblem) {
  TrainConfig c;
  c.lr = -1;
  c.batch_size = 0;
  c.workers = 0;
  const auto errors = c.Validate("supervised");
  ASSERT_EQ(errors.size(), 3u);
  EXPECT_EQ(errors[0], "supervised.lr must be >= 0");
}

TEST(SupervisedTest, MetricsJsonHasAllFields) {
  SplitMetrics m{3, "valid", 0.5, 0.25, std::exp(0.5), 0.1};
  const std::string line = MetricsToJson(m);
  for (const char* key : {"epoch", "split", "loss", "error_rate", "perplexity", "lr"}) {
    EXPECT_NE(line.find(std::string("\"") + key + "\""), std::string::npos) << key;
  }
}

}  // namespace
}  // namespace gwrl::supervised
