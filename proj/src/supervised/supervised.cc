#include "gwrl/supervised/supervised.h"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "gwrl/util/parallel.h"
#include "json.hpp"

namespace gwrl::supervised {

std::vector<std::string> TrainConfig::Validate(const std::string& section) const {
  std::vector<std::string> errors;
  if (!(lr >= 0.0) || !std::isfinite(lr)) errors.push_back(section + ".lr must be >= 0");
  if (batch_size < 1) errors.push_back(section + ".batch_size must be >= 1");
  if (epochs < 0) errors.push_back(section + ".epochs must be >= 0");
  if (!(clip_norm >= 0.0)) errors.push_back(section + ".clip_norm must be >= 0");
  if (workers < 1) errors.push_back(section + ".workers must be >= 1");
  return errors;
}

std::string MetricsToJson(const SplitMetrics& m) {
  nlohmann::json j = {{"epoch", m.epoch},
                      {"split", m.split},
                      {"loss", m.loss},
                      {"error_rate", m.error_rate},
                      {"perplexity", m.perplexity},
                      {"lr", m.lr}};
  return j.dump();
}

std::vector<OracleExample> OracleExamples(const std::vector<scenes::GameRecord>& records) {
  std::vector<OracleExample> out;
  for (const auto& r : records) {
    const auto& target = r.game.target();
    const auto spatial = scenes::SpatialFeatures(target.bbox, r.game.width, r.game.height);
    for (const auto& pair : r.dialogue.pairs) {
      out.push_back({pair.question, target.category, spatial, pair.answer});
    }
  }
  return out;
}

std::vector<GuesserExample> GuesserExamples(const std::vector<scenes::GameRecord>& records,
                                            const scenes::Vocabulary& vocab) {
  std::vector<GuesserExample> out;
  for (const auto& r : records) {
    if (!r.success) continue;
    out.push_back({scenes::FlattenDialogue(r.dialogue, vocab),
                   models::ObjectFeaturesOf(r.game), r.game.target_index});
  }
  return out;
}

std::vector<QGenExample> QGenExamples(const std::vector<scenes::GameRecord>& records,
                                      const scenes::Vocabulary& vocab) {
  std::vector<QGenExample> out;
  for (const auto& r : records) {
    const bool stop = r.dialogue.terminated_by_stop && r.success;
    auto seq = models::QGenSequence(r.dialogue, vocab, stop);
    if (seq.NumPredicted() == 0) continue;
    out.push_back({std::move(seq), r.game.scene_features});
  }
  return out;
}

namespace {

struct Tally {
  double loss = 0.0;
  double errors = 0.0;
  double count = 0.0;

  SplitMetrics Finish(const std::string& split) const {
    SplitMetrics m;
    m.split = split;
    m.loss = count > 0 ? loss / count : 0.0;
    m.error_rate = count > 0 ? errors / count : 0.0;
    m.perplexity = std::exp(m.loss);
    return m;
  }
};

void TallyOracle(const models::Oracle& oracle, const OracleExample& e, Tally& t) {
  const auto p = oracle.Forward(e.question, e.category, e.spatial);
  const auto label = static_cast<std::size_t>(e.answer);
  t.loss -= std::log(p[label]);
  t.errors += models::ArgMax(p) != label;
  t.count += 1;
}

void TallyGuesser(const models::Guesser& guesser, const GuesserExample& e, Tally& t) {
  const auto p = guesser.Forward(e.dialogue, e.objects);
  t.loss -= std::log(p[e.target]);
  t.errors += models::ArgMax(p) != e.target;
  t.count += 1;
}

void TallyQGen(const models::QGen& qgen, const QGenExample& e, Tally& t) {
  const auto& seq = e.sequence;
  models::LstmState state = qgen.InitialState();
  std::vector<double> log_probs, probs;
  for (std::size_t k = 0; k + 1 < seq.tokens.size(); ++k) {
    qgen.Advance(seq.tokens[k], e.scene_features, state);
    if (seq.weights[k + 1] == 0.0) continue;
    qgen.Distribution(state, log_probs, probs);
    const TokenId next = seq.tokens[k + 1];
    t.loss -= log_probs[next];
    t.errors += models::ArgMax(probs) != static_cast<std::size_t>(next);
    t.count += 1;
  }
}

template <typename Example, typename TallyFn>
SplitMetrics Evaluate(const std::vector<Example>& examples, TallyFn tally,
                      const std::string& split) {
  Tally t;
  for (const auto& e : examples) tally(e, t);
  return t.Finish(split);
}

/// Loss of one example on a tape plus the number of items it predicts.
template <typename Example>
using LossFn = std::function<std::pair<ad::Var, double>(ad::Tape&, const Example&)>;

template <typename Example>
ad::Gradients BatchGradient(const ad::ParamStore& params, const std::vector<Example>& data,
                            std::span<const std::size_t> batch, const LossFn<Example>& loss,
                            int workers) {
  const std::size_t max_chunks = std::max<std::size_t>(1, workers);
  std::vector<ad::Gradients> partial(max_chunks, ad::Gradients::ZerosLike(params));
  std::vector<double> counts(max_chunks, 0.0);
  const std::size_t n_workers =
      ParallelChunks(batch.size(), workers, [&](std::size_t w, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          ad::Tape tape;
          auto [value, count] = loss(tape, data[batch[i]]);
          tape.Backward(value);
          tape.AccumulateParamGrads(params, partial[w]);
          counts[w] += count;
        }
      });
  ad::Gradients total = std::move(partial[0]);
  double count = counts[0];
  for (std::size_t w = 1; w < n_workers; ++w) {
    total.Add(partial[w]);
    count += counts[w];
  }
  if (count > 0) total.Scale(1.0 / count);
  return total;
}

template <typename Example>
TrainResult Fit(const std::string& name, ad::ParamStore& params,
                const std::vector<Example>& train, const std::vector<Example>& valid,
                const std::vector<Example>& test, const TrainConfig& config,
                const LossFn<Example>& loss,
                const std::function<SplitMetrics(const std::vector<Example>&,
                                                  const std::string&)>& evaluate) {
  if (train.empty()) throw std::invalid_argument(name + ": empty training set");
  TrainResult result;
  Rng rng(ad::MixSeed(config.seed, ad::HashName(name)));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  double lr = config.lr;
  SplitMetrics last_train = evaluate(train, "train");
  ad::ParamStore best = params;
  double best_valid = valid.empty() ? std::numeric_limits<double>::infinity()
                                    : evaluate(valid, "valid").loss;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const ad::ParamStore before = params;
    rng.Shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const auto grads = BatchGradient(params, train,
                                       std::span<const std::size_t>(order).subspan(
                                           start, end - start),
                                       loss, config.workers);
      ad::SgdStep(params, grads, lr, ad::StepDirection::kDescent, config.clip_norm);
    }
    SplitMetrics train_metrics = evaluate(train, "train");
    if (config.halve_on_plateau && train_metrics.loss > last_train.loss) {
      params = before;
      train_metrics = last_train;
      lr *= 0.5;
    }
    train_metrics.epoch = epoch;
    train_metrics.lr = lr;
    train_metrics.split = "train";
    last_train = train_metrics;
    result.rows.push_back(train_metrics);
    if (!valid.empty()) {
      SplitMetrics v = evaluate(valid, "valid");
      v.epoch = epoch;
      v.lr = lr;
      result.rows.push_back(v);
      if (v.loss < best_valid) {
        best_valid = v.loss;
        best = params;
        result.best_epoch = epoch;
      }
    } else {
      best = params;
      result.best_epoch = epoch;
    }
    spdlog::info("{} epoch {}: train loss {:.4f} err {:.4f} lr {:.4g}", name, epoch,
                 train_metrics.loss, train_metrics.error_rate, lr);
  }
  params = best;
  SplitMetrics t = evaluate(test, "test");
  t.epoch = result.best_epoch;
  t.lr = lr;
  result.rows.push_back(t);
  return result;
}

}  // namespace

SplitMetrics EvaluateOracle(const models::Oracle& oracle,
                            const std::vector<OracleExample>& examples) {
  return Evaluate(examples, [&](const OracleExample& e, Tally& t) { TallyOracle(oracle, e, t); },
                  "");
}

SplitMetrics EvaluateGuesser(const models::Guesser& guesser,
                             const std::vector<GuesserExample>& examples) {
  return Evaluate(examples,
                  [&](const GuesserExample& e, Tally& t) { TallyGuesser(guesser, e, t); }, "");
}

SplitMetrics EvaluateQGen(const models::QGen& qgen, const std::vector<QGenExample>& examples) {
  return Evaluate(examples, [&](const QGenExample& e, Tally& t) { TallyQGen(qgen, e, t); },
                  "");
}

TrainResult TrainOracle(models::Oracle& oracle, const scenes::Corpus& corpus,
                        const TrainConfig& config) {
  const auto train = OracleExamples(corpus.train);
  const LossFn<OracleExample> loss = [&](ad::Tape& tape, const OracleExample& e) {
    return std::make_pair(oracle.Loss(tape, e.question, e.category, e.spatial, e.answer),
                          1.0);
  };
  const std::function eval = [&](const std::vector<OracleExample>& ex, const std::string& s) {
    auto m = EvaluateOracle(oracle, ex);
    m.split = s;
    return m;
  };
  return Fit<OracleExample>("oracle", oracle.mutable_params(), train,
                            OracleExamples(corpus.valid), OracleExamples(corpus.test),
                            config, loss, eval);
}

TrainResult TrainGuesser(models::Guesser& guesser, const scenes::Corpus& corpus,
                         const TrainConfig& config) {
  const auto train = GuesserExamples(corpus.train, corpus.vocab);
  const LossFn<GuesserExample> loss = [&](ad::Tape& tape, const GuesserExample& e) {
    return std::make_pair(guesser.Loss(tape, e.dialogue, e.objects, e.target), 1.0);
  };
  const std::function eval = [&](const std::vector<GuesserExample>& ex,
                                 const std::string& s) {
    auto m = EvaluateGuesser(guesser, ex);
    m.split = s;
    return m;
  };
  return Fit<GuesserExample>("guesser", guesser.mutable_params(), train,
                             GuesserExamples(corpus.valid, corpus.vocab),
                             GuesserExamples(corpus.test, corpus.vocab), config, loss, eval);
}

TrainResult PretrainQGen(models::QGen& qgen, const scenes::Corpus& corpus,
                         const TrainConfig& config) {
  const auto train = QGenExamples(corpus.train, corpus.vocab);
  const LossFn<QGenExample> loss = [&](ad::Tape& tape, const QGenExample& e) {
    return std::make_pair(qgen.Nll(tape, e.sequence, e.scene_features),
                          static_cast<double>(e.sequence.NumPredicted()));
  };
  const std::function eval = [&](const std::vector<QGenExample>& ex, const std::string& s) {
    auto m = EvaluateQGen(qgen, ex);
    m.split = s;
    return m;
  };
  return Fit<QGenExample>("qgen", qgen.mutable_params(), train,
                          QGenExamples(corpus.valid, corpus.vocab),
                          QGenExamples(corpus.test, corpus.vocab), config, loss, eval);
}

}  // namespace gwrl::supervised
