#include "gwrl/reinforce/reinforce.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gwrl/util/parallel.h"
#include "json.hpp"

namespace gwrl::reinforce {

std::vector<std::string> RLConfig::Validate(const std::string& section) const {
  std::vector<std::string> errors;
  auto positive = [&](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) errors.push_back(section + "." + key + " must be > 0");
  };
  positive(lr_policy, "lr_policy");
  positive(lr_baseline, "lr_baseline");
  positive(batch_size, "batch_size");
  positive(epochs, "epochs");
  positive(max_questions, "max_questions");
  positive(max_words, "max_words");
  positive(workers, "workers");
  if (!(gamma >= 0.0 && gamma <= 1.0)) errors.push_back(section + ".gamma must be in [0, 1]");
  return errors;
}

std::vector<double> Returns(const mdp::Trajectory& trajectory, double gamma) {
  const auto& steps = trajectory.steps;
  std::vector<double> g(steps.size(), 0.0);
  double running = 0.0;
  for (std::size_t t = steps.size(); t-- > 0;) {
    running = steps[t].reward + gamma * running;
    g[t] = running;
  }
  return g;
}

BaselineNet::BaselineNet(std::size_t input_dim, std::size_t hidden, std::uint64_t seed)
    : params_(seed), mlp_(params_, "baseline", input_dim, hidden, 1) {}

void BaselineNet::CheckInput(std::span<const double> hidden_state) const {
  if (hidden_state.size() != mlp_.input_dim()) {
    throw std::invalid_argument("baseline expects a " + std::to_string(mlp_.input_dim()) +
                                "-dim hidden state, got " +
                                std::to_string(hidden_state.size()));
  }
}

double BaselineNet::Predict(std::span<const double> hidden_state) const {
  CheckInput(hidden_state);
  return mlp_.Forward(params_, hidden_state)[0];
}

ad::Var BaselineNet::Predict(ad::Tape& tape, std::span<const double> hidden_state) const {
  CheckInput(hidden_state);
  const ad::Var x = tape.Constant(
      ad::Tensor::Vector(std::vector<double>(hidden_state.begin(), hidden_state.end())));
  return ad::Sum(mlp_.Forward(tape, params_, x));
}

ad::Var BaselineLoss(ad::Tape& tape, const BaselineNet& baseline,
                     std::span<const mdp::Trajectory> batch, double gamma) {
  ad::Var total;
  std::size_t count = 0;
  for (const auto& traj : batch) {
    const auto g = Returns(traj, gamma);
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
      const ad::Var diff = ad::Sub(baseline.Predict(tape, traj.steps[t].hidden),
                                   tape.Constant(ad::Tensor::Scalar(g[t])));
      const ad::Var sq = ad::Mul(diff, diff);
      total = total.valid() ? ad::Add(total, sq) : sq;
      ++count;
    }
  }
  if (count == 0) return tape.Constant(ad::Tensor::Scalar(0.0));
  return ad::Scale(total, 1.0 / static_cast<double>(count));
}

double BaselineLossValue(const BaselineNet& baseline, std::span<const mdp::Trajectory> batch,
                         double gamma) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& traj : batch) {
    const auto g = Returns(traj, gamma);
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
      const double d = baseline.Predict(traj.steps[t].hidden) - g[t];
      total += d * d;
      ++count;
    }
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

ad::Gradients BaselineGradient(const BaselineNet& baseline,
                               std::span<const mdp::Trajectory> batch, double gamma) {
  ad::Gradients grads = ad::Gradients::ZerosLike(baseline.params());
  ad::Tape tape;
  const ad::Var loss = BaselineLoss(tape, baseline, batch, gamma);
  tape.Backward(loss);
  tape.AccumulateParamGrads(baseline.params(), grads);
  return grads;
}

double ClippedBaseline(const BaselineNet& baseline, std::span<const double> hidden_state) {
  return std::clamp(baseline.Predict(hidden_state), 0.0, 1.0);
}

std::vector<double> Advantages(const mdp::Trajectory& trajectory, const BaselineNet* baseline,
                               double gamma) {
  auto adv = Returns(trajectory, gamma);
  if (baseline) {
    for (std::size_t t = 0; t < adv.size(); ++t) {
      adv[t] -= ClippedBaseline(*baseline, trajectory.steps[t].hidden);
    }
  }
  return adv;
}

ad::Gradients WeightedLogLikelihoodGradient(const models::QGen& qgen,
                                            std::span<const mdp::Trajectory> batch,
                                            std::span<const std::vector<double>> weights,
                                            int workers) {
  if (batch.empty()) throw std::invalid_argument("policy gradient of an empty batch");
  if (weights.size() != batch.size()) {
    throw std::invalid_argument("one weight vector per trajectory required");
  }
  const ad::ParamStore& params = qgen.params();
  std::vector<ad::Gradients> partial(std::max(workers, 1), ad::Gradients::ZerosLike(params));
  const std::size_t chunks =
      ParallelChunks(batch.size(), workers, [&](std::size_t w, std::size_t lo, std::size_t hi) {
        for (std::size_t n = lo; n < hi; ++n) {
          const auto& traj = batch[n];
          if (traj.steps.empty()) continue;
          const bool all_zero = std::all_of(weights[n].begin(), weights[n].end(),
                                            [](double v) { return v == 0.0; });
          if (all_zero) continue;
          ad::Tape tape;
          const ad::Var ll =
              qgen.LogLikelihood(tape, traj.Replay(weights[n]), traj.scene_features);
          tape.Backward(ll);
          tape.AccumulateParamGrads(params, partial[w]);
        }
      });
  ad::Gradients total = std::move(partial[0]);
  for (std::size_t w = 1; w < chunks; ++w) total.Add(partial[w]);
  total.Scale(1.0 / static_cast<double>(batch.size()));
  return total;
}

ad::Gradients PolicyGradient(const models::QGen& qgen, const BaselineNet* baseline,
                             std::span<const mdp::Trajectory> batch, double gamma,
                             int workers) {
  if (batch.empty()) throw std::invalid_argument("policy gradient of an empty batch");
  std::vector<std::vector<double>> weights;
  weights.reserve(batch.size());
  for (const auto& traj : batch) weights.push_back(Advantages(traj, baseline, gamma));
  return WeightedLogLikelihoodGradient(qgen, batch, weights, workers);
}

std::string MetricsToJson(const EpochMetrics& m) {
  const nlohmann::json j = {{"epoch", m.epoch},
                            {"success_rate", m.success_rate},
                            {"mean_dialogue_len", m.mean_dialogue_len},
                            {"mean_questions", m.mean_questions},
                            {"baseline_mse", m.baseline_mse},
                            {"stop_token_fraction", m.stop_token_fraction}};
  return j.dump();
}

std::vector<mdp::Trajectory> RolloutBatch(const models::QGen& qgen,
                                          const models::Oracle& oracle,
                                          const models::Guesser& guesser,
                                          std::span<const scenes::Game> games,
                                          const mdp::RolloutOptions& options,
                                          std::uint64_t seed, const mdp::Environment& env,
                                          int workers) {
  std::vector<mdp::Trajectory> out(games.size());
  ParallelChunks(games.size(), workers, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Rng rng(ad::MixSeed(seed, i));
      out[i] = mdp::Rollout(qgen, oracle, guesser, games[i], options, rng, env);
    }
  });
  return out;
}

EpochMetrics ReinforceEpoch(models::QGen& qgen, BaselineNet& baseline,
                            const models::Oracle& oracle, const models::Guesser& guesser,
                            const std::vector<scenes::Game>& scenes, const RLConfig& config,
                            const scenes::Vocabulary& vocab, Rng& rng, int epoch) {
  EpochMetrics m;
  m.epoch = epoch;
  if (scenes.empty()) return m;

  std::vector<std::size_t> order(scenes.size());
  std::iota(order.begin(), order.end(), 0);
  rng.Shuffle(order.begin(), order.end());
  std::vector<scenes::Game> games;
  games.reserve(scenes.size());
  for (std::size_t i : order) {
    scenes::Game g = scenes[i];
    g.target_index = rng.Index(g.objects.size());
    games.push_back(std::move(g));
  }

  const mdp::Environment env{&vocab, config.limits()};
  const mdp::RolloutOptions options;  // sampling
  double successes = 0, actions = 0, questions = 0, stops = 0, mse_sum = 0;
  std::size_t batches = 0;
  const std::size_t k = static_cast<std::size_t>(config.batch_size);
  for (std::size_t start = 0; start < games.size(); start += k) {
    const std::size_t end = std::min(games.size(), start + k);
    const std::uint64_t batch_seed = rng.NextU64();
    const auto batch = RolloutBatch(qgen, oracle, guesser,
                                    std::span<const scenes::Game>(games).subspan(start, end - start),
                                    options, batch_seed, env, config.workers);
    for (const auto& t : batch) {
      successes += t.reward;
      actions += static_cast<double>(t.length());
      questions += static_cast<double>(t.dialogue.pairs.size());
      stops += t.dialogue.terminated_by_stop ? 1.0 : 0.0;
    }
    // Both gradients see the baseline as it was when the batch was drawn.
    const auto policy_grad = PolicyGradient(qgen, &baseline, batch, config.gamma, config.workers);
    mse_sum += BaselineLossValue(baseline, batch, config.gamma);
    const auto baseline_grad = BaselineGradient(baseline, batch, config.gamma);
    ad::SgdStep(qgen.mutable_params(), policy_grad, config.lr_policy, ad::StepDirection::kAscent);
    ad::SgdStep(baseline.mutable_params(), baseline_grad, config.lr_baseline,
                ad::StepDirection::kDescent);
    ++batches;
  }
  const double n = static_cast<double>(games.size());
  m.success_rate = successes / n;
  m.mean_dialogue_len = actions / n;
  m.mean_questions = questions / n;
  m.stop_token_fraction = stops / n;
  m.baseline_mse = mse_sum / static_cast<double>(batches);
  return m;
}

}  // namespace gwrl::reinforce
