#ifndef GWRL_REINFORCE_REINFORCE_H_
#define GWRL_REINFORCE_REINFORCE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gwrl/autodiff/param_store.h"
#include "gwrl/autodiff/tape.h"
#include "gwrl/mdp/mdp.h"
#include "gwrl/models/layers.h"
#include "gwrl/scenes/scene.h"

namespace gwrl::reinforce {

struct RLConfig {
  double lr_policy = 0.001;
  double lr_baseline = 0.001;
  int batch_size = 64;
  int epochs = 80;
  double gamma = 1.0;
  int max_questions = 8;
  int max_words = 12;
  std::uint64_t seed = 1;
  int workers = 1;

  std::vector<std::string> Validate(const std::string& section) const;
  scenes::GameLimits limits() const { return {max_questions, max_words}; }
};

/// G[t] = sum over t' >= t of gamma^(t'-t) r[t'].
std::vector<double> Returns(const mdp::Trajectory& trajectory, double gamma);

/// Value estimate from the generator's hidden state: H -> hidden -> 1.
class BaselineNet {
 public:
  BaselineNet(std::size_t input_dim, std::size_t hidden, std::uint64_t seed);

  /// Throws std::invalid_argument on a dimension mismatch.
  double Predict(std::span<const double> hidden_state) const;
  ad::Var Predict(ad::Tape& tape, std::span<const double> hidden_state) const;

  const ad::ParamStore& params() const { return params_; }
  ad::ParamStore& mutable_params() { return params_; }
  std::size_t input_dim() const { return mlp_.input_dim(); }

 private:
  void CheckInput(std::span<const double> hidden_state) const;

  ad::ParamStore params_;
  models::Mlp mlp_;
};

/// Mean over every step of every trajectory of (b(h_t) - G_t)^2. Hidden
/// states enter as constants, so only the baseline receives gradient.
ad::Var BaselineLoss(ad::Tape& tape, const BaselineNet& baseline,
                     std::span<const mdp::Trajectory> batch, double gamma);
double BaselineLossValue(const BaselineNet& baseline, std::span<const mdp::Trajectory> batch,
                         double gamma);
ad::Gradients BaselineGradient(const BaselineNet& baseline,
                               std::span<const mdp::Trajectory> batch, double gamma);

/// Baseline prediction as used in the advantage, clipped to [0, 1].
double ClippedBaseline(const BaselineNet& baseline, std::span<const double> hidden_state);

/// Advantage weights G_t - b(h_t) for one trajectory. A null baseline means b = 0.
std::vector<double> Advantages(const mdp::Trajectory& trajectory, const BaselineNet* baseline,
                               double gamma);

/// Estimate of the gradient of expected reward with respect to the generator:
/// (1/N) sum_n sum_t grad log pi(u_t | x_t) * advantage_t, advantages held
/// constant. Throws std::invalid_argument on an empty batch.
ad::Gradients PolicyGradient(const models::QGen& qgen, const BaselineNet* baseline,
                             std::span<const mdp::Trajectory> batch, double gamma,
                             int workers = 1);
/// Same with explicit per-step weights, one vector per trajectory.
ad::Gradients WeightedLogLikelihoodGradient(const models::QGen& qgen,
                                            std::span<const mdp::Trajectory> batch,
                                            std::span<const std::vector<double>> weights,
                                            int workers = 1);

struct EpochMetrics {
  int epoch = 0;
  double success_rate = 0.0;
  double mean_dialogue_len = 0.0;  // policy actions per game
  double mean_questions = 0.0;
  double baseline_mse = 0.0;       // before each batch's baseline update
  double stop_token_fraction = 0.0;
};

/// {epoch, success_rate, mean_dialogue_len, mean_questions, baseline_mse,
/// stop_token_fraction}.
std::string MetricsToJson(const EpochMetrics& m);

/// Sampling rollouts for `games`; game i uses its own stream derived from
/// `seed` and i, so the result does not depend on the worker count.
std::vector<mdp::Trajectory> RolloutBatch(const models::QGen& qgen,
                                          const models::Oracle& oracle,
                                          const models::Guesser& guesser,
                                          std::span<const scenes::Game> games,
                                          const mdp::RolloutOptions& options,
                                          std::uint64_t seed, const mdp::Environment& env,
                                          int workers);

/// One pass over `scenes`: each scene once in shuffled order with a uniformly
/// drawn target, batches of `batch_size` sampled games, an ascent step on the
/// generator and a descent step on the baseline per batch.
EpochMetrics ReinforceEpoch(models::QGen& qgen, BaselineNet& baseline,
                            const models::Oracle& oracle, const models::Guesser& guesser,
                            const std::vector<scenes::Game>& scenes, const RLConfig& config,
                            const scenes::Vocabulary& vocab, Rng& rng, int epoch);

}  // namespace gwrl::reinforce

#endif  // GWRL_REINFORCE_REINFORCE_H_
