#ifndef GWRL_MDP_MDP_H_
#define GWRL_MDP_MDP_H_

#include <string>
#include <vector>

#include "gwrl/decode/decode.h"
#include "gwrl/models/guesser.h"
#include "gwrl/models/oracle.h"
#include "gwrl/models/qgen.h"
#include "gwrl/scenes/dialogue.h"
#include "gwrl/scenes/scene.h"
#include "gwrl/scenes/vocabulary.h"
#include "gwrl/util/rng.h"

namespace gwrl::mdp {

using scenes::TokenId;

/// Everything the environment needs besides the models.
struct Environment {
  const scenes::Vocabulary* vocab = nullptr;
  scenes::GameLimits limits;
};

struct EpisodeState {
  std::vector<TokenId> partial;         // words of the open question
  std::vector<scenes::QaPair> history;  // answered questions
  int words = 0;                        // i: words in the open question
  int questions = 0;                    // j: answered questions
  int steps = 0;                        // t: policy actions taken so far
  bool terminal = false;
  bool stopped = false;  // ended by an emitted <stop>
};

EpisodeState InitialState(const scenes::GameLimits& limits);

/// What an action did besides changing the state.
struct TransitionEffect {
  bool closed_question = false;
  bool forced_question_mark = false;
  scenes::Answer answer = scenes::Answer::kNa;
};

/// Applies one policy action in place. <stop> ends the game and discards the
/// open question; <?> closes the question and asks the oracle about the
/// target; a word is appended, and at the word cap the question is closed as
/// if <?> had followed. The game ends when the question cap is reached.
/// Throws std::logic_error on a terminal state and std::invalid_argument on a
/// token the policy may not emit.
TransitionEffect Transition(EpisodeState& state, TokenId action,
                            const models::Oracle& oracle, const scenes::Game& game,
                            const Environment& env);

/// 1 if the guesser's argmax over the objects is the target, else 0.
double Reward(const EpisodeState& terminal_state, const models::Guesser& guesser,
              const scenes::Game& game, const Environment& env);

struct TrajectoryStep {
  TokenId action = 0;
  double log_prob = 0.0;
  std::vector<double> hidden;  // generator hidden state the action was drawn from
  int question = 0;            // j when the action was taken
  int word = 0;                // i when the action was taken
  std::size_t position = 0;    // index of the action in `stream`
  double reward = 0.0;
};

struct Trajectory {
  std::uint64_t scene_id = 0;
  std::size_t target_index = 0;
  std::vector<TrajectoryStep> steps;
  scenes::Dialogue dialogue;
  /// Everything the generator consumed or emitted, starting at <start>:
  /// actions, forced <?> and answer tokens, in order.
  std::vector<TokenId> stream;
  std::vector<double> scene_features;
  std::size_t guess = 0;
  double reward = 0.0;

  std::size_t length() const { return steps.size(); }
  /// Replay sequence weighting action t by `weights[t]`; other tokens get 0.
  models::FlatSequence Replay(std::span<const double> weights) const;
};

struct RolloutOptions {
  decode::Decoder decoder = decode::Decoder::kSampling;
  decode::BeamOptions beam;
};

/// One full game driven by the question generator.
Trajectory Rollout(const models::QGen& qgen, const models::Oracle& oracle,
                   const models::Guesser& guesser, const scenes::Game& game,
                   const RolloutOptions& options, Rng& rng, const Environment& env);

/// {scene_id, tokens, answers, reward, length} as one JSON line.
std::string TrajectoryToJson(const Trajectory& trajectory, const scenes::Vocabulary& vocab);

}  // namespace gwrl::mdp

#endif  // GWRL_MDP_MDP_H_
