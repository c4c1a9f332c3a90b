#include "gwrl/mdp/mdp.h"

#include <deque>
#include <stdexcept>

#include "json.hpp"

namespace gwrl::mdp {

EpisodeState InitialState(const scenes::GameLimits& limits) {
  EpisodeState s;
  s.terminal = limits.max_questions <= 0;
  return s;
}

TransitionEffect Transition(EpisodeState& state, TokenId action,
                            const models::Oracle& oracle, const scenes::Game& game,
                            const Environment& env) {
  const scenes::Vocabulary& vocab = *env.vocab;
  if (state.terminal) throw std::logic_error("transition from a terminal state");
  if (action < 0 || static_cast<std::size_t>(action) >= vocab.size() ||
      vocab.IsAnswer(action) || action == vocab.pad() || action == vocab.start()) {
    throw std::invalid_argument("token " + std::to_string(action) +
                                " is not a policy action");
  }
  TransitionEffect effect;
  ++state.steps;
  if (action == vocab.stop()) {
    state.partial.clear();
    state.words = 0;
    state.terminal = true;
    state.stopped = true;
    return effect;
  }
  if (action != vocab.question_mark()) {
    state.partial.push_back(action);
    ++state.words;
    if (state.words < env.limits.max_words) return effect;
    effect.forced_question_mark = true;
  }
  std::vector<TokenId> question = std::move(state.partial);
  question.push_back(vocab.question_mark());
  const auto& target = game.target();
  effect.answer = oracle.Answer(
      question, target.category,
      scenes::SpatialFeatures(target.bbox, game.width, game.height));
  effect.closed_question = true;
  state.history.push_back({std::move(question), effect.answer});
  state.partial.clear();
  state.words = 0;
  ++state.questions;
  if (state.questions >= env.limits.max_questions) state.terminal = true;
  return effect;
}

double Reward(const EpisodeState& terminal_state, const models::Guesser& guesser,
              const scenes::Game& game, const Environment& env) {
  if (!terminal_state.terminal) return 0.0;
  scenes::Dialogue d;
  d.pairs = terminal_state.history;
  const auto flat = scenes::FlattenDialogue(d, *env.vocab);
  const auto objects = models::ObjectFeaturesOf(game);
  return guesser.Guess(flat, objects) == game.target_index ? 1.0 : 0.0;
}

models::FlatSequence Trajectory::Replay(std::span<const double> weights) const {
  if (weights.size() != steps.size()) {
    throw std::invalid_argument("replay needs one weight per action");
  }
  models::FlatSequence seq;
  seq.tokens = stream;
  seq.weights.assign(stream.size(), 0.0);
  for (std::size_t t = 0; t < steps.size(); ++t) seq.weights[steps[t].position] = weights[t];
  return seq;
}

Trajectory Rollout(const models::QGen& qgen, const models::Oracle& oracle,
                   const models::Guesser& guesser, const scenes::Game& game,
                   const RolloutOptions& options, Rng& rng, const Environment& env) {
  const scenes::Vocabulary& vocab = *env.vocab;
  Trajectory traj;
  traj.scene_id = game.scene_id;
  traj.target_index = game.target_index;
  traj.scene_features = game.scene_features;
  traj.stream.push_back(vocab.start());

  EpisodeState state = InitialState(env.limits);
  models::LstmState lstm = qgen.InitialState();
  std::size_t consumed = 0;  // stream tokens already fed to the generator
  std::deque<TokenId> plan;  // beam-decoded actions still to play
  std::vector<double> log_probs, probs;
  decode::BeamOptions beam_options = options.beam;
  beam_options.max_words = env.limits.max_words;

  while (!state.terminal) {
    // Feed everything but the newest stream token; it is the next input.
    while (consumed + 1 < traj.stream.size()) {
      qgen.Advance(traj.stream[consumed++], game.scene_features, lstm);
    }
    if (options.decoder == decode::Decoder::kBeam && plan.empty()) {
      const auto beam = decode::BeamSearchQuestion(
          qgen, game.scene_features, lstm, traj.stream.back(), beam_options,
          vocab.question_mark(), vocab.stop());
      plan.assign(beam.tokens.begin(), beam.tokens.end());
    }
    qgen.Advance(traj.stream[consumed++], game.scene_features, lstm);
    qgen.Distribution(lstm, log_probs, probs);

    TokenId action;
    switch (options.decoder) {
      case decode::Decoder::kSampling:
        action = decode::SampleToken(probs, rng);
        break;
      case decode::Decoder::kGreedy:
        action = decode::GreedyToken(probs);
        break;
      default:
        action = plan.front();
        plan.pop_front();
        break;
    }
    TrajectoryStep step;
    step.action = action;
    step.log_prob = log_probs[action];
    step.hidden = lstm.h;
    step.question = state.questions;
    step.word = state.words;
    step.position = traj.stream.size();
    traj.stream.push_back(action);
    const TransitionEffect effect = Transition(state, action, oracle, game, env);
    if (effect.forced_question_mark) traj.stream.push_back(vocab.question_mark());
    if (effect.closed_question) traj.stream.push_back(vocab.AnswerToken(effect.answer));
    traj.steps.push_back(std::move(step));
  }
  traj.dialogue.pairs = state.history;
  traj.dialogue.terminated_by_stop = state.stopped;
  const auto flat = scenes::FlattenDialogue(traj.dialogue, vocab);
  traj.guess = guesser.Guess(flat, models::ObjectFeaturesOf(game));
  traj.reward = traj.guess == game.target_index ? 1.0 : 0.0;
  if (!traj.steps.empty()) traj.steps.back().reward = traj.reward;
  return traj;
}

std::string TrajectoryToJson(const Trajectory& trajectory, const scenes::Vocabulary& vocab) {
  std::vector<TokenId> actions;
  for (const auto& s : trajectory.steps) actions.push_back(s.action);
  std::vector<std::string> answers;
  for (const auto& p : trajectory.dialogue.pairs) {
    answers.emplace_back(scenes::AnswerName(p.answer));
  }
  const nlohmann::json j = {{"scene_id", trajectory.scene_id},
                            {"tokens", vocab.Decode(actions)},
                            {"answers", answers},
                            {"reward", trajectory.reward},
                            {"length", trajectory.length()}};
  return j.dump();
}

}  // namespace gwrl::mdp
