#include "gwrl/app/pipeline.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "gwrl/autodiff/checkpoint.h"

namespace gwrl::app {

models::ModelSizes Sizes(const Config& config) {
  models::ModelSizes s = config.model;
  s.feature_dim = config.scene.feature_dim;
  return s;
}

scenes::Corpus GenerateData(const Config& config) {
  return scenes::GenerateCorpus(config.num_scenes, config.data_seed, config.scene,
                                config.limits());
}

namespace {

std::uint64_t ModelSeed(const Config& config, const char* name) {
  return ad::MixSeed(config.model_seed, ad::HashName(name));
}

}  // namespace

SupervisedModels NewModels(const Config& config, const scenes::Vocabulary& vocab) {
  const auto sizes = Sizes(config);
  const int c = config.scene.num_categories;
  return {models::QGen(vocab.size(), sizes, ModelSeed(config, "qgen"), vocab.PolicyMask()),
          models::Oracle(vocab.size(), c, sizes, ModelSeed(config, "oracle")),
          models::Guesser(vocab.size(), c, sizes, ModelSeed(config, "guesser"))};
}

reinforce::BaselineNet NewBaseline(const Config& config) {
  return reinforce::BaselineNet(config.model.hidden, config.model.baseline_hidden,
                                ModelSeed(config, "baseline"));
}

PretrainOutcome Pretrain(const Config& config, const scenes::Corpus& corpus) {
  PretrainOutcome out{NewModels(config, corpus.vocab), {}, {}, {}};
  out.oracle = supervised::TrainOracle(out.models.oracle, corpus, config.supervised);
  out.guesser = supervised::TrainGuesser(out.models.guesser, corpus, config.supervised);
  out.qgen = supervised::PretrainQGen(out.models.qgen, corpus, config.supervised);
  return out;
}

std::vector<scenes::Game> Games(const std::vector<scenes::GameRecord>& records) {
  std::vector<scenes::Game> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.game);
  return out;
}

RlOutcome RlTrain(const Config& config, const scenes::Corpus& corpus,
                  const models::QGen& start, const models::Oracle& oracle,
                  const models::Guesser& guesser,
                  const std::function<void(const RlOutcome&)>& on_epoch) {
  RlOutcome out{start, NewBaseline(config), {}};
  const auto scenes = Games(corpus.train);
  Rng rng(ad::MixSeed(config.rl.seed, ad::HashName("reinforce")));
  for (int epoch = 1; epoch <= config.rl.epochs; ++epoch) {
    const auto m = reinforce::ReinforceEpoch(out.qgen, out.baseline, oracle, guesser, scenes,
                                             config.rl, corpus.vocab, rng, epoch);
    spdlog::info("rl epoch {}: success {:.4f} questions {:.2f} stop {:.3f} baseline mse {:.4f}",
                 epoch, m.success_rate, m.mean_questions, m.stop_token_fraction,
                 m.baseline_mse);
    out.epochs.push_back(m);
    if (on_epoch) on_epoch(out);
  }
  return out;
}

std::vector<scenes::Game> NewObjectGames(const Config& config, const scenes::Corpus& corpus) {
  Rng rng(ad::MixSeed(config.eval.seed, ad::HashName("new_objects")));
  return eval::WithRandomTargets(Games(corpus.train), rng);
}

mdp::RolloutOptions RolloutOptionsFor(const Config& config, decode::Decoder decoder) {
  mdp::RolloutOptions o;
  o.decoder = decoder;
  o.beam.width = config.eval.beam_width;
  o.beam.length_normalize = config.eval.length_normalize;
  o.beam.max_words = config.rl.max_words;
  return o;
}

std::vector<eval::GridCell> EvaluateGrid(const Config& config, const scenes::Corpus& corpus,
                                         const models::Oracle& oracle,
                                         const models::Guesser& guesser,
                                         const models::QGen& supervised_qgen,
                                         const models::QGen* reinforce_qgen,
                                         const std::vector<decode::Decoder>& decoders) {
  const mdp::Environment env{&corpus.vocab, config.limits()};
  const std::vector<std::pair<std::string, std::vector<scenes::Game>>> splits{
      {"new_objects", NewObjectGames(config, corpus)},
      {"new_pictures", Games(corpus.test)}};
  std::vector<eval::GridCell> cells;
  for (const auto& [split, games] : splits) {
    const double reference = eval::ScriptedReferenceRate(
        games, corpus.vocab, config.scene.num_categories, config.limits(),
        ad::MixSeed(config.eval.seed, ad::HashName(split)));
    for (decode::Decoder d : decoders) {
      eval::EvalOptions options;
      options.rollout = RolloutOptionsFor(config, d);
      options.runs = config.eval.runs;
      options.seed = ad::MixSeed(config.eval.seed, ad::HashName(split));
      options.workers = config.rl.workers;
      std::vector<std::pair<std::string, const models::QGen*>> generators{
          {"baseline", &supervised_qgen}};
      if (reinforce_qgen) generators.emplace_back("reinforce", reinforce_qgen);
      for (const auto& [model, qgen] : generators) {
        eval::GridCell cell{decode::DecoderName(d), model, split,
                            eval::Evaluate(*qgen, oracle, guesser, games, options, env),
                            reference};
        spdlog::info("eval {} {} {}: success {:.4f} +- {:.4f}", cell.decoder, model, split,
                     cell.result.mean, cell.result.stddev);
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

void LoadInto(ad::ParamStore& params, const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw std::runtime_error("missing checkpoint " + path.string());
  }
  ad::AssignParams(params, ad::LoadCheckpoint(path));
}

void SaveModels(const SupervisedModels& models, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  ad::SaveCheckpoint(models.qgen.params(), dir / "qgen.ckpt");
  ad::SaveCheckpoint(models.oracle.params(), dir / "oracle.ckpt");
  ad::SaveCheckpoint(models.guesser.params(), dir / "guesser.ckpt");
}

SupervisedModels LoadModels(const Config& config, const scenes::Vocabulary& vocab,
                            const std::filesystem::path& dir) {
  SupervisedModels m = NewModels(config, vocab);
  LoadInto(m.qgen.mutable_params(), dir / "qgen.ckpt");
  LoadInto(m.oracle.mutable_params(), dir / "oracle.ckpt");
  LoadInto(m.guesser.mutable_params(), dir / "guesser.ckpt");
  return m;
}

const scenes::GameRecord& FindScene(const scenes::Corpus& corpus, std::uint64_t scene_id) {
  for (const auto* split : {&corpus.train, &corpus.valid, &corpus.test}) {
    for (const auto& r : *split) {
      if (r.game.scene_id == scene_id) return r;
    }
  }
  throw std::invalid_argument("no scene with id " + std::to_string(scene_id));
}

std::string FormatTranscript(const mdp::Trajectory& trajectory, const scenes::Game& game,
                             const scenes::Vocabulary& vocab) {
  auto object_line = [&](std::size_t i) {
    const auto& o = game.objects[i];
    return std::to_string(i) + ": " + scenes::Vocabulary::CategoryName(o.category) + " [" +
           std::to_string(o.bbox.x_min) + "," + std::to_string(o.bbox.y_min) + " - " +
           std::to_string(o.bbox.x_max) + "," + std::to_string(o.bbox.y_max) + "]";
  };
  std::ostringstream out;
  out << "scene " << game.scene_id << " (" << game.width << "x" << game.height << ")\n";
  for (std::size_t i = 0; i < game.objects.size(); ++i) {
    out << "  " << object_line(i) << (i == game.target_index ? "  <- target" : "") << '\n';
  }
  int q = 0;
  for (const auto& pair : trajectory.dialogue.pairs) {
    std::string text;
    for (const auto& w : vocab.Decode(pair.question)) text += (text.empty() ? "" : " ") + w;
    out << "Q" << ++q << ": " << text << "\n   A: " << scenes::AnswerName(pair.answer) << '\n';
  }
  out << (trajectory.dialogue.terminated_by_stop ? "<stop>" : "question cap reached") << '\n';
  out << "guess " << object_line(trajectory.guess) << '\n';
  out << (trajectory.reward > 0 ? "success" : "failure") << '\n';
  return out.str();
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace gwrl::app
