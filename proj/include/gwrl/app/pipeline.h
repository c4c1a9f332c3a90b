#ifndef GWRL_APP_PIPELINE_H_
#define GWRL_APP_PIPELINE_H_

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gwrl/app/config.h"
#include "gwrl/eval/eval.h"
#include "gwrl/reinforce/reinforce.h"
#include "gwrl/scenes/corpus.h"
#include "gwrl/supervised/supervised.h"

namespace gwrl::app {

models::ModelSizes Sizes(const Config& config);
scenes::Corpus GenerateData(const Config& config);

struct SupervisedModels {
  models::QGen qgen;
  models::Oracle oracle;
  models::Guesser guesser;
};

/// Freshly initialised models; each gets its own seed derived from model.seed.
SupervisedModels NewModels(const Config& config, const scenes::Vocabulary& vocab);
reinforce::BaselineNet NewBaseline(const Config& config);

struct PretrainOutcome {
  SupervisedModels models;
  supervised::TrainResult oracle, guesser, qgen;
};
PretrainOutcome Pretrain(const Config& config, const scenes::Corpus& corpus);

struct RlOutcome {
  models::QGen qgen;
  reinforce::BaselineNet baseline;
  std::vector<reinforce::EpochMetrics> epochs;
};
/// REINFORCE over the training scenes, starting from `start`. `on_epoch`, if
/// set, sees the state after every epoch.
RlOutcome RlTrain(const Config& config, const scenes::Corpus& corpus,
                  const models::QGen& start, const models::Oracle& oracle,
                  const models::Guesser& guesser,
                  const std::function<void(const RlOutcome&)>& on_epoch = {});

std::vector<scenes::Game> Games(const std::vector<scenes::GameRecord>& records);
/// Training scenes with fresh uniform targets ("New Objects").
std::vector<scenes::Game> NewObjectGames(const Config& config, const scenes::Corpus& corpus);

mdp::RolloutOptions RolloutOptionsFor(const Config& config, decode::Decoder decoder);

/// Grid cells for every decoder in `decoders`, for the supervised generator
/// and, when given, the REINFORCE one, on both splits.
std::vector<eval::GridCell> EvaluateGrid(const Config& config, const scenes::Corpus& corpus,
                                         const models::Oracle& oracle,
                                         const models::Guesser& guesser,
                                         const models::QGen& supervised_qgen,
                                         const models::QGen* reinforce_qgen,
                                         const std::vector<decode::Decoder>& decoders);

// Checkpoint files inside a directory: qgen.ckpt, oracle.ckpt, guesser.ckpt,
// baseline.ckpt. Loading names the missing file in its error.
void SaveModels(const SupervisedModels& models, const std::filesystem::path& dir);
SupervisedModels LoadModels(const Config& config, const scenes::Vocabulary& vocab,
                            const std::filesystem::path& dir);
void LoadInto(ad::ParamStore& params, const std::filesystem::path& path);

/// Looks a scene up by id across all splits; throws if absent.
const scenes::GameRecord& FindScene(const scenes::Corpus& corpus, std::uint64_t scene_id);
/// Human-readable game: the objects, each question with the oracle's answer,
/// then the guess and the outcome.
std::string FormatTranscript(const mdp::Trajectory& trajectory, const scenes::Game& game,
                             const scenes::Vocabulary& vocab);

void WriteText(const std::filesystem::path& path, const std::string& text);

}  // namespace gwrl::app

#endif  // GWRL_APP_PIPELINE_H_
