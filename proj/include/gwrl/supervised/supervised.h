#ifndef GWRL_SUPERVISED_SUPERVISED_H_
#define GWRL_SUPERVISED_SUPERVISED_H_

#include <cstdint>
#include <string>
#include <vector>

#include "gwrl/models/guesser.h"
#include "gwrl/models/oracle.h"
#include "gwrl/models/qgen.h"
#include "gwrl/scenes/corpus.h"

namespace gwrl::supervised {

using scenes::TokenId;

struct TrainConfig {
  double lr = 0.25;
  int batch_size = 8;
  int epochs = 8;
  /// Revert the epoch and halve lr when the full train loss goes up.
  bool halve_on_plateau = true;
  /// Global gradient-norm clip; 0 disables.
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  int workers = 1;

  std::vector<std::string> Validate(const std::string& section) const;
};

struct SplitMetrics {
  int epoch = 0;
  std::string split;
  double loss = 0.0;        // mean per predicted item
  double error_rate = 0.0;  // argmax mistakes per predicted item
  double perplexity = 0.0;  // exp(loss); only meaningful for the generator
  double lr = 0.0;
};

struct TrainResult {
  /// Train and valid rows for every epoch, then one test row for the kept
  /// (best-valid) parameters.
  std::vector<SplitMetrics> rows;
  int best_epoch = 0;
};

/// {epoch, split, loss, error_rate, perplexity, lr}.
std::string MetricsToJson(const SplitMetrics& m);

struct OracleExample {
  std::vector<TokenId> question;
  int category = 1;
  scenes::Spatial spatial{};
  scenes::Answer answer = scenes::Answer::kNa;
};
/// Every question of every dialogue, labelled with the target's exact answer.
std::vector<OracleExample> OracleExamples(const std::vector<scenes::GameRecord>& records);

struct GuesserExample {
  std::vector<TokenId> dialogue;
  std::vector<models::ObjectFeatures> objects;
  std::size_t target = 0;
};
/// Successful scripted dialogues only.
std::vector<GuesserExample> GuesserExamples(const std::vector<scenes::GameRecord>& records,
                                            const scenes::Vocabulary& vocab);

struct QGenExample {
  models::FlatSequence sequence;
  std::vector<double> scene_features;
};
/// Dialogues that ended by isolating the target get a final <stop>.
std::vector<QGenExample> QGenExamples(const std::vector<scenes::GameRecord>& records,
                                      const scenes::Vocabulary& vocab);

SplitMetrics EvaluateOracle(const models::Oracle& oracle,
                            const std::vector<OracleExample>& examples);
SplitMetrics EvaluateGuesser(const models::Guesser& guesser,
                             const std::vector<GuesserExample>& examples);
SplitMetrics EvaluateQGen(const models::QGen& qgen, const std::vector<QGenExample>& examples);

/// Plain SGD on mean cross-entropy; the parameters left in the model are the
/// ones with the best validation loss. Throws std::invalid_argument on an
/// empty training set.
TrainResult TrainOracle(models::Oracle& oracle, const scenes::Corpus& corpus,
                        const TrainConfig& config);
TrainResult TrainGuesser(models::Guesser& guesser, const scenes::Corpus& corpus,
                         const TrainConfig& config);
TrainResult PretrainQGen(models::QGen& qgen, const scenes::Corpus& corpus,
                         const TrainConfig& config);

}  // namespace gwrl::supervised

#endif  // GWRL_SUPERVISED_SUPERVISED_H_
