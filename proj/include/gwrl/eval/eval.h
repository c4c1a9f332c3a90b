#ifndef GWRL_EVAL_EVAL_H_
#define GWRL_EVAL_EVAL_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gwrl/mdp/mdp.h"
#include "gwrl/scenes/scene.h"

namespace gwrl::eval {

/// Copies of `scenes` with targets drawn uniformly from `rng`.
std::vector<scenes::Game> WithRandomTargets(const std::vector<scenes::Game>& scenes, Rng& rng);

/// Success rate of the scripted questioner with exact answers on `games`;
/// stands in for human performance.
double ScriptedReferenceRate(const std::vector<scenes::Game>& games,
                             const scenes::Vocabulary& vocab, int num_categories,
                             const scenes::GameLimits& limits, std::uint64_t seed);

struct EvalOptions {
  mdp::RolloutOptions rollout;
  int runs = 5;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct EvalResult {
  std::vector<double> run_success;  // one rate per run
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation over runs
  double mean_questions = 0.0;
  double mean_length = 0.0;  // policy actions
  double stop_fraction = 0.0;
  /// Trajectories of the first run.
  std::vector<mdp::Trajectory> trajectories;
};

/// Full games on every entry of `games` (targets as given), repeated `runs`
/// times with independent sampling streams. Throws std::invalid_argument on
/// an empty game list or runs < 1.
EvalResult Evaluate(const models::QGen& qgen, const models::Oracle& oracle,
                    const models::Guesser& guesser, const std::vector<scenes::Game>& games,
                    const EvalOptions& options, const mdp::Environment& env);

struct LengthBucket {
  int questions = 0;
  std::size_t count = 0;
  double success_rate = 0.0;
};

/// Success rate by number of questions, occupied buckets only, ascending.
std::vector<LengthBucket> LengthSuccessCurve(const std::vector<mdp::Trajectory>& log);

struct VocabUsage {
  std::size_t unique_words = 0;
  std::map<std::string, std::size_t> frequency;
};

/// Distinct non-control tokens the policy emitted.
VocabUsage CountVocabUsage(const std::vector<mdp::Trajectory>& log,
                           const scenes::Vocabulary& vocab);

/// One cell of the results grid.
struct GridCell {
  std::string decoder;  // "sampling", "greedy", "beam"
  std::string model;    // "baseline" (supervised) or "reinforce"
  std::string split;    // "new_objects" or "new_pictures"
  EvalResult result;
  double reference = 0.0;

  double PercentOfReference() const {
    return reference > 0 ? 100.0 * result.mean / reference : 0.0;
  }
};

/// Rows decoder x model, columns New Objects / New Pictures. Missing cells
/// print as "-".
std::string FormatGrid(const std::vector<GridCell>& cells);
std::string FormatCsv(const std::vector<GridCell>& cells);
std::string FormatLengthCurveCsv(const std::vector<LengthBucket>& curve);

}  // namespace gwrl::eval

#endif  // GWRL_EVAL_EVAL_H_
