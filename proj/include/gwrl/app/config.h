#ifndef GWRL_APP_CONFIG_H_
#define GWRL_APP_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwrl/decode/decode.h"
#include "gwrl/models/layers.h"
#include "gwrl/reinforce/reinforce.h"
#include "gwrl/scenes/scene.h"
#include "gwrl/supervised/supervised.h"

namespace gwrl::app {

struct EvalSettings {
  int runs = 5;
  decode::Decoder decoder = decode::Decoder::kSampling;
  int beam_width = 3;
  bool length_normalize = true;
  std::uint64_t seed = 1;
};

/// Everything a command can be configured with. Sections in the file:
/// scene, model, supervised, rl, eval.
struct Config {
  scenes::SceneConfig scene;
  std::size_t num_scenes = 6250;  // 5000 train, 625 valid, 625 test
  std::uint64_t data_seed = 1;
  models::ModelSizes model;
  std::uint64_t model_seed = 1;
  supervised::TrainConfig supervised;
  reinforce::RLConfig rl;
  EvalSettings eval;

  /// Dialogue caps shared by the corpus, the environment and decoding.
  scenes::GameLimits limits() const { return rl.limits(); }
  /// Applies one worker count to every phase.
  void SetWorkers(int workers);
  /// One message per problem; empty when valid.
  std::vector<std::string> Validate() const;
};

/// Carries every problem found, joined into what().
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Reads key = value lines grouped under [section] headers into `config`.
/// Unknown keys and unparsable values are collected rather than thrown
/// one at a time.
std::vector<std::string> ApplyIni(const std::string& text, Config& config);
/// "section.key=value".
std::vector<std::string> ApplyOverride(const std::string& assignment, Config& config);

/// Defaults, then the file (if any), then overrides; throws ConfigError
/// listing every invalid key or value.
Config LoadConfig(const std::filesystem::path& path, const std::vector<std::string>& overrides);

/// Every key with its effective value, in a form ApplyIni reads back.
std::string ToIni(const Config& config);

}  // namespace gwrl::app

#endif  // GWRL_APP_CONFIG_H_
