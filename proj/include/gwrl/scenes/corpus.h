#ifndef GWRL_SCENES_CORPUS_H_
#define GWRL_SCENES_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gwrl/scenes/dialogue.h"
#include "gwrl/scenes/scene.h"
#include "gwrl/scenes/vocabulary.h"

namespace gwrl::scenes {

struct GameRecord {
  Game game;
  Dialogue dialogue;
  bool success = false;
  bool operator==(const GameRecord&) const = default;
};

struct Corpus {
  Vocabulary vocab = Vocabulary::ForCategories(5);
  std::vector<GameRecord> train;
  std::vector<GameRecord> valid;
  std::vector<GameRecord> test;
};

inline constexpr const char* kSplitNames[] = {"train", "valid", "test"};

/// Scene i is generated from its own derived seed, so the corpus does not
/// depend on generation order. Scenes 0..80% go to train, the next 10% to
/// valid, the rest to test.
Corpus GenerateCorpus(std::size_t n_scenes, std::uint64_t seed, const SceneConfig& config,
                      const GameLimits& limits);

/// One JSON object, no trailing newline.
std::string RecordToJson(const GameRecord& record, const Vocabulary& vocab);
/// Parses and validates a record; scene features are recomputed. Throws
/// std::invalid_argument naming the offending field.
GameRecord RecordFromJson(const std::string& line, const Vocabulary& vocab,
                          const SceneConfig& config, const GameLimits& limits);

/// Writes train.jsonl, valid.jsonl, test.jsonl and vocab.txt under `dir`.
void WriteCorpus(const std::filesystem::path& dir, const Corpus& corpus);
std::vector<GameRecord> ReadSplit(const std::filesystem::path& path,
                                  const Vocabulary& vocab, const SceneConfig& config,
                                  const GameLimits& limits);
Corpus ReadCorpus(const std::filesystem::path& dir, const SceneConfig& config,
                  const GameLimits& limits);

}  // namespace gwrl::scenes

#endif  // GWRL_SCENES_CORPUS_H_
