#include "gwrl/scenes/corpus.h"

#include <fstream>
#include <stdexcept>

#include "gwrl/autodiff/param_store.h"
#include "gwrl/scenes/scripted.h"
#include "json.hpp"

namespace gwrl::scenes {

using nlohmann::json;

Corpus GenerateCorpus(std::size_t n_scenes, std::uint64_t seed, const SceneConfig& config,
                      const GameLimits& limits) {
  Corpus corpus;
  corpus.vocab = Vocabulary::ForCategories(config.num_categories);
  const std::size_t n_train = n_scenes * 8 / 10;
  const std::size_t n_valid = n_scenes / 10;
  for (std::size_t i = 0; i < n_scenes; ++i) {
    const std::uint64_t scene_seed = ad::MixSeed(seed, i);
    Rng scene_rng(scene_seed);
    Rng script_rng(ad::MixSeed(scene_seed, 1));
    GameRecord record;
    record.game = GenerateScene(scene_rng, config, i);
    const ScriptedResult scripted = ScriptedDialogue(record.game, script_rng, corpus.vocab,
                                                     config.num_categories, limits);
    record.dialogue = scripted.dialogue;
    record.success = scripted.success;
    auto& split = i < n_train             ? corpus.train
                  : i < n_train + n_valid ? corpus.valid
                                          : corpus.test;
    split.push_back(std::move(record));
  }
  return corpus;
}

std::string RecordToJson(const GameRecord& record, const Vocabulary& vocab) {
  json objects = json::array();
  for (const SceneObject& o : record.game.objects) {
    objects.push_back({{"category", o.category},
                       {"bbox", {o.bbox.x_min, o.bbox.y_min, o.bbox.x_max, o.bbox.y_max}}});
  }
  json dialogue = json::array();
  for (const QaPair& pair : record.dialogue.pairs) {
    dialogue.push_back({{"question", vocab.Decode(pair.question)},
                        {"answer", std::string(AnswerName(pair.answer))}});
  }
  json j = {{"scene_id", record.game.scene_id},
            {"width", record.game.width},
            {"height", record.game.height},
            {"objects", std::move(objects)},
            {"target_index", record.game.target_index},
            {"dialogue", std::move(dialogue)},
            {"terminated_by_stop", record.dialogue.terminated_by_stop},
            {"success", record.success}};
  return j.dump();
}

GameRecord RecordFromJson(const std::string& line, const Vocabulary& vocab,
                          const SceneConfig& config, const GameLimits& limits) {
  GameRecord r;
  std::string field = "record";
  try {
    const json j = json::parse(line);
    field = "scene_id";
    r.game.scene_id = j.at("scene_id").get<std::uint64_t>();
    field = "width";
    r.game.width = j.at("width").get<int>();
    field = "height";
    r.game.height = j.at("height").get<int>();
    field = "objects";
    for (const json& o : j.at("objects")) {
      SceneObject obj;
      obj.category = o.at("category").get<int>();
      const auto box = o.at("bbox").get<std::vector<int>>();
      if (box.size() != 4) throw std::invalid_argument("bbox needs 4 numbers");
      obj.bbox = {box[0], box[1], box[2], box[3]};
      ValidateObject(obj, r.game.width, r.game.height, config.num_categories);
      r.game.objects.push_back(obj);
    }
    if (r.game.objects.size() < 2) throw std::invalid_argument("fewer than 2 objects");
    field = "target_index";
    r.game.target_index = j.at("target_index").get<std::size_t>();
    if (r.game.target_index >= r.game.objects.size()) {
      throw std::invalid_argument("out of range");
    }
    field = "dialogue";
    for (const json& p : j.at("dialogue")) {
      QaPair pair;
      pair.question = vocab.Encode(p.at("question").get<std::vector<std::string>>());
      pair.answer = ParseAnswer(p.at("answer").get<std::string>());
      r.dialogue.pairs.push_back(std::move(pair));
    }
    ValidateDialogue(r.dialogue, vocab, limits.max_questions, limits.max_words);
    field = "terminated_by_stop";
    r.dialogue.terminated_by_stop = j.value("terminated_by_stop", false);
    field = "success";
    r.success = j.at("success").get<bool>();
  } catch (const std::exception& e) {
    throw std::invalid_argument(field + ": " + e.what());
  }
  RefreshFeatures(r.game, config);
  return r;
}

void WriteCorpus(const std::filesystem::path& dir, const Corpus& corpus) {
  std::filesystem::create_directories(dir);
  const std::vector<GameRecord>* splits[] = {&corpus.train, &corpus.valid, &corpus.test};
  for (int s = 0; s < 3; ++s) {
    const auto path = dir / (std::string(kSplitNames[s]) + ".jsonl");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const GameRecord& r : *splits[s]) out << RecordToJson(r, corpus.vocab) << '\n';
    if (!out) throw std::runtime_error("failed writing " + path.string());
  }
  corpus.vocab.Save(dir / "vocab.txt");
}

std::vector<GameRecord> ReadSplit(const std::filesystem::path& path,
                                  const Vocabulary& vocab, const SceneConfig& config,
                                  const GameLimits& limits) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing data file: " + path.string());
  std::vector<GameRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(RecordFromJson(line, vocab, config, limits));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return out;
}

Corpus ReadCorpus(const std::filesystem::path& dir, const SceneConfig& config,
                  const GameLimits& limits) {
  Corpus corpus;
  corpus.vocab = Vocabulary::Load(dir / "vocab.txt");
  corpus.train = ReadSplit(dir / "train.jsonl", corpus.vocab, config, limits);
  corpus.valid = ReadSplit(dir / "valid.jsonl", corpus.vocab, config, limits);
  corpus.test = ReadSplit(dir / "test.jsonl", corpus.vocab, config, limits);
  return corpus;
}

}  // namespace gwrl::scenes
