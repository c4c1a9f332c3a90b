// Command-line front end: gen-data, pretrain, rl-train, evaluate, play.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "gwrl/app/pipeline.h"
#include "gwrl/autodiff/checkpoint.h"

namespace fs = std::filesystem;
using namespace gwrl;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  int workers = 1;
};

void AddCommon(CLI::App& cmd, Common& common) {
  cmd.add_option("--config", common.config_path, "INI file with [scene] [model] [supervised] [rl] [eval]");
  cmd.add_option("--set", common.overrides, "section.key=value, applied after the file")
      ->allow_extra_args(false);
  cmd.add_option("--workers", common.workers, "worker threads")->check(CLI::PositiveNumber);
}

app::Config Load(const Common& common, std::vector<std::string> extra = {}) {
  std::vector<std::string> overrides = common.overrides;
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  app::Config config = app::LoadConfig(common.config_path, overrides);
  config.SetWorkers(common.workers);
  return config;
}

scenes::Corpus ReadData(const app::Config& config, const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("data directory " + dir.string() + " not found");
  return scenes::ReadCorpus(dir, config.scene, config.limits());
}

void WriteConfig(const app::Config& config, const fs::path& out) {
  app::WriteText(out / "config.ini", app::ToIni(config));
}

std::string Jsonl(const std::vector<supervised::SplitMetrics>& rows) {
  std::string s;
  for (const auto& r : rows) s += supervised::MetricsToJson(r) + "\n";
  return s;
}

void GenData(const Common& common, const fs::path& out, std::optional<std::uint64_t> seed) {
  std::vector<std::string> extra;
  if (seed) extra.push_back("scene.seed=" + std::to_string(*seed));
  const auto config = Load(common, extra);
  const auto corpus = app::GenerateData(config);
  scenes::WriteCorpus(out, corpus);
  WriteConfig(config, out);
  spdlog::info("wrote {} train, {} valid, {} test scenes to {}", corpus.train.size(),
               corpus.valid.size(), corpus.test.size(), out.string());
}

void Pretrain(const Common& common, const fs::path& data, const fs::path& out) {
  const auto config = Load(common);
  const auto corpus = ReadData(config, data);
  const auto result = app::Pretrain(config, corpus);
  app::SaveModels(result.models, out);
  app::WriteText(out / "oracle_metrics.jsonl", Jsonl(result.oracle.rows));
  app::WriteText(out / "guesser_metrics.jsonl", Jsonl(result.guesser.rows));
  app::WriteText(out / "qgen_metrics.jsonl", Jsonl(result.qgen.rows));
  WriteConfig(config, out);
}

void RlTrain(const Common& common, const fs::path& data, const fs::path& checkpoints,
             const fs::path& out) {
  const auto config = Load(common);
  const auto corpus = ReadData(config, data);
  const auto models = app::LoadModels(config, corpus.vocab, checkpoints);
  const auto result = app::RlTrain(config, corpus, models.qgen, models.oracle, models.guesser);
  fs::create_directories(out);
  ad::SaveCheckpoint(result.qgen.params(), out / "qgen.ckpt");
  ad::SaveCheckpoint(result.baseline.params(), out / "baseline.ckpt");
  std::string rows;
  for (const auto& m : result.epochs) rows += reinforce::MetricsToJson(m) + "\n";
  app::WriteText(out / "rl_metrics.jsonl", rows);
  WriteConfig(config, out);
}

struct EvalArgs {
  std::string decoder = "all";
  std::optional<int> beam_width, runs;
  std::string rl_checkpoints;
};

std::vector<std::string> EvalOverrides(const EvalArgs& args) {
  std::vector<std::string> extra;
  if (args.decoder != "all") extra.push_back("eval.decoder=" + args.decoder);
  if (args.beam_width) extra.push_back("eval.beam_width=" + std::to_string(*args.beam_width));
  if (args.runs) extra.push_back("eval.runs=" + std::to_string(*args.runs));
  return extra;
}

void Evaluate(const Common& common, const fs::path& data, const fs::path& checkpoints,
              const EvalArgs& args, const fs::path& out) {
  const auto config = Load(common, EvalOverrides(args));
  const auto corpus = ReadData(config, data);
  const auto models = app::LoadModels(config, corpus.vocab, checkpoints);
  std::optional<models::QGen> rl_qgen;
  if (!args.rl_checkpoints.empty()) {
    rl_qgen.emplace(models.qgen);
    app::LoadInto(rl_qgen->mutable_params(), fs::path(args.rl_checkpoints) / "qgen.ckpt");
  }
  std::vector<decode::Decoder> decoders{decode::Decoder::kSampling, decode::Decoder::kGreedy,
                                        decode::Decoder::kBeam};
  if (args.decoder != "all") decoders = {config.eval.decoder};
  const auto cells = app::EvaluateGrid(config, corpus, models.oracle, models.guesser,
                                       models.qgen, rl_qgen ? &*rl_qgen : nullptr, decoders);

  std::string curves = "decoder,model,split,questions,count,success_rate\n";
  std::string usage = "decoder,model,split,unique_words\n";
  for (const auto& c : cells) {
    const std::string prefix = c.decoder + "," + c.model + "," + c.split + ",";
    const std::string csv = eval::FormatLengthCurveCsv(eval::LengthSuccessCurve(c.result.trajectories));
    for (std::size_t pos = csv.find('\n') + 1; pos < csv.size();) {
      const std::size_t end = csv.find('\n', pos);
      curves += prefix + csv.substr(pos, end - pos + 1);
      pos = end + 1;
    }
    usage += prefix +
             std::to_string(eval::CountVocabUsage(c.result.trajectories, corpus.vocab).unique_words) +
             "\n";
  }
  const std::string grid = eval::FormatGrid(cells);
  app::WriteText(out / "grid.txt", grid);
  app::WriteText(out / "results.csv", eval::FormatCsv(cells));
  app::WriteText(out / "length_curve.csv", curves);
  app::WriteText(out / "vocab_usage.csv", usage);
  WriteConfig(config, out);
  std::cout << grid;
}

void Play(const Common& common, const fs::path& data, const fs::path& checkpoints,
          const std::string& qgen_path, std::uint64_t scene_id, const EvalArgs& args) {
  const auto config = Load(common, EvalOverrides(args));
  const auto corpus = ReadData(config, data);
  auto models = app::LoadModels(config, corpus.vocab, checkpoints);
  if (!qgen_path.empty()) app::LoadInto(models.qgen.mutable_params(), qgen_path);
  const auto& game = app::FindScene(corpus, scene_id).game;
  const mdp::Environment env{&corpus.vocab, config.limits()};
  Rng rng(ad::MixSeed(config.eval.seed, scene_id));
  const auto t = mdp::Rollout(models.qgen, models.oracle, models.guesser, game,
                              app::RolloutOptionsFor(config, config.eval.decoder), rng, env);
  std::cout << app::FormatTranscript(t, game, corpus.vocab);
}

void SetUpLogging() {
  auto logger = spdlog::stderr_color_mt("gwrl");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("GWRL_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

}  // namespace

int main(int argc, char** argv) {
  SetUpLogging();
  CLI::App cli{"Guessing-game question generation: data, training and evaluation"};
  cli.require_subcommand(1);
  Common common;
  std::string out, data, checkpoints, qgen_path;
  std::optional<std::uint64_t> seed;
  std::uint64_t scene_id = 0;
  EvalArgs eval_args;
  const std::vector<std::string> decoder_choices{"sampling", "greedy", "beam"};

  auto* gen = cli.add_subcommand("gen-data", "generate the synthetic dialogue corpus");
  AddCommon(*gen, common);
  gen->add_option("--out", out, "output directory")->required();
  gen->add_option("--seed", seed, "corpus seed (overrides scene.seed)");

  auto* pre = cli.add_subcommand("pretrain", "supervised training of oracle, guesser, generator");
  AddCommon(*pre, common);
  pre->add_option("--data", data, "corpus directory")->required();
  pre->add_option("--out", out, "checkpoint directory")->required();

  auto* rl = cli.add_subcommand("rl-train", "REINFORCE fine-tuning of the generator");
  AddCommon(*rl, common);
  rl->add_option("--data", data, "corpus directory")->required();
  rl->add_option("--checkpoints", checkpoints, "supervised checkpoint directory")->required();
  rl->add_option("--out", out, "output directory")->required();

  auto* ev = cli.add_subcommand("evaluate", "success-rate grid over decoders and splits");
  AddCommon(*ev, common);
  ev->add_option("--data", data, "corpus directory")->required();
  ev->add_option("--checkpoints", checkpoints, "supervised checkpoint directory")->required();
  ev->add_option("--rl-checkpoints", eval_args.rl_checkpoints, "rl-train output directory");
  ev->add_option("--out", out, "report directory")->required();
  std::vector<std::string> eval_choices = decoder_choices;
  eval_choices.push_back("all");
  ev->add_option("--decoder", eval_args.decoder, "decoder or 'all'")
      ->check(CLI::IsMember(eval_choices));
  ev->add_option("--beam-width", eval_args.beam_width)->check(CLI::PositiveNumber);
  ev->add_option("--runs", eval_args.runs)->check(CLI::PositiveNumber);

  auto* play = cli.add_subcommand("play", "print one full game");
  AddCommon(*play, common);
  play->add_option("--data", data, "corpus directory")->required();
  play->add_option("--checkpoints", checkpoints, "supervised checkpoint directory")->required();
  play->add_option("--qgen", qgen_path, "generator checkpoint to use instead");
  play->add_option("--scene-id", scene_id)->required();
  std::string play_decoder;
  play->add_option("--decoder", play_decoder)->check(CLI::IsMember(decoder_choices));
  play->add_option("--beam-width", eval_args.beam_width)->check(CLI::PositiveNumber);

  CLI11_PARSE(cli, argc, argv);

  try {
    if (*gen) GenData(common, out, seed);
    if (*pre) Pretrain(common, data, out);
    if (*rl) RlTrain(common, data, checkpoints, out);
    if (*ev) Evaluate(common, data, checkpoints, eval_args, out);
    if (*play) {
      eval_args.decoder = play_decoder.empty() ? "all" : play_decoder;
      Play(common, data, checkpoints, qgen_path, scene_id, eval_args);
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& ch : msg) {
      if (ch == '\n') ch = ' ';
    }
    std::cerr << "gwrl: error: " << msg << '\n';
    return 1;
  }
  return 0;
}
