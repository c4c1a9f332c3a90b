#include "gwrl/eval/eval.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "gwrl/reinforce/reinforce.h"
#include "gwrl/scenes/scripted.h"

namespace gwrl::eval {

std::vector<scenes::Game> WithRandomTargets(const std::vector<scenes::Game>& scenes, Rng& rng) {
  std::vector<scenes::Game> out = scenes;
  for (auto& g : out) g.target_index = rng.Index(g.objects.size());
  return out;
}

double ScriptedReferenceRate(const std::vector<scenes::Game>& games,
                             const scenes::Vocabulary& vocab, int num_categories,
                             const scenes::GameLimits& limits, std::uint64_t seed) {
  if (games.empty()) return 0.0;
  double wins = 0.0;
  for (std::size_t i = 0; i < games.size(); ++i) {
    Rng rng(ad::MixSeed(seed, i));
    wins += scenes::ScriptedDialogue(games[i], rng, vocab, num_categories, limits).success;
  }
  return wins / static_cast<double>(games.size());
}

EvalResult Evaluate(const models::QGen& qgen, const models::Oracle& oracle,
                    const models::Guesser& guesser, const std::vector<scenes::Game>& games,
                    const EvalOptions& options, const mdp::Environment& env) {
  if (games.empty()) throw std::invalid_argument("evaluation needs at least one game");
  if (options.runs < 1) throw std::invalid_argument("evaluation needs at least one run");
  EvalResult r;
  double questions = 0, length = 0, stops = 0;
  for (int run = 0; run < options.runs; ++run) {
    auto batch = reinforce::RolloutBatch(qgen, oracle, guesser, games, options.rollout,
                                         ad::MixSeed(options.seed, run), env, options.workers);
    double wins = 0;
    for (const auto& t : batch) {
      wins += t.reward;
      questions += static_cast<double>(t.dialogue.pairs.size());
      length += static_cast<double>(t.length());
      stops += t.dialogue.terminated_by_stop ? 1.0 : 0.0;
    }
    r.run_success.push_back(wins / static_cast<double>(games.size()));
    if (run == 0) r.trajectories = std::move(batch);
  }
  // Moments are taken about the first run so identical runs give exactly that
  // rate and a spread of exactly zero.
  const double n = static_cast<double>(options.runs);
  const double first = r.run_success.front();
  double shift = 0;
  for (double s : r.run_success) shift += s - first;
  shift /= n;
  r.mean = first + shift;
  if (options.runs > 1) {
    double ss = 0;
    for (double s : r.run_success) ss += (s - first - shift) * (s - first - shift);
    r.stddev = std::sqrt(ss / (n - 1));
  }
  const double total = n * static_cast<double>(games.size());
  r.mean_questions = questions / total;
  r.mean_length = length / total;
  r.stop_fraction = stops / total;
  return r;
}

std::vector<LengthBucket> LengthSuccessCurve(const std::vector<mdp::Trajectory>& log) {
  std::map<int, std::pair<std::size_t, double>> buckets;
  for (const auto& t : log) {
    auto& b = buckets[static_cast<int>(t.dialogue.pairs.size())];
    ++b.first;
    b.second += t.reward;
  }
  std::vector<LengthBucket> out;
  for (const auto& [q, b] : buckets) {
    out.push_back({q, b.first, b.second / static_cast<double>(b.first)});
  }
  return out;
}

VocabUsage CountVocabUsage(const std::vector<mdp::Trajectory>& log,
                           const scenes::Vocabulary& vocab) {
  VocabUsage usage;
  for (const auto& t : log) {
    for (const auto& s : t.steps) {
      if (vocab.IsControl(s.action)) continue;
      ++usage.frequency[vocab.Decode({s.action})[0]];
    }
  }
  usage.unique_words = usage.frequency.size();
  return usage;
}

namespace {

const char* DecoderRow(const std::string& decoder) {
  if (decoder == "sampling") return "Sampling";
  if (decoder == "greedy") return "Greedy";
  if (decoder == "beam") return "BSearch";
  return nullptr;
}

std::string Cell(const GridCell* c) {
  if (!c) return "-";
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.1f%% +- %.1f (%.1f%% ref)", 100 * c->result.mean,
                100 * c->result.stddev, c->PercentOfReference());
  return buf;
}

}  // namespace

std::string FormatGrid(const std::vector<GridCell>& cells) {
  auto find = [&](const std::string& d, const std::string& m, const std::string& s) {
    for (const auto& c : cells) {
      if (c.decoder == d && c.model == m && c.split == s) return &c;
    }
    return static_cast<const GridCell*>(nullptr);
  };
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %-32s %-32s\n", "", "New Objects", "New Pictures");
  out << line;
  for (const char* d : {"sampling", "greedy", "beam"}) {
    for (const char* m : {"baseline", "reinforce"}) {
      const std::string label = std::string(DecoderRow(d)) +
                                (std::string(m) == "baseline" ? " (baseline)" : " (REINFORCE)");
      std::snprintf(line, sizeof line, "%-22s %-32s %-32s\n", label.c_str(),
                    Cell(find(d, m, "new_objects")).c_str(),
                    Cell(find(d, m, "new_pictures")).c_str());
      out << line;
    }
  }
  for (const char* s : {"new_objects", "new_pictures"}) {
    for (const auto& c : cells) {
      if (c.split == s) {
        std::snprintf(line, sizeof line, "reference (%s): %.1f%%\n", s, 100 * c.reference);
        out << line;
        break;
      }
    }
  }
  return out.str();
}

std::string FormatCsv(const std::vector<GridCell>& cells) {
  std::ostringstream out;
  out << "decoder,model,split,runs,mean,stddev,reference,percent_of_reference,"
         "mean_questions,mean_length,stop_fraction\n";
  out.precision(17);
  for (const auto& c : cells) {
    out << c.decoder << ',' << c.model << ',' << c.split << ',' << c.result.run_success.size()
        << ',' << c.result.mean << ',' << c.result.stddev << ',' << c.reference << ','
        << c.PercentOfReference() << ',' << c.result.mean_questions << ','
        << c.result.mean_length << ',' << c.result.stop_fraction << '\n';
  }
  return out.str();
}

std::string FormatLengthCurveCsv(const std::vector<LengthBucket>& curve) {
  std::ostringstream out;
  out << "questions,count,success_rate\n";
  out.precision(17);
  for (const auto& b : curve) out << b.questions << ',' << b.count << ',' << b.success_rate << '\n';
  return out.str();
}

}  // namespace gwrl::eval
