#include "gwrl/scenes/scripted.h"

#include <cstdlib>
#include <limits>

namespace gwrl::scenes {

std::vector<std::size_t> ConsistentCandidates(const Game& game, const Dialogue& dialogue,
                                              const Vocabulary& vocab) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < game.objects.size(); ++k) out.push_back(k);
  for (const QaPair& pair : dialogue.pairs) {
    const auto t = ParseQuestion(pair.question, vocab);
    if (!t || pair.answer == Answer::kNa) continue;
    const bool want = pair.answer == Answer::kYes;
    std::vector<std::size_t> kept;
    for (std::size_t k : out) {
      if (TemplateHolds(*t, game.objects[k], game.width, game.height) == want) {
        kept.push_back(k);
      }
    }
    out = std::move(kept);
  }
  return out;
}

ScriptedResult ScriptedDialogue(const Game& game, Rng& rng, const Vocabulary& vocab,
                                int num_categories, const GameLimits& limits) {
  std::vector<QuestionTemplate> templates;
  std::vector<std::vector<TokenId>> rendered;
  for (const auto& t : AllTemplates(num_categories)) {
    auto q = RenderTemplate(t, vocab);
    if (static_cast<int>(q.size()) - 1 > limits.max_words) continue;
    templates.push_back(t);
    rendered.push_back(std::move(q));
  }
  std::vector<bool> asked(templates.size(), false);

  ScriptedResult result;
  std::vector<std::size_t> candidates;
  for (std::size_t k = 0; k < game.objects.size(); ++k) candidates.push_back(k);

  while (candidates.size() > 1 &&
         static_cast<int>(result.dialogue.pairs.size()) < limits.max_questions &&
         !templates.empty()) {
    // Score = (already asked, |yes - no|); lower is better.
    std::pair<int, long> best{std::numeric_limits<int>::max(), 0};
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < templates.size(); ++i) {
      long yes = 0;
      for (std::size_t k : candidates) {
        yes += TemplateHolds(templates[i], game.objects[k], game.width, game.height);
      }
      const long no = static_cast<long>(candidates.size()) - yes;
      const std::pair<int, long> score{asked[i] ? 1 : 0, std::labs(yes - no)};
      if (score < best) {
        best = score;
        tied.clear();
      }
      if (score == best) tied.push_back(i);
    }
    const std::size_t pick = tied[rng.Index(tied.size())];
    asked[pick] = true;
    const bool holds =
        TemplateHolds(templates[pick], game.target(), game.width, game.height);
    result.dialogue.pairs.push_back(
        {rendered[pick], holds ? Answer::kYes : Answer::kNo});
    std::vector<std::size_t> kept;
    for (std::size_t k : candidates) {
      if (TemplateHolds(templates[pick], game.objects[k], game.width, game.height) ==
          holds) {
        kept.push_back(k);
      }
    }
    candidates = std::move(kept);
  }
  result.dialogue.terminated_by_stop = candidates.size() == 1;
  result.guess = candidates.front();
  result.success = result.guess == game.target_index;
  return result;
}

}  // namespace gwrl::scenes
