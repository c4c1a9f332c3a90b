#ifndef GWRL_SCENES_SCRIPTED_H_
#define GWRL_SCENES_SCRIPTED_H_

#include <vector>

#include "gwrl/scenes/dialogue.h"
#include "gwrl/scenes/scene.h"
#include "gwrl/scenes/vocabulary.h"
#include "gwrl/util/rng.h"

namespace gwrl::scenes {

struct ScriptedResult {
  Dialogue dialogue;
  std::size_t guess = 0;
  bool success = false;
};

/// Objects consistent with every answered template question, in object order.
/// Non-template questions do not filter.
std::vector<std::size_t> ConsistentCandidates(const Game& game, const Dialogue& dialogue,
                                              const Vocabulary& vocab);

/// Rule-based questioner. Each turn asks the template whose yes/no split of the
/// remaining candidates is most even, preferring templates not yet asked and
/// breaking ties with `rng`. Stops (terminated_by_stop) once one candidate is
/// left, or at the question cap. The guess is the first remaining candidate.
ScriptedResult ScriptedDialogue(const Game& game, Rng& rng, const Vocabulary& vocab,
                                int num_categories, const GameLimits& limits);

}  // namespace gwrl::scenes

#endif  // GWRL_SCENES_SCRIPTED_H_
