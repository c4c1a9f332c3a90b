#ifndef GWRL_SCENES_DIALOGUE_H_
#define GWRL_SCENES_DIALOGUE_H_

#include <optional>
#include <string>
#include <vector>

#include "gwrl/scenes/scene.h"
#include "gwrl/scenes/vocabulary.h"

namespace gwrl::scenes {

/// Episode caps: questions per dialogue and words per question.
struct GameLimits {
  int max_questions = 8;
  int max_words = 12;
};

struct QaPair {
  std::vector<TokenId> question;  // ends with <?>
  Answer answer = Answer::kNa;
  bool operator==(const QaPair&) const = default;
};

struct Dialogue {
  std::vector<QaPair> pairs;
  bool terminated_by_stop = false;
  bool operator==(const Dialogue&) const = default;
};

/// Throws std::invalid_argument if a question is empty, lacks the trailing
/// <?>, contains <stop> or an answer token, has more than `max_words` words
/// (the <?> is not counted), or if there are more than `max_questions` pairs.
void ValidateDialogue(const Dialogue& dialogue, const Vocabulary& vocab,
                      int max_questions, int max_words);

// Question grammar understood by the exact answerer:
//   is it a <category> <?>
//   is it in the {left|right|top|bottom} half <?>
//   is it in the {top|middle|bottom} {left|center|right} cell <?>
// Halves split at the canvas center on the object's center (left: x < 0,
// top: y < 0); cells split each axis in thirds.
struct QuestionTemplate {
  enum class Kind { kCategory, kHalf, kCell };
  enum Half { kLeft = 0, kRight = 1, kTop = 2, kBottom = 3 };
  Kind kind = Kind::kCategory;
  int first = 0;   // category id, Half, or cell row
  int second = 0;  // cell column
  bool operator==(const QuestionTemplate&) const = default;
};

/// Every template in a fixed order: categories 1..C, the four halves, then the
/// nine cells row-major.
std::vector<QuestionTemplate> AllTemplates(int num_categories);

std::vector<TokenId> RenderTemplate(const QuestionTemplate& t, const Vocabulary& vocab);
/// The template a question spells, if any. A trailing <?> is optional.
std::optional<QuestionTemplate> ParseQuestion(const std::vector<TokenId>& question,
                                              const Vocabulary& vocab);

/// Truth of a template for one object.
bool TemplateHolds(const QuestionTemplate& t, const SceneObject& object, int width,
                   int height);

/// yes/no for template questions, na for anything else.
Answer ExactAnswer(const std::vector<TokenId>& question, const SceneObject& object,
                   int width, int height, const Vocabulary& vocab);

/// Flat token stream of a dialogue: each question (with its <?>) followed by
/// its answer token. <stop> never appears.
std::vector<TokenId> FlattenDialogue(const Dialogue& dialogue, const Vocabulary& vocab);

}  // namespace gwrl::scenes

#endif  // GWRL_SCENES_DIALOGUE_H_
