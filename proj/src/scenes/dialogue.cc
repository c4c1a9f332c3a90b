#include "gwrl/scenes/dialogue.h"

#include <array>
#include <stdexcept>

namespace gwrl::scenes {

namespace {

constexpr std::array<const char*, 4> kHalfWords = {"left", "right", "top", "bottom"};
constexpr std::array<const char*, 3> kRowWords = {"top", "middle", "bottom"};
constexpr std::array<const char*, 3> kColWords = {"left", "center", "right"};

// Index of `word` in `table`, or -1.
template <std::size_t N>
int Lookup(const std::array<const char*, N>& table, const std::string& word) {
  for (std::size_t i = 0; i < N; ++i) {
    if (word == table[i]) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

void ValidateDialogue(const Dialogue& dialogue, const Vocabulary& vocab,
                      int max_questions, int max_words) {
  if (static_cast<int>(dialogue.pairs.size()) > max_questions) {
    throw std::invalid_argument("dialogue has " +
                                std::to_string(dialogue.pairs.size()) +
                                " questions, limit is " + std::to_string(max_questions));
  }
  for (std::size_t j = 0; j < dialogue.pairs.size(); ++j) {
    const auto& q = dialogue.pairs[j].question;
    const std::string where = "question " + std::to_string(j) + ": ";
    if (q.empty() || q.back() != vocab.question_mark()) {
      throw std::invalid_argument(where + "must end with <?>");
    }
    for (std::size_t i = 0; i + 1 < q.size(); ++i) {
      if (q[i] == vocab.question_mark() || q[i] == vocab.stop() ||
          vocab.IsAnswer(q[i]) || q[i] == vocab.pad() || q[i] == vocab.start() ||
          q[i] < 0 || static_cast<std::size_t>(q[i]) >= vocab.size()) {
        throw std::invalid_argument(where + "invalid token at position " +
                                    std::to_string(i));
      }
    }
    if (static_cast<int>(q.size()) - 1 > max_words) {
      throw std::invalid_argument(where + "longer than " + std::to_string(max_words) +
                                  " words");
    }
  }
}

std::vector<QuestionTemplate> AllTemplates(int num_categories) {
  std::vector<QuestionTemplate> out;
  for (int c = 1; c <= num_categories; ++c) {
    out.push_back({QuestionTemplate::Kind::kCategory, c, 0});
  }
  for (int h = 0; h < 4; ++h) out.push_back({QuestionTemplate::Kind::kHalf, h, 0});
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out.push_back({QuestionTemplate::Kind::kCell, r, c});
  }
  return out;
}

std::vector<TokenId> RenderTemplate(const QuestionTemplate& t, const Vocabulary& vocab) {
  std::vector<std::string> words;
  switch (t.kind) {
    case QuestionTemplate::Kind::kCategory:
      words = {"is", "it", "a", Vocabulary::CategoryName(t.first)};
      break;
    case QuestionTemplate::Kind::kHalf:
      words = {"is", "it", "in", "the", kHalfWords.at(t.first), "half"};
      break;
    case QuestionTemplate::Kind::kCell:
      words = {"is", "it", "in", "the", kRowWords.at(t.first), kColWords.at(t.second),
               "cell"};
      break;
  }
  auto ids = vocab.Encode(words);
  ids.push_back(vocab.question_mark());
  return ids;
}

std::optional<QuestionTemplate> ParseQuestion(const std::vector<TokenId>& question,
                                              const Vocabulary& vocab) {
  std::vector<std::string> w;
  for (std::size_t i = 0; i < question.size(); ++i) {
    if (question[i] < 0 || static_cast<std::size_t>(question[i]) >= vocab.size()) {
      return std::nullopt;
    }
    if (i + 1 == question.size() && question[i] == vocab.question_mark()) break;
    w.push_back(vocab.token(question[i]));
  }
  if (w.size() < 4 || w[0] != "is" || w[1] != "it") return std::nullopt;
  if (w.size() == 4 && w[2] == "a") {
    for (int c = 1;; ++c) {
      // Category names are only meaningful if present in this vocabulary.
      const std::string name = Vocabulary::CategoryName(c);
      if (!vocab.Contains(name)) break;
      if (name == w[3]) return QuestionTemplate{QuestionTemplate::Kind::kCategory, c, 0};
    }
    return std::nullopt;
  }
  if (w[2] != "in" || w[3] != "the") return std::nullopt;
  if (w.size() == 6 && w[5] == "half") {
    const int h = Lookup(kHalfWords, w[4]);
    if (h < 0) return std::nullopt;
    return QuestionTemplate{QuestionTemplate::Kind::kHalf, h, 0};
  }
  if (w.size() == 7 && w[6] == "cell") {
    const int r = Lookup(kRowWords, w[4]);
    const int c = Lookup(kColWords, w[5]);
    if (r < 0 || c < 0) return std::nullopt;
    return QuestionTemplate{QuestionTemplate::Kind::kCell, r, c};
  }
  return std::nullopt;
}

bool TemplateHolds(const QuestionTemplate& t, const SceneObject& object, int width,
                   int height) {
  if (t.kind == QuestionTemplate::Kind::kCategory) return object.category == t.first;
  const Spatial s = SpatialFeatures(object.bbox, width, height);
  const double xc = s[4], yc = s[5];
  if (t.kind == QuestionTemplate::Kind::kHalf) {
    switch (t.first) {
      case QuestionTemplate::kLeft:
        return xc < 0.0;
      case QuestionTemplate::kRight:
        return xc >= 0.0;
      case QuestionTemplate::kTop:
        return yc < 0.0;
      default:
        return yc >= 0.0;
    }
  }
  const auto [row, col] = GridCell(xc, yc);
  return row == t.first && col == t.second;
}

Answer ExactAnswer(const std::vector<TokenId>& question, const SceneObject& object,
                   int width, int height, const Vocabulary& vocab) {
  const auto parsed = ParseQuestion(question, vocab);
  if (!parsed) return Answer::kNa;
  return TemplateHolds(*parsed, object, width, height) ? Answer::kYes : Answer::kNo;
}

std::vector<TokenId> FlattenDialogue(const Dialogue& dialogue, const Vocabulary& vocab) {
  std::vector<TokenId> flat;
  for (const auto& pair : dialogue.pairs) {
    flat.insert(flat.end(), pair.question.begin(), pair.question.end());
    flat.push_back(vocab.AnswerToken(pair.answer));
  }
  return flat;
}

}  // namespace gwrl::scenes
