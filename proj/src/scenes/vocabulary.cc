#include "gwrl/scenes/vocabulary.h"

#include <fstream>
#include <stdexcept>

namespace gwrl::scenes {

namespace {

const std::vector<std::string>& TemplateWords() {
  static const std::vector<std::string> words = {
      "is",   "it",     "a",      "in",     "the",   "left", "right",
      "top",  "bottom", "half",   "middle", "center", "cell"};
  return words;
}

const std::vector<std::string>& CategoryNames() {
  static const std::vector<std::string> names = {
      "person", "chair", "car",   "dog",   "cup",   "bottle", "bus",
      "cat",    "horse", "bird",  "table", "book",  "clock",  "vase",
      "bowl",   "truck", "train", "boat",  "sheep", "cow"};
  return names;
}

std::vector<std::string> ControlTokens() {
  return {std::string(kPadToken),  std::string(kStartToken),
          std::string(kQuestionToken), std::string(kStopToken),
          std::string(kYesToken),  std::string(kNoToken),
          std::string(kNaToken)};
}

}  // namespace

std::string_view AnswerName(Answer a) {
  switch (a) {
    case Answer::kYes:
      return "yes";
    case Answer::kNo:
      return "no";
    case Answer::kNa:
      return "na";
  }
  return "na";
}

Answer ParseAnswer(std::string_view name) {
  if (name == "yes") return Answer::kYes;
  if (name == "no") return Answer::kNo;
  if (name == "na") return Answer::kNa;
  throw std::invalid_argument("unknown answer \"" + std::string(name) + "\"");
}

Vocabulary::Vocabulary(const std::vector<std::string>& words)
    : Vocabulary([&] {
        auto tokens = ControlTokens();
        tokens.insert(tokens.end(), words.begin(), words.end());
        return tokens;
      }(), true) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens, bool)
    : tokens_(std::move(tokens)) {
  const auto control = ControlTokens();
  if (tokens_.size() < control.size()) {
    throw std::invalid_argument("vocabulary lacks control tokens");
  }
  for (std::size_t i = 0; i < control.size(); ++i) {
    if (tokens_[i] != control[i]) {
      throw std::invalid_argument("vocabulary index " + std::to_string(i) +
                                  " must be " + control[i]);
    }
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw std::invalid_argument("empty token");
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw std::invalid_argument("duplicate token \"" + tokens_[i] + "\"");
    }
  }
  policy_mask_.assign(tokens_.size(), 1);
  for (TokenId id : {pad(), start(), yes(), no(), na()}) policy_mask_[id] = 0;
}

std::string Vocabulary::CategoryName(int category) {
  const auto& names = CategoryNames();
  if (category >= 1 && category <= static_cast<int>(names.size())) {
    return names[category - 1];
  }
  return "category" + std::to_string(category);
}

Vocabulary Vocabulary::ForCategories(int num_categories) {
  std::vector<std::string> words = TemplateWords();
  for (int c = 1; c <= num_categories; ++c) words.push_back(CategoryName(c));
  return Vocabulary(words);
}

void Vocabulary::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Vocabulary Vocabulary::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing vocabulary file: " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) tokens.push_back(line);
  try {
    return Vocabulary(std::move(tokens), true);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw std::out_of_range("token id " + std::to_string(id) + " out of range");
  }
  return tokens_[id];
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) {
    throw std::out_of_range("unknown token \"" + std::string(token) + "\"");
  }
  return it->second;
}

bool Vocabulary::Contains(std::string_view token) const {
  return index_.find(token) != index_.end();
}

std::vector<std::string> Vocabulary::Decode(const std::vector<TokenId>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(token(id));
  return out;
}

std::vector<TokenId> Vocabulary::Encode(const std::vector<std::string>& tokens) const {
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

std::string Vocabulary::Render(const std::vector<TokenId>& ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (!out.empty()) out += ' ';
    out += token(id);
  }
  return out;
}

}  // namespace gwrl::scenes
