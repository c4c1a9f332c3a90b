#ifndef GWRL_SCENES_VOCABULARY_H_
#define GWRL_SCENES_VOCABULARY_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gwrl/autodiff/tape.h"

namespace gwrl::scenes {

using TokenId = std::int32_t;

inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kStartToken = "<start>";
inline constexpr std::string_view kQuestionToken = "<?>";
inline constexpr std::string_view kStopToken = "<stop>";
inline constexpr std::string_view kYesToken = "<yes>";
inline constexpr std::string_view kNoToken = "<no>";
inline constexpr std::string_view kNaToken = "<na>";

enum class Answer : std::uint8_t { kYes = 0, kNo = 1, kNa = 2 };

std::string_view AnswerName(Answer a);  // "yes" | "no" | "na"
Answer ParseAnswer(std::string_view name);

/// Ordered token list. The seven control tokens always occupy indices 0..6
/// in the order pad, start, <?>, <stop>, <yes>, <no>, <na>; words follow.
class Vocabulary {
 public:
  /// Control tokens plus the given words (which must not repeat or collide
  /// with control tokens).
  explicit Vocabulary(const std::vector<std::string>& words);

  /// Template words plus one name per category.
  static Vocabulary ForCategories(int num_categories);
  static std::string CategoryName(int category);

  /// One token per line; index = line number.
  void Save(const std::filesystem::path& path) const;
  static Vocabulary Load(const std::filesystem::path& path);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const;
  TokenId id(std::string_view token) const;
  bool Contains(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  TokenId pad() const { return 0; }
  TokenId start() const { return 1; }
  TokenId question_mark() const { return 2; }
  TokenId stop() const { return 3; }
  TokenId yes() const { return 4; }
  TokenId no() const { return 5; }
  TokenId na() const { return 6; }
  TokenId AnswerToken(Answer a) const { return yes() + static_cast<TokenId>(a); }

  bool IsControl(TokenId id) const { return id >= 0 && id < 7; }
  bool IsAnswer(TokenId id) const { return id >= yes() && id <= na(); }

  /// Tokens the question generator may emit: every word plus <?> and <stop>.
  const ad::Mask& PolicyMask() const { return policy_mask_; }

  std::vector<std::string> Decode(const std::vector<TokenId>& ids) const;
  std::vector<TokenId> Encode(const std::vector<std::string>& tokens) const;
  /// Tokens joined by single spaces.
  std::string Render(const std::vector<TokenId>& ids) const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  explicit Vocabulary(std::vector<std::string> tokens, bool);

  std::vector<std::string> tokens_;
  std::map<std::string, TokenId, std::less<>> index_;
  ad::Mask policy_mask_;
};

}  // namespace gwrl::scenes

#endif  // GWRL_SCENES_VOCABULARY_H_
