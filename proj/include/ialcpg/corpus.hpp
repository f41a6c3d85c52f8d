#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace ialcpg {

/// A lowercase, whitespace-free text unit.
using Token = std::string;
using TokenSeq = std::vector<Token>;

struct Story {
  std::string story_id;
  TokenSeq tokens;
};

enum class Split { kTrain, kDev, kTest };

std::string_view split_name(Split s);
std::optional<Split> parse_split(std::string_view s);

struct QAExample {
  std::string example_id;
  std::string story_id;
  TokenSeq question;
  std::array<TokenSeq, 2> answers;
  Split split = Split::kTrain;
};

struct Dataset {
  std::vector<Story> stories;
  std::vector<QAExample> examples;

  const Story* find_story(const std::string& story_id) const;
  const QAExample* find_example(const std::string& example_id) const;
  std::vector<const QAExample*> by_split(Split s) const;
};

/// Lowercases, splits on whitespace, detaches leading/trailing punctuation
/// into single-character tokens, splits a possessive "'s" and keeps internal
/// hyphens and apostrophes. Bytes >= 0x80 are treated as letters.
TokenSeq tokenize(std::string_view text);

class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr std::size_t kNumSpecial = 3;

  Vocab();
  /// Specials first, then `tokens` in the given order. Duplicates and special
  /// surfaces are rejected.
  explicit Vocab(const std::vector<Token>& tokens);

  std::size_t size() const { return token_of_.size(); }
  std::optional<int> find(const Token& t) const;
  /// Index of `t`, or kUnk.
  int id_or_unk(const Token& t) const;
  const Token& token(int id) const;
  bool contains(const Token& t) const { return id_of_.count(t) > 0; }
  std::vector<int> encode(const TokenSeq& tokens) const;

  const std::vector<Token>& tokens() const { return token_of_; }

  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

 private:
  std::unordered_map<Token, int> id_of_;
  std::vector<Token> token_of_;
};

inline constexpr const char* kPadSurface = "<pad>";
inline constexpr const char* kUnkSurface = "<unk>";
inline constexpr const char* kBosSurface = "<bos>";

/// Tokens appearing in at least `min_stories` distinct stories, ordered by
/// descending total frequency then lexicographically. Throws DataError when
/// nothing survives the filter.
Vocab build_vocab(const std::vector<Story>& stories, std::size_t min_stories);

using StopwordSet = std::unordered_set<std::string>;

/// The built-in English stopword list (same content as data/stopwords.txt).
const StopwordSet& default_stopwords();
/// One lowercase word per line; blank lines and lines starting with '#' skipped.
StopwordSet load_stopwords(const std::filesystem::path& path);

struct GoldLabel {
  enum class Kind { kContext, kVocab, kIgnored };
  Kind kind = Kind::kIgnored;
  std::size_t index = 0;

  static GoldLabel context(std::size_t pos) { return {Kind::kContext, pos}; }
  static GoldLabel vocab(std::size_t id) { return {Kind::kVocab, id}; }
  static GoldLabel ignored() { return {Kind::kIgnored, 0}; }
  bool operator==(const GoldLabel&) const = default;
};

/// Labels an answer against its context: the largest answer n-gram found
/// contiguously in the context gets consecutive context positions (earliest
/// answer start, then earliest context position on ties). Remaining stopwords
/// prefer the vocabulary, remaining content words prefer their first context
/// occurrence; a word available from neither source is ignored. The answer is
/// truncated to max_answer_len first.
std::vector<GoldLabel> build_gold_labels(const TokenSeq& context, const TokenSeq& answer,
                                         const Vocab& vocab, const StopwordSet& stopwords,
                                         std::size_t max_answer_len);

/// Reads the JSON-lines corpus format. Throws DataError with a line number on
/// malformed records and names the missing story on dangling references.
/// Questions are truncated to max_question_len tokens.
Dataset load_dataset(const std::filesystem::path& path, std::size_t max_question_len = 30);
Dataset parse_dataset(std::istream& in, std::size_t max_question_len = 30,
                      const std::string& source = "<stream>");

}  // namespace ialcpg
