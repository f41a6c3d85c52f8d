#include "ialcpg/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "ialcpg/errors.hpp"

namespace ialcpg {

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "dev") return Split::kDev;
  if (s == "test") return Split::kTest;
  return std::nullopt;
}

const Story* Dataset::find_story(const std::string& story_id) const {
  for (const auto& s : stories)
    if (s.story_id == story_id) return &s;
  return nullptr;
}

const QAExample* Dataset::find_example(const std::string& example_id) const {
  for (const auto& e : examples)
    if (e.example_id == example_id) return &e;
  return nullptr;
}

std::vector<const QAExample*> Dataset::by_split(Split s) const {
  std::vector<const QAExample*> out;
  for (const auto& e : examples)
    if (e.split == s) out.push_back(&e);
  return out;
}

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }

void split_piece(std::string_view piece, TokenSeq& out) {
  // Trailing punctuation run, emitted after the core.
  std::size_t end = piece.size();
  while (end > 0 && is_punct(static_cast<unsigned char>(piece[end - 1]))) --end;
  std::string_view core = piece.substr(0, end);
  std::string_view trailing = piece.substr(end);

  if (core == "'s") {
    out.emplace_back(core);
  } else {
    std::size_t begin = 0;
    while (begin < core.size() && is_punct(static_cast<unsigned char>(core[begin]))) {
      out.emplace_back(1, core[begin]);
      ++begin;
    }
    core = core.substr(begin);
    if (core.size() > 2 && core.ends_with("'s")) {
      out.emplace_back(core.substr(0, core.size() - 2));
      out.emplace_back("'s");
    } else if (!core.empty()) {
      out.emplace_back(core);
    }
  }
  for (char c : trailing) out.emplace_back(1, c);
}

}  // namespace

TokenSeq tokenize(std::string_view text) {
  std::string lowered(text);
  for (auto& ch : lowered) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80) ch = static_cast<char>(std::tolower(c));
  }
  TokenSeq out;
  std::size_t i = 0;
  while (i < lowered.size()) {
    while (i < lowered.size() && is_space(static_cast<unsigned char>(lowered[i]))) ++i;
    std::size_t j = i;
    while (j < lowered.size() && !is_space(static_cast<unsigned char>(lowered[j]))) ++j;
    if (j > i) split_piece(std::string_view(lowered).substr(i, j - i), out);
    i = j;
  }
  return out;
}

Vocab::Vocab() : Vocab(std::vector<Token>{}) {}

Vocab::Vocab(const std::vector<Token>& tokens) {
  token_of_ = {kPadSurface, kUnkSurface, kBosSurface};
  for (std::size_t i = 0; i < token_of_.size(); ++i) id_of_[token_of_[i]] = static_cast<int>(i);
  for (const auto& t : tokens) {
    if (t.empty()) throw DataError("vocab: empty token");
    if (!id_of_.emplace(t, static_cast<int>(token_of_.size())).second) {
      throw DataError("vocab: duplicate token '" + t + "'");
    }
    token_of_.push_back(t);
  }
}

std::optional<int> Vocab::find(const Token& t) const {
  auto it = id_of_.find(t);
  if (it == id_of_.end()) return std::nullopt;
  return it->second;
}

int Vocab::id_or_unk(const Token& t) const { return find(t).value_or(kUnk); }

const Token& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= token_of_.size()) {
    throw DataError("vocab: id " + std::to_string(id) + " out of range");
  }
  return token_of_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocab::encode(const TokenSeq& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id_or_unk(t));
  return ids;
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write vocab " + path.string());
  for (std::size_t i = kNumSpecial; i < token_of_.size(); ++i) os << token_of_[i] << '\n';
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read vocab " + path.string());
  std::vector<Token> tokens;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) tokens.push_back(line);
  return Vocab(tokens);
}

Vocab build_vocab(const std::vector<Story>& stories, std::size_t min_stories) {
  if (min_stories < 1) throw UsageError("build_vocab: min_stories must be >= 1");
  std::map<Token, std::size_t> story_count;
  std::map<Token, std::size_t> frequency;
  for (const auto& story : stories) {
    std::set<Token> seen;
    for (const auto& t : story.tokens) {
      ++frequency[t];
      if (seen.insert(t).second) ++story_count[t];
    }
  }
  std::vector<std::pair<Token, std::size_t>> kept;
  for (const auto& [tok, n] : story_count) {
    if (n < min_stories) continue;
    if (tok == kPadSurface || tok == kUnkSurface || tok == kBosSurface) continue;
    kept.emplace_back(tok, frequency[tok]);
  }
  if (kept.empty()) {
    throw DataError("build_vocab: no token appears in at least " + std::to_string(min_stories) +
                    " stories");
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<Token> tokens;
  tokens.reserve(kept.size());
  for (auto& [tok, _] : kept) tokens.push_back(tok);
  return Vocab(tokens);
}

std::vector<GoldLabel> build_gold_labels(const TokenSeq& context, const TokenSeq& answer,
                                         const Vocab& vocab, const StopwordSet& stopwords,
                                         std::size_t max_answer_len) {
  const std::size_t len = std::min(answer.size(), max_answer_len);
  std::vector<GoldLabel> labels(len, GoldLabel::ignored());
  if (len == 0) return labels;

  // Largest contiguous answer n-gram present in the context.
  std::size_t best_len = 0, best_ans = 0, best_ctx = 0;
  for (std::size_t n = len; n >= 1 && best_len == 0; --n) {
    for (std::size_t s = 0; s + n <= len && best_len == 0; ++s) {
      for (std::size_t p = 0; p + n <= context.size(); ++p) {
        if (std::equal(answer.begin() + static_cast<std::ptrdiff_t>(s),
                       answer.begin() + static_cast<std::ptrdiff_t>(s + n),
                       context.begin() + static_cast<std::ptrdiff_t>(p))) {
          best_len = n;
          best_ans = s;
          best_ctx = p;
          break;
        }
      }
    }
  }
  std::vector<bool> assigned(len, false);
  for (std::size_t k = 0; k < best_len; ++k) {
    labels[best_ans + k] = GoldLabel::context(best_ctx + k);
    assigned[best_ans + k] = true;
  }

  auto first_in_context = [&](const Token& t) -> std::optional<std::size_t> {
    auto it = std::find(context.begin(), context.end(), t);
    if (it == context.end()) return std::nullopt;
    return static_cast<std::size_t>(it - context.begin());
  };

  for (std::size_t i = 0; i < len; ++i) {
    if (assigned[i]) continue;
    const Token& t = answer[i];
    const auto vid = vocab.find(t);
    const auto pos = first_in_context(t);
    if (stopwords.count(t)) {
      if (vid) labels[i] = GoldLabel::vocab(static_cast<std::size_t>(*vid));
      else if (pos) labels[i] = GoldLabel::context(*pos);
    } else {
      if (pos) labels[i] = GoldLabel::context(*pos);
      else if (vid) labels[i] = GoldLabel::vocab(static_cast<std::size_t>(*vid));
    }
  }
  return labels;
}

namespace {

std::string require_string(const nlohmann::json& rec, const char* key, const std::string& where) {
  if (!rec.contains(key) || !rec[key].is_string()) {
    throw DataError(where + ": missing or non-string field '" + key + "'");
  }
  return rec[key].get<std::string>();
}

}  // namespace

Dataset parse_dataset(std::istream& in, std::size_t max_question_len, const std::string& source) {
  Dataset ds;
  std::set<std::string> story_ids, example_ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where + ": parse error: " + e.what());
    }
    if (!rec.is_object()) throw DataError(where + ": record is not a JSON object");
    const std::string type = require_string(rec, "type", where);
    if (type == "story") {
      Story s{require_string(rec, "story_id", where), tokenize(require_string(rec, "text", where))};
      if (s.tokens.empty()) throw DataError(where + ": story '" + s.story_id + "' has no tokens");
      if (!story_ids.insert(s.story_id).second) {
        throw DataError(where + ": duplicate story_id '" + s.story_id + "'");
      }
      ds.stories.push_back(std::move(s));
    } else if (type == "qa") {
      QAExample ex;
      ex.example_id = require_string(rec, "example_id", where);
      ex.story_id = require_string(rec, "story_id", where);
      ex.question = tokenize(require_string(rec, "question", where));
      if (ex.question.size() > max_question_len) ex.question.resize(max_question_len);
      if (!rec.contains("answers") || !rec["answers"].is_array() || rec["answers"].size() != 2) {
        throw DataError(where + ": 'answers' must be an array of exactly two strings");
      }
      for (std::size_t k = 0; k < 2; ++k) {
        if (!rec["answers"][k].is_string()) throw DataError(where + ": answer is not a string");
        ex.answers[k] = tokenize(rec["answers"][k].get<std::string>());
        if (ex.answers[k].empty()) throw DataError(where + ": empty answer");
      }
      const std::string split = require_string(rec, "split", where);
      const auto parsed = parse_split(split);
      if (!parsed) throw DataError(where + ": unknown split '" + split + "'");
      ex.split = *parsed;
      if (!example_ids.insert(ex.example_id).second) {
        throw DataError(where + ": duplicate example_id '" + ex.example_id + "'");
      }
      ds.examples.push_back(std::move(ex));
    } else {
      throw DataError(where + ": unknown record type '" + type + "'");
    }
  }
  for (const auto& ex : ds.examples) {
    if (!story_ids.count(ex.story_id)) {
      throw DataError(source + ": example '" + ex.example_id + "' references missing story_id '" +
                      ex.story_id + "'");
    }
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, std::size_t max_question_len) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read corpus " + path.string());
  return parse_dataset(in, max_question_len, path.string());
}

}  // namespace ialcpg
