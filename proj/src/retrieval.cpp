#include "ialcpg/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ialcpg/errors.hpp"

namespace ialcpg {

std::vector<Chunk> chunk_story(const Story& story, std::size_t n) {
  if (n < 1) throw UsageError("chunk_story: chunk size must be >= 1");
  std::vector<Chunk> chunks;
  for (std::size_t begin = 0, idx = 0; begin < story.tokens.size(); begin += n, ++idx) {
    const std::size_t end = std::min(story.tokens.size(), begin + n);
    chunks.push_back({story.story_id, idx,
                      TokenSeq(story.tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                               story.tokens.begin() + static_cast<std::ptrdiff_t>(end)),
                      n});
  }
  return chunks;
}

namespace {

bool is_content(const Token& t, const StopwordSet& stopwords) {
  if (stopwords.count(t)) return false;
  return std::any_of(t.begin(), t.end(), [](char ch) {
    const auto c = static_cast<unsigned char>(ch);
    return c >= 0x80 || std::isalnum(c) != 0;
  });
}

double norm(const SparseVector& v) {
  double s = 0.0;
  for (const auto& [_, w] : v) s += w * w;
  return std::sqrt(s);
}

void normalize(SparseVector& v) {
  const double n = norm(v);
  if (n == 0.0) return;
  for (auto& [_, w] : v) w /= n;
}

}  // namespace

std::map<std::string, std::size_t> count_ngrams(const TokenSeq& tokens, const StopwordSet& stopwords,
                                                std::size_t max_n) {
  std::map<std::string, std::size_t> counts;
  std::vector<bool> content(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) content[i] = is_content(tokens[i], stopwords);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!content[i]) continue;
    std::string gram;
    for (std::size_t n = 1; n <= max_n && i + n <= tokens.size(); ++n) {
      if (n > 1) gram += ' ';
      gram += tokens[i + n - 1];
      if (content[i + n - 1]) ++counts[gram];
    }
  }
  return counts;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  double dot = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first == b[j].first) {
      dot += a[i].second * b[j].second;
      ++i;
      ++j;
    } else if (a[i].first < b[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  const double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (na * nb), 0.0, 1.0);
}

TfidfIndex::TfidfIndex(const std::vector<Chunk>& chunks, const StopwordSet& stopwords)
    : stopwords_(stopwords) {
  if (chunks.empty()) throw UsageError("build_tfidf_index: at least one chunk is required");
  std::vector<std::map<std::string, std::size_t>> counts;
  counts.reserve(chunks.size());
  std::map<std::string, std::size_t> df;
  for (const auto& c : chunks) {
    refs_.push_back({c.story_id, c.chunk_index});
    counts.push_back(count_ngrams(c.tokens, stopwords_));
    for (const auto& [gram, _] : counts.back()) ++df[gram];
  }
  // Term ids follow lexicographic n-gram order, so sparse vectors built from
  // ordered maps come out sorted.
  const double n_docs = static_cast<double>(chunks.size());
  for (const auto& [gram, d] : df) {
    term_id_.emplace(gram, terms_.size());
    terms_.push_back(gram);
    idf_.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(d))) + 1.0);
  }
  for (const auto& cnt : counts) {
    SparseVector v;
    v.reserve(cnt.size());
    for (const auto& [gram, tf] : cnt) {
      const std::size_t id = term_id_.at(gram);
      v.emplace_back(id, static_cast<double>(tf) * idf_[id]);
    }
    normalize(v);
    vectors_.push_back(std::move(v));
  }
}

double TfidfIndex::idf(const std::string& ngram) const {
  auto it = term_id_.find(ngram);
  return it == term_id_.end() ? -1.0 : idf_[it->second];
}

SparseVector TfidfIndex::vectorize(const TokenSeq& tokens) const {
  SparseVector v;
  for (const auto& [gram, tf] : count_ngrams(tokens, stopwords_)) {
    auto it = term_id_.find(gram);
    if (it == term_id_.end()) continue;
    v.emplace_back(it->second, static_cast<double>(tf) * idf_[it->second]);
  }
  std::sort(v.begin(), v.end());
  normalize(v);
  return v;
}

std::string TfidfIndex::to_json() const {
  nlohmann::json j;
  j["format"] = "ialcpg-tfidf";
  j["version"] = kFormatVersion;
  j["terms"] = terms_;
  j["idf"] = idf_;
  nlohmann::json chunks = nlohmann::json::array();
  for (std::size_t i = 0; i < refs_.size(); ++i) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [id, w] : vectors_[i]) entries.push_back({id, w});
    chunks.push_back({{"story_id", refs_[i].story_id},
                      {"chunk_index", refs_[i].chunk_index},
                      {"vector", entries}});
  }
  j["chunks"] = chunks;
  return j.dump();
}

TfidfIndex TfidfIndex::from_json(const std::string& text, const StopwordSet& stopwords) {
  TfidfIndex idx;
  idx.stopwords_ = stopwords;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "ialcpg-tfidf") throw DataError("tfidf index: wrong format tag");
    if (j.at("version").get<int>() != kFormatVersion) throw DataError("tfidf index: unsupported version");
    idx.terms_ = j.at("terms").get<std::vector<std::string>>();
    idx.idf_ = j.at("idf").get<std::vector<double>>();
    if (idx.terms_.size() != idx.idf_.size()) throw DataError("tfidf index: term/idf length mismatch");
    for (std::size_t i = 0; i < idx.terms_.size(); ++i) idx.term_id_.emplace(idx.terms_[i], i);
    for (const auto& c : j.at("chunks")) {
      idx.refs_.push_back({c.at("story_id").get<std::string>(), c.at("chunk_index").get<std::size_t>()});
      SparseVector v;
      for (const auto& e : c.at("vector")) {
        const auto id = e.at(0).get<std::size_t>();
        if (id >= idx.terms_.size()) throw DataError("tfidf index: term id out of range");
        v.emplace_back(id, e.at(1).get<double>());
      }
      idx.vectors_.push_back(std::move(v));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("tfidf index: ") + e.what());
  }
  return idx;
}

void TfidfIndex::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write index " + path.string());
  os << to_json() << '\n';
}

TfidfIndex TfidfIndex::load(const std::filesystem::path& path, const StopwordSet& stopwords) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read index " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), stopwords);
}

std::vector<ScoredChunk> rank_chunks(const TfidfIndex& index, const TokenSeq& query, std::size_t top_k) {
  if (top_k < 1) throw UsageError("rank_chunks: top_k must be >= 1");
  const SparseVector q = index.vectorize(query);
  std::vector<ScoredChunk> scored;
  scored.reserve(index.chunk_count());
  for (std::size_t i = 0; i < index.chunk_count(); ++i) {
    scored.push_back({index.refs()[i], i, cosine(q, index.vector_of(i))});
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredChunk& a, const ScoredChunk& b) { return a.score > b.score; });
  if (scored.size() > top_k) scored.resize(top_k);
  return scored;
}

ContextWindow assemble_context(const std::vector<ScoredChunk>& ranked, const std::vector<Chunk>& chunks,
                               std::size_t max_context) {
  if (ranked.empty()) throw UsageError("assemble_context: no ranked chunks");
  std::vector<std::size_t> picked;
  std::size_t total = 0;
  for (const auto& sc : ranked) {
    const std::size_t len = chunks.at(sc.position).tokens.size();
    if (total + len > max_context) break;
    picked.push_back(sc.position);
    total += len;
  }
  ContextWindow w;
  w.chunk_size = chunks.at(ranked.front().position).size_n;
  if (picked.empty()) {
    const Chunk& best = chunks.at(ranked.front().position);
    w.tokens.assign(best.tokens.begin(),
                    best.tokens.begin() + static_cast<std::ptrdiff_t>(std::min(max_context, best.tokens.size())));
    w.provenance.push_back({best.story_id, best.chunk_index});
    return w;
  }
  // Positions follow story order within an index.
  std::sort(picked.begin(), picked.end());
  for (std::size_t p : picked) {
    const Chunk& c = chunks[p];
    w.tokens.insert(w.tokens.end(), c.tokens.begin(), c.tokens.end());
    w.provenance.push_back({c.story_id, c.chunk_index});
  }
  return w;
}

StoryRetriever::StoryRetriever(const Story& story, std::size_t chunk_size, const StopwordSet& stopwords)
    : chunks_(chunk_story(story, chunk_size)), index_(chunks_, stopwords) {}

ContextWindow StoryRetriever::retrieve(const std::string& example_id, const TokenSeq& query,
                                       const RetrievalConfig& config) const {
  ContextWindow w = assemble_context(rank_chunks(index_, query, config.top_k), chunks_, config.max_context);
  w.example_id = example_id;
  return w;
}

TokenSeq answer_query(const QAExample& ex) {
  TokenSeq q = ex.answers[0];
  q.insert(q.end(), ex.answers[1].begin(), ex.answers[1].end());
  return q;
}

TokenSeq question_query(const TokenSeq& question) { return question; }

}  // namespace ialcpg
