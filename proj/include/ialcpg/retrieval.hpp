#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ialcpg/corpus.hpp"

namespace ialcpg {

struct Chunk {
  std::string story_id;
  std::size_t chunk_index = 0;
  TokenSeq tokens;
  std::size_t size_n = 0;
};

/// Splits a story into ceil(len / n) consecutive chunks; only the last may be short.
std::vector<Chunk> chunk_story(const Story& story, std::size_t n);

struct ChunkRef {
  std::string story_id;
  std::size_t chunk_index = 0;
  bool operator==(const ChunkRef&) const = default;
};

/// Sparse L2-normalized TF-IDF vector: (term id, weight) sorted by term id.
using SparseVector = std::vector<std::pair<std::size_t, double>>;

/// TF-IDF over word 1..3-grams. tf is the raw count in the chunk and
/// idf = ln((1 + N) / (1 + df)) + 1 with N chunks. An n-gram is a feature only
/// if its first and last tokens are content tokens (not a stopword and not
/// punctuation-only); interior stopwords are kept.
class TfidfIndex {
 public:
  static constexpr std::size_t kMaxN = 3;
  static constexpr int kFormatVersion = 1;

  TfidfIndex() = default;
  /// Throws UsageError on an empty chunk list.
  TfidfIndex(const std::vector<Chunk>& chunks, const StopwordSet& stopwords);

  std::size_t chunk_count() const { return refs_.size(); }
  const std::vector<ChunkRef>& refs() const { return refs_; }
  const SparseVector& vector_of(std::size_t position) const { return vectors_.at(position); }
  std::size_t term_count() const { return terms_.size(); }
  /// idf of an n-gram whose tokens are joined by single spaces; negative if absent.
  double idf(const std::string& ngram) const;
  const std::vector<double>& idf_table() const { return idf_; }

  /// Query vector under this index's vocabulary and idf; unknown n-grams drop out.
  SparseVector vectorize(const TokenSeq& tokens) const;

  void save(const std::filesystem::path& path) const;
  static TfidfIndex load(const std::filesystem::path& path, const StopwordSet& stopwords);
  std::string to_json() const;
  static TfidfIndex from_json(const std::string& text, const StopwordSet& stopwords);

 private:
  StopwordSet stopwords_;
  std::unordered_map<std::string, std::size_t> term_id_;
  std::vector<std::string> terms_;
  std::vector<double> idf_;
  std::vector<ChunkRef> refs_;
  std::vector<SparseVector> vectors_;
};

/// Content n-grams (joined by spaces) of a token sequence with raw counts.
std::map<std::string, std::size_t> count_ngrams(const TokenSeq& tokens, const StopwordSet& stopwords,
                                                std::size_t max_n = TfidfIndex::kMaxN);

double cosine(const SparseVector& a, const SparseVector& b);

struct ScoredChunk {
  ChunkRef ref;
  std::size_t position = 0;  // index of the chunk inside the TfidfIndex
  double score = 0.0;
};

/// Top `top_k` chunks by cosine score, descending; ties keep index order
/// (story order, then chunk_index).
std::vector<ScoredChunk> rank_chunks(const TfidfIndex& index, const TokenSeq& query, std::size_t top_k);

struct ContextWindow {
  std::string example_id;
  std::size_t chunk_size = 0;
  TokenSeq tokens;
  std::vector<ChunkRef> provenance;
};

/// Takes ranked chunks in order while the running total stays within
/// max_context, then restores story order. If the best chunk alone exceeds
/// the budget it is truncated to max_context tokens.
ContextWindow assemble_context(const std::vector<ScoredChunk>& ranked, const std::vector<Chunk>& chunks,
                               std::size_t max_context);

struct RetrievalConfig {
  std::size_t chunk_size = 50;
  std::size_t max_context = 2000;
  std::size_t top_k = 1000;
};

/// Chunks and index of one story at one chunk size.
class StoryRetriever {
 public:
  StoryRetriever(const Story& story, std::size_t chunk_size, const StopwordSet& stopwords);

  ContextWindow retrieve(const std::string& example_id, const TokenSeq& query,
                         const RetrievalConfig& config) const;
  const std::vector<Chunk>& chunks() const { return chunks_; }
  const TfidfIndex& index() const { return index_; }

 private:
  std::vector<Chunk> chunks_;
  TfidfIndex index_;
};

/// Answer-cued query: both reference answers concatenated.
TokenSeq answer_query(const QAExample& ex);
/// Question-cued query. Takes only the question so inference-time retrieval
/// cannot see answers.
TokenSeq question_query(const TokenSeq& question);

}  // namespace ialcpg
