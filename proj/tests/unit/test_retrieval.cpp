#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "ialcpg/errors.hpp"
#include "ialcpg/retrieval.hpp"
#include "oracles.hpp"

using namespace ialcpg;

namespace {

const StopwordSet kStop{"the", "a", "of", "and", "is", "to"};

std::vector<Chunk> make_chunks(const std::vector<TokenSeq>& texts, const std::string& story = "s") {
  std::vector<Chunk> out;
  for (std::size_t i = 0; i < texts.size(); ++i) out.push_back({story, i, texts[i], texts[i].size()});
  return out;
}

std::vector<ScoredChunk> ranked_by_index(const std::vector<std::size_t>& order) {
  std::vector<ScoredChunk> out;
  for (std::size_t i : order) out.push_back({{"s", i}, i, 1.0 / static_cast<double>(out.size() + 1)});
  return out;
}

}  // namespace

TEST_SUITE("retrieval") {

TEST_CASE("chunk_story round trip and sizes") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    Story s{"st", {}};
    const std::size_t len = 1 + rng() % 90;
    for (std::size_t i = 0; i < len; ++i) s.tokens.push_back("t" + std::to_string(i));
    const std::size_t n = 1 + rng() % 20;
    const auto chunks = chunk_story(s, n);
    CHECK(chunks.size() == (len + n - 1) / n);
    TokenSeq joined;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      CHECK(chunks[c].chunk_index == c);
      CHECK(chunks[c].size_n == n);
      if (c + 1 < chunks.size()) CHECK(chunks[c].tokens.size() == n);
      joined.insert(joined.end(), chunks[c].tokens.begin(), chunks[c].tokens.end());
    }
    CHECK(joined == s.tokens);
  }
  CHECK_THROWS_AS(chunk_story({"x", {"a"}}, 0), UsageError);
}

TEST_CASE("single chunk single unigram has weight one") {
  TfidfIndex idx(make_chunks({{"cat"}}), kStop);
  REQUIRE(idx.vector_of(0).size() == 1);
  CHECK(idx.vector_of(0)[0].second == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("idf of a term in one of two chunks") {
  TfidfIndex idx(make_chunks({{"cat"}, {"dog"}}), kStop);
  CHECK(idx.idf("cat") == doctest::Approx(std::log(1.5) + 1.0).epsilon(1e-12));
  CHECK(std::abs(idx.idf("cat") - 1.405) < 5e-4);
  CHECK(idx.idf("zebra") < 0.0);
}

TEST_CASE("stopword-only chunk stores a zero vector and ranks last") {
  TfidfIndex idx(make_chunks({{"the", "of", "a"}, {"violin", "music"}}), kStop);
  CHECK(idx.vector_of(0).empty());
  const auto r = rank_chunks(idx, {"violin"}, 5);
  REQUIRE(r.size() == 2);
  CHECK(r[0].position == 1);
  CHECK(r[1].score == 0.0);
}

TEST_CASE("n-gram features keep interior stopwords only") {
  const auto g = count_ngrams({"king", "of", "spain", "the"}, kStop);
  CHECK(g.count("king of spain") == 1);
  CHECK(g.count("of") == 0);
  CHECK(g.count("of spain") == 0);
  CHECK(g.count("spain the") == 0);
  CHECK(g.count("spain") == 1);
  CHECK(count_ngrams({".", "!"}, kStop).empty());
}

TEST_CASE("query identical to a chunk scores one") {
  TfidfIndex idx(make_chunks({{"red", "fox", "jumps"}, {"lazy", "dog", "sleeps"}, {"red", "dog"}}), kStop);
  const auto r = rank_chunks(idx, {"lazy", "dog", "sleeps"}, 3);
  CHECK(r[0].position == 1);
  CHECK(r[0].score == doctest::Approx(1.0).epsilon(1e-9));
  for (const auto& s : rank_chunks(idx, {"nothing", "shared"}, 3)) CHECK(s.score == 0.0);
}

TEST_CASE("ranking matches dense brute-force cosine") {
  const std::vector<TokenSeq> texts{{"the", "violin", "teacher", "played", "music"},
                                    {"a", "teacher", "of", "history"},
                                    {"violin", "strings", "and", "violin", "bows"}};
  TfidfIndex idx(make_chunks(texts), kStop);
  const auto dense = oracle::dense_tfidf(texts, kStop);
  const TokenSeq query{"violin", "teacher"};
  const auto expect = oracle::dense_rank(dense, query, kStop);
  const auto got = rank_chunks(idx, query, 3);
  REQUIRE(got.size() == 3);
  const auto qv = dense.query(query, kStop);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(got[i].position == expect[i]);
    CHECK(got[i].score == doctest::Approx(oracle::dense_cosine(qv, dense.vectors[expect[i]])).epsilon(1e-12));
  }
  CHECK(got[0].position == 0);
}

TEST_CASE("random corpora rank like the dense oracle") {
  std::mt19937_64 rng(9);
  const StopwordSet sw{"w0", "w1"};
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<TokenSeq> texts(2 + rng() % 6);
    for (auto& t : texts) {
      const std::size_t len = 1 + rng() % 12;
      for (std::size_t i = 0; i < len; ++i) t.push_back("w" + std::to_string(rng() % 9));
    }
    TokenSeq query;
    for (std::size_t i = 0; i < 1 + rng() % 5; ++i) query.push_back("w" + std::to_string(rng() % 9));
    TfidfIndex idx(make_chunks(texts), sw);
    const auto dense = oracle::dense_tfidf(texts, sw);
    const auto qv = dense.query(query, sw);
    const auto got = rank_chunks(idx, query, texts.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      const double want = oracle::dense_cosine(qv, dense.vectors[got[i].position]);
      CHECK(got[i].score == doctest::Approx(want).epsilon(1e-9));
      CHECK(got[i].score >= 0.0);
      CHECK(got[i].score <= 1.0 + 1e-9);
      if (i > 0) {
        CHECK(got[i - 1].score >= got[i].score - 1e-12);
        if (std::abs(got[i - 1].score - got[i].score) < 1e-12) CHECK(got[i - 1].position < got[i].position);
      }
    }
    for (std::size_t c = 0; c < texts.size(); ++c) {
      if (idx.vector_of(c).empty()) continue;
      CHECK(cosine(idx.vector_of(c), idx.vector_of(c)) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("top_k truncates and must be positive") {
  TfidfIndex idx(make_chunks({{"a1"}, {"a2"}, {"a3"}}), kStop);
  CHECK(rank_chunks(idx, {"a2"}, 2).size() == 2);
  CHECK_THROWS_AS(rank_chunks(idx, {"a2"}, 0), UsageError);
  CHECK_THROWS_AS(TfidfIndex({}, kStop), UsageError);
}

TEST_CASE("assemble_context budget and story order") {
  std::vector<TokenSeq> texts;
  for (int c = 0; c < 10; ++c) texts.push_back(TokenSeq(50, "c" + std::to_string(c)));
  const auto chunks = make_chunks(texts);
  auto w = assemble_context(ranked_by_index({7, 2, 4, 1, 0}), chunks, 100);
  CHECK(w.tokens.size() == 100);
  REQUIRE(w.provenance.size() == 2);
  CHECK(w.provenance[0].chunk_index == 2);
  CHECK(w.provenance[1].chunk_index == 7);
  CHECK(w.tokens.front() == "c2");
  CHECK(w.tokens.back() == "c7");
}

TEST_CASE("assemble_context truncates an oversized best chunk") {
  const auto chunks = make_chunks({TokenSeq(50, "x"), TokenSeq(50, "y")});
  auto w = assemble_context(ranked_by_index({1, 0}), chunks, 30);
  CHECK(w.tokens == TokenSeq(30, "y"));
  REQUIRE(w.provenance.size() == 1);
  CHECK(w.provenance[0].chunk_index == 1);
  CHECK_THROWS_AS(assemble_context({}, chunks, 30), UsageError);
}

TEST_CASE("index json round trip preserves ranking") {
  const std::vector<TokenSeq> texts{{"red", "fox"}, {"blue", "whale", "song"}, {"red", "whale"}};
  TfidfIndex idx(make_chunks(texts), kStop);
  const auto path = std::filesystem::temp_directory_path() / "ialcpg_tfidf_rt.json";
  idx.save(path);
  TfidfIndex back = TfidfIndex::load(path, kStop);
  std::filesystem::remove(path);
  const auto a = rank_chunks(idx, {"red", "whale"}, 3);
  const auto b = rank_chunks(back, {"red", "whale"}, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].position == b[i].position);
    CHECK(a[i].score == b[i].score);
  }
  CHECK_THROWS_AS(TfidfIndex::from_json("{\"format\":\"other\"}", kStop), DataError);
}

TEST_CASE("answer and question queries") {
  QAExample ex;
  ex.question = {"who", "is", "it", "?"};
  ex.answers = {TokenSeq{"the", "king"}, TokenSeq{"a", "ruler"}};
  CHECK(answer_query(ex) == TokenSeq{"the", "king", "a", "ruler"});
  CHECK(question_query(ex.question) == ex.question);
}

TEST_CASE("story retriever respects the budget") {
  Story s{"s", {}};
  for (int i = 0; i < 40; ++i) s.tokens.push_back("w" + std::to_string(i));
  StoryRetriever r(s, 10, kStop);
  CHECK(r.chunks().size() == 4);
  const auto w = r.retrieve("q", {"w25"}, {10, 20, 1000});
  CHECK(w.tokens.size() == 20);
  CHECK(w.chunk_size == 10);
  CHECK(w.example_id == "q");
  bool has_needle_chunk = false;
  for (const auto& p : w.provenance) has_needle_chunk = has_needle_chunk || p.chunk_index == 2;
  CHECK(has_needle_chunk);
}

}  // TEST_SUITE
