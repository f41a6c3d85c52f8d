#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "doctest.h"
#include "ialcpg/errors.hpp"
#include "ialcpg/metrics.hpp"
#include "oracles.hpp"

using namespace ialcpg;

namespace {

std::vector<std::string> words(std::mt19937_64& rng, std::size_t n, std::size_t alphabet) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(rng() % alphabet));
  return out;
}

std::string join(const std::vector<std::string>& toks) {
  std::string s;
  for (const auto& t : toks) s += (s.empty() ? "" : " ") + t;
  return s;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("normalization") {
  CHECK(normalize_answer("Violin.") == "violin");
  CHECK(normalize_answer("RUSSIA") == "russia");
  CHECK(normalize_answer("a. b.") == "a. b");
  CHECK(normalize_answer("  two   spaces ") == "two spaces");
  CHECK(normalize_answer("end .") == "end");
  CHECK(normalize_answer("") == "");
  CHECK(answer_tokens("The  Cat.") == std::vector<std::string>{"the", "cat"});
}

TEST_CASE("bleu worked example") {
  const std::vector<std::string> h{"the cat the cat"};
  const std::vector<ReferencePair> r{{"the cat sat", "the cat sat"}};
  CHECK(bleu(h, r, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(bleu(h, r, 4) == 0.0);
  CHECK_THROWS_AS(bleu(h, r, 0), UsageError);
}

TEST_CASE("bleu brevity penalty and clipping") {
  // Hypothesis shorter than the closest reference.
  const std::vector<std::string> h{"a b"};
  const std::vector<ReferencePair> r{{"a b c", "a b c d e"}};
  CHECK(bleu(h, r, 1) == doctest::Approx(std::exp(1.0 - 3.0 / 2.0)).epsilon(1e-14));
  // Clip by the larger count over both references.
  const std::vector<std::string> h2{"x x x"};
  const std::vector<ReferencePair> r2{{"x y z", "x x q"}};
  CHECK(bleu(h2, r2, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("rouge-l worked examples") {
  CHECK(rouge_l_single({"a", "b", "c", "d"}, {"a", "c", "d"}) ==
        doctest::Approx(2.2 * 0.75 / (1.0 + 1.2 * 0.75)).epsilon(1e-14));
  CHECK(rouge_l_single({"a", "b", "c", "d"}, {"a", "c", "d"}) == doctest::Approx(0.868421052631579).epsilon(1e-12));
  const double p = 0.5, r = 2.0 / 3.0;
  CHECK(rouge_l_single({"the", "cat", "the", "cat"}, {"the", "cat", "sat"}) ==
        doctest::Approx(2.2 * p * r / (r + 1.2 * p)).epsilon(1e-14));
  CHECK(rouge_l_single({}, {"a"}) == 0.0);
  CHECK(rouge_l_single({"a"}, {"b"}) == 0.0);
}

TEST_CASE("identical and disjoint inputs") {
  const std::vector<std::string> h{"one two three four five"};
  const std::vector<ReferencePair> same{{"one two three four five", "zzz"}};
  const auto s = score_all(h, same);
  CHECK(s.bleu1 == doctest::Approx(1.0));
  CHECK(s.bleu4 == doctest::Approx(1.0));
  CHECK(s.rouge_l == doctest::Approx(1.0));
  const std::vector<ReferencePair> far{{"six seven", "eight"}};
  const auto d = score_all(h, far);
  CHECK(d.bleu1 == 0.0);
  CHECK(d.bleu4 == 0.0);
  CHECK(d.rouge_l == 0.0);
  CHECK_THROWS_AS(score_all(h, {}), UsageError);
  CHECK_THROWS_AS(rouge_l({}, same), UsageError);
}

TEST_CASE("lcs matches subsequence enumeration") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = words(rng, rng() % 10, 4), b = words(rng, rng() % 10, 4);
    CHECK(lcs_length(a, b) == oracle::lcs_brute(a, b));
    CHECK(lcs_length(a, b) == lcs_length(b, a));
  }
}

TEST_CASE("self score is one") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> h;
    std::vector<ReferencePair> r;
    for (int i = 0; i < 5; ++i) {
      const auto s = join(words(rng, 4 + rng() % 5, 20));
      h.push_back(s);
      r.push_back({s, join(words(rng, 3, 20))});
    }
    const auto m = score_all(h, r);
    CHECK(m.bleu1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.bleu4 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.rouge_l == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("scores ignore example order") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::string> h;
    std::vector<ReferencePair> r;
    for (int i = 0; i < 8; ++i) {
      h.push_back(join(words(rng, 1 + rng() % 6, 6)));
      r.push_back({join(words(rng, 1 + rng() % 6, 6)), join(words(rng, 1 + rng() % 6, 6))});
    }
    std::vector<std::size_t> perm(8);
    for (std::size_t i = 0; i < 8; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::string> hp;
    std::vector<ReferencePair> rp;
    for (auto i : perm) {
      hp.push_back(h[i]);
      rp.push_back(r[i]);
    }
    const auto a = score_all(h, r), b = score_all(hp, rp);
    CHECK(a.bleu1 == doctest::Approx(b.bleu1).epsilon(1e-13));
    CHECK(a.bleu4 == doctest::Approx(b.bleu4).epsilon(1e-13));
    CHECK(a.rouge_l == doctest::Approx(b.rouge_l).epsilon(1e-13));
  }
}

TEST_CASE("bleu-4 never exceeds bleu-1") {
  // Hypotheses of four tokens or more, so every order has candidates.
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> h;
    std::vector<ReferencePair> r;
    for (int i = 0; i < 6; ++i) {
      h.push_back(join(words(rng, 4 + rng() % 5, 3)));
      r.push_back({join(words(rng, 1 + rng() % 8, 3)), join(words(rng, 1 + rng() % 8, 3))});
    }
    CHECK(bleu(h, r, 4) <= bleu(h, r, 1) + 1e-12);
  }
}

TEST_CASE("a second reference never lowers rouge-l") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto hyp = join(words(rng, 1 + rng() % 6, 5));
    const auto ref = join(words(rng, 1 + rng() % 6, 5));
    const auto other = join(words(rng, 1 + rng() % 6, 5));
    CHECK(rouge_l({hyp}, {{ref, other}}) >= rouge_l({hyp}, {{ref, ref}}) - 1e-15);
  }
}

TEST_CASE("report formats") {
  MetricReport r{0.5, 0.25, 0.75, 3};
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["bleu1"] == 0.5);
  CHECK(j["bleu4"] == 0.25);
  CHECK(j["rouge_l"] == 0.75);
  CHECK(j["count"] == 3);
  const auto t = r.table();
  CHECK(t.find("BLEU-1") != std::string::npos);
  CHECK(t.find("75.00") != std::string::npos);
  const auto empty = score_all({}, {});
  CHECK(empty.count == 0);
  CHECK(empty.rouge_l == 0.0);
}

}  // TEST_SUITE
