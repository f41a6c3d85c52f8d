#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ialcpg {

/// Lowercase, drop one trailing full stop, collapse whitespace runs.
std::string normalize_answer(std::string_view text);

/// Whitespace split of a normalized answer.
std::vector<std::string> answer_tokens(std::string_view text);

using ReferencePair = std::array<std::string, 2>;

/// Corpus BLEU up to order max_n with multi-reference clipping, closest
/// reference length for the brevity penalty, and no smoothing.
double bleu(const std::vector<std::string>& hypotheses, const std::vector<ReferencePair>& references,
            std::size_t max_n);

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// LCS-based F-measure of one hypothesis against one reference.
double rouge_l_single(const std::vector<std::string>& hyp, const std::vector<std::string>& ref,
                      double beta_sq = 1.2);

/// Mean over examples of the max over both references.
double rouge_l(const std::vector<std::string>& hypotheses, const std::vector<ReferencePair>& references);

struct MetricReport {
  double bleu1 = 0.0;
  double bleu4 = 0.0;
  double rouge_l = 0.0;
  std::size_t count = 0;

  std::string to_json() const;
  std::string table() const;
};

/// Inputs are raw strings; all three metrics normalize before scoring.
MetricReport score_all(const std::vector<std::string>& hypotheses, const std::vector<ReferencePair>& references);

}  // namespace ialcpg
