#include "ialcpg/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ialcpg/errors.hpp"

namespace ialcpg {

std::string normalize_answer(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isspace(u)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(u)));
  }
  if (!out.empty() && out.back() == '.') {
    out.pop_back();
    while (!out.empty() && out.back() == ' ') out.pop_back();
  }
  return out;
}

std::vector<std::string> answer_tokens(std::string_view text) {
  std::istringstream in(normalize_answer(text));
  std::vector<std::string> toks;
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

namespace {

void check_lengths(std::size_t h, std::size_t r) {
  if (h != r) {
    throw UsageError("metrics: " + std::to_string(h) + " hypotheses vs " + std::to_string(r) + " references");
  }
}

std::map<std::vector<std::string>, std::size_t> ngram_counts(const std::vector<std::string>& toks, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  if (toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) ++counts[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
  return counts;
}

}  // namespace

double bleu(const std::vector<std::string>& hypotheses, const std::vector<ReferencePair>& references,
            std::size_t max_n) {
  check_lengths(hypotheses.size(), references.size());
  if (max_n == 0) throw UsageError("bleu: max_n must be >= 1");
  std::vector<double> matched(max_n, 0.0), total(max_n, 0.0);
  double hyp_len = 0.0, ref_len = 0.0;

  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto hyp = answer_tokens(hypotheses[i]);
    const std::array<std::vector<std::string>, 2> refs{answer_tokens(references[i][0]),
                                                       answer_tokens(references[i][1])};
    hyp_len += static_cast<double>(hyp.size());
    // Closest reference length; the shorter one on a tie.
    std::size_t best = refs[0].size();
    for (const auto& r : refs) {
      const auto dr = std::abs(static_cast<long>(r.size()) - static_cast<long>(hyp.size()));
      const auto db = std::abs(static_cast<long>(best) - static_cast<long>(hyp.size()));
      if (dr < db || (dr == db && r.size() < best)) best = r.size();
    }
    ref_len += static_cast<double>(best);

    for (std::size_t n = 1; n <= max_n; ++n) {
      const auto hc = ngram_counts(hyp, n);
      const auto r0 = ngram_counts(refs[0], n);
      const auto r1 = ngram_counts(refs[1], n);
      for (const auto& [gram, c] : hc) {
        std::size_t max_ref = 0;
        if (auto it = r0.find(gram); it != r0.end()) max_ref = std::max(max_ref, it->second);
        if (auto it = r1.find(gram); it != r1.end()) max_ref = std::max(max_ref, it->second);
        matched[n - 1] += static_cast<double>(std::min(c, max_ref));
        total[n - 1] += static_cast<double>(c);
      }
    }
  }

  double log_sum = 0.0;
  for (std::size_t n = 0; n < max_n; ++n) {
    if (matched[n] == 0.0 || total[n] == 0.0) return 0.0;
    log_sum += std::log(matched[n] / total[n]);
  }
  const double bp = hyp_len <= ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  return bp * std::exp(log_sum / static_cast<double>(max_n));
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l_single(const std::vector<std::string>& hyp, const std::vector<std::string>& ref, double beta_sq) {
  if (hyp.empty() || ref.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_length(hyp, ref));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(hyp.size());
  const double r = lcs / static_cast<double>(ref.size());
  return (1.0 + beta_sq) * p * r / (r + beta_sq * p);
}

double rouge_l(const std::vector<std::string>& hypotheses, const std::vector<ReferencePair>& references) {
  check_lengths(hypotheses.size(), references.size());
  if (hypotheses.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto hyp = answer_tokens(hypotheses[i]);
    total += std::max(rouge_l_single(hyp, answer_tokens(references[i][0])),
                      rouge_l_single(hyp, answer_tokens(references[i][1])));
  }
  return total / static_cast<double>(hypotheses.size());
}

std::string MetricReport::to_json() const {
  nlohmann::json j;
  j["bleu1"] = bleu1;
  j["bleu4"] = bleu4;
  j["rouge_l"] = rouge_l;
  j["count"] = count;
  return j.dump();
}

std::string MetricReport::table() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-8s | %-8s | %-8s | %s\n%8.2f | %8.2f | %8.2f | %zu\n", "BLEU-1", "BLEU-4",
                "Rouge-L", "count", bleu1 * 100.0, bleu4 * 100.0, rouge_l * 100.0, count);
  return buf;
}

MetricReport score_all(const std::vector<std::string>& hypotheses, const std::vector<ReferencePair>& references) {
  MetricReport r;
  r.count = hypotheses.size();
  if (hypotheses.empty()) {
    check_lengths(0, references.size());
    return r;
  }
  r.bleu1 = bleu(hypotheses, references, 1);
  r.bleu4 = bleu(hypotheses, references, 4);
  r.rouge_l = rouge_l(hypotheses, references);
  return r;
}

}  // namespace ialcpg
