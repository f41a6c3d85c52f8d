#include "ialcpg/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ialcpg/errors.hpp"

namespace ialcpg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw UsageError("config: bad value '" + v + "' for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("config: bad boolean '" + v + "' for " + key);
}

std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(parse_number<std::size_t>(key, trim(part)));
  return out;
}

std::string join(const std::vector<std::size_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

}  // namespace

void TrainConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "d") d = parse_number<std::size_t>(key, v);
  else if (key == "n") n = parse_number<std::size_t>(key, v);
  else if (key == "e") e = parse_number<std::size_t>(key, v);
  else if (key == "band") band = parse_number<std::ptrdiff_t>(key, v);
  else if (key == "chunk_sizes") chunk_sizes = parse_sizes(key, v);
  else if (key == "chunk_order") chunk_order = parse_bool(key, v);
  else if (key == "delta") delta = parse_number<double>(key, v);
  else if (key == "max_context") max_context = parse_number<std::size_t>(key, v);
  else if (key == "top_k") top_k = parse_number<std::size_t>(key, v);
  else if (key == "max_answer_len") max_answer_len = parse_number<std::size_t>(key, v);
  else if (key == "max_question_len") max_question_len = parse_number<std::size_t>(key, v);
  else if (key == "learning_rate") learning_rate = parse_number<double>(key, v);
  else if (key == "l2") l2 = parse_number<double>(key, v);
  else if (key == "epochs") epochs = parse_number<std::size_t>(key, v);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, v);
  else if (key == "min_stories") min_stories = parse_number<std::size_t>(key, v);
  else if (key == "embed_stddev") embed_stddev = parse_number<double>(key, v);
  else if (key == "embedding_file") embedding_file = v;
  else if (key == "activation") activation = parse_activation(v);
  else if (key == "ial_off") ial_off = parse_bool(key, v);
  else if (key == "dense_attention") dense_attention = parse_bool(key, v);
  else if (key == "enhancement_off") enhancement_off = parse_bool(key, v);
  else if (key == "pg_off") pg_off = parse_bool(key, v);
  else if (key == "curriculum_mode") curriculum_mode = parse_curriculum_mode(v);
  else if (key == "corpus") corpus = v;
  else if (key == "out_dir") out_dir = v;
  else throw UsageError("config: unknown key '" + key + "'");
}

void TrainConfig::validate() const {
  if (d == 0 || d % 2 != 0) throw UsageError("config: d must be even and positive");
  if (n == 0 || e == 0) throw UsageError("config: n and e must be positive");
  if (band < 0) throw UsageError("config: band must be >= 0");
  if (chunk_sizes.empty()) throw UsageError("config: chunk_sizes is empty");
  for (auto k : chunk_sizes)
    if (k == 0) throw UsageError("config: chunk sizes must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw UsageError("config: delta must lie in (0, 1]");
  if (max_context == 0 || top_k == 0) throw UsageError("config: max_context and top_k must be >= 1");
  if (max_answer_len == 0) throw UsageError("config: max_answer_len must be >= 1");
  if (max_question_len == 0) throw UsageError("config: max_question_len must be >= 1");
  if (!(learning_rate > 0.0)) throw UsageError("config: learning_rate must be > 0");
  if (!(l2 >= 0.0)) throw UsageError("config: l2 must be >= 0");
  if (min_stories == 0) throw UsageError("config: min_stories must be >= 1");
}

std::string TrainConfig::to_text() const {
  std::ostringstream o;
  o.precision(17);
  o << "d = " << d << "\n"
    << "n = " << n << "\n"
    << "e = " << e << "\n"
    << "band = " << band << "\n"
    << "chunk_sizes = " << join(chunk_sizes) << "\n"
    << "chunk_order = " << (chunk_order ? "true" : "false") << "\n"
    << "delta = " << delta << "\n"
    << "max_context = " << max_context << "\n"
    << "top_k = " << top_k << "\n"
    << "max_answer_len = " << max_answer_len << "\n"
    << "max_question_len = " << max_question_len << "\n"
    << "learning_rate = " << learning_rate << "\n"
    << "l2 = " << l2 << "\n"
    << "epochs = " << epochs << "\n"
    << "seed = " << seed << "\n"
    << "min_stories = " << min_stories << "\n"
    << "embed_stddev = " << embed_stddev << "\n"
    << "embedding_file = " << embedding_file << "\n"
    << "activation = " << activation_name(activation) << "\n"
    << "ial_off = " << (ial_off ? "true" : "false") << "\n"
    << "dense_attention = " << (dense_attention ? "true" : "false") << "\n"
    << "enhancement_off = " << (enhancement_off ? "true" : "false") << "\n"
    << "pg_off = " << (pg_off ? "true" : "false") << "\n"
    << "curriculum_mode = " << curriculum_mode_name(curriculum_mode) << "\n"
    << "corpus = " << corpus << "\n"
    << "out_dir = " << out_dir << "\n";
  return o.str();
}

TrainConfig parse_config(const std::string& text, const std::string& source) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(source + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const UsageError& e) {
      throw UsageError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

const std::vector<Ablation>& ablations() {
  static const std::vector<Ablation> table{
      {"full", "complete model with the swap-then-advance curriculum"},
      {"no-ial", "alignment output aggregated directly, no introspection"},
      {"full-attention", "self-attention over all context positions instead of the band"},
      {"no-enhancement", "introspection over [A, H^c] without subtraction and product features"},
      {"no-pg", "vocabulary block limited to the stop symbol, no curriculum (easy set, first size)"},
      {"no-understandability", "swaps only, fixed at the first chunk size"},
      {"no-answerability", "advance chunk size on each failure, never swap"},
      {"easy-only", "static easy set"},
      {"hard-only", "static hard set"},
      {"order-50-100-200", "chunk sizes 50, 100, 200 in order"},
      {"order-50-100-200-500", "chunk sizes 50, 100, 200, 500 in order"},
      {"order-100-200-500-50", "chunk sizes 100, 200, 500, 50 in order"},
      {"order-500-50-100-200", "chunk sizes 500, 50, 100, 200 in order"},
      {"order-500-200-100-50", "chunk sizes 500, 200, 100, 50 in order"},
      {"static-50", "single chunk size 50"},
      {"static-500", "single chunk size 500"},
  };
  return table;
}

void apply_ablation(TrainConfig& c, const std::string& name) {
  auto ordered = [&c](std::vector<std::size_t> sizes) {
    c.chunk_sizes = std::move(sizes);
    c.chunk_order = true;
  };
  if (name == "full") return;
  if (name == "no-ial") c.ial_off = true;
  else if (name == "full-attention") c.dense_attention = true;
  else if (name == "no-enhancement") c.enhancement_off = true;
  else if (name == "no-pg") {
    c.pg_off = true;
    c.curriculum_mode = CurriculumMode::kEasyOnly;
    c.chunk_sizes.resize(1);
  } else if (name == "no-understandability") {
    c.chunk_sizes.resize(1);
  } else if (name == "no-answerability") c.curriculum_mode = CurriculumMode::kNoAnswerability;
  else if (name == "easy-only") c.curriculum_mode = CurriculumMode::kEasyOnly;
  else if (name == "hard-only") c.curriculum_mode = CurriculumMode::kHardOnly;
  else if (name == "order-50-100-200") ordered({50, 100, 200});
  else if (name == "order-50-100-200-500") ordered({50, 100, 200, 500});
  else if (name == "order-100-200-500-50") ordered({100, 200, 500, 50});
  else if (name == "order-500-50-100-200") ordered({500, 50, 100, 200});
  else if (name == "order-500-200-100-50") ordered({500, 200, 100, 50});
  else if (name == "static-50") ordered({50});
  else if (name == "static-500") ordered({500});
  else throw UsageError("unknown ablation '" + name + "'");
}

}  // namespace ialcpg
