#include "ialcpg/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ialcpg/errors.hpp"

namespace ialcpg {

std::map<std::size_t, SetPair> build_sets(const Dataset& dataset,
                                          const std::vector<const QAExample*>& examples,
                                          const RetrievalConfig& retrieval,
                                          const std::vector<std::size_t>& chunk_sizes,
                                          const StopwordSet& stopwords) {
  std::map<std::size_t, SetPair> sets;
  for (std::size_t k : chunk_sizes) {
    SetPair pair;
    pair.chunk_size = k;
    RetrievalConfig cfg = retrieval;
    cfg.chunk_size = k;
    std::map<std::string, StoryRetriever> retrievers;
    for (const QAExample* ex : examples) {
      auto it = retrievers.find(ex->story_id);
      if (it == retrievers.end()) {
        const Story* story = dataset.find_story(ex->story_id);
        if (!story) throw DataError("build_sets: missing story '" + ex->story_id + "'");
        it = retrievers.emplace(ex->story_id, StoryRetriever(*story, k, stopwords)).first;
      }
      pair.easy.emplace(ex->example_id, it->second.retrieve(ex->example_id, answer_query(*ex), cfg));
      pair.hard.emplace(ex->example_id, it->second.retrieve(ex->example_id, question_query(ex->question), cfg));
    }
    sets.emplace(k, std::move(pair));
  }
  return sets;
}

std::string curriculum_mode_name(CurriculumMode m) {
  switch (m) {
    case CurriculumMode::kFull: return "full";
    case CurriculumMode::kNoAnswerability: return "no-answerability";
    case CurriculumMode::kEasyOnly: return "easy-only";
    case CurriculumMode::kHardOnly: return "hard-only";
  }
  return "full";
}

CurriculumMode parse_curriculum_mode(const std::string& s) {
  if (s == "full") return CurriculumMode::kFull;
  if (s == "no-answerability") return CurriculumMode::kNoAnswerability;
  if (s == "easy-only") return CurriculumMode::kEasyOnly;
  if (s == "hard-only") return CurriculumMode::kHardOnly;
  throw UsageError("unknown curriculum mode '" + s + "'");
}

std::string action_name(CurriculumAction a) {
  switch (a) {
    case CurriculumAction::kImproved: return "improved";
    case CurriculumAction::kSwapped: return "swapped";
    case CurriculumAction::kAdvanced: return "advanced";
    case CurriculumAction::kExhausted: return "exhausted";
  }
  return "improved";
}

namespace {

// ceil for ratios that land on integers up to rounding noise (1 / 0.05).
std::size_t robust_ceil(double x) { return static_cast<std::size_t>(std::ceil(x - 1e-9)); }

void take_next_size(CurriculumState& s) {
  std::size_t pick = 0;
  if (!s.ordered) {
    std::uniform_int_distribution<std::size_t> dist(0, s.remaining_chunk_sizes.size() - 1);
    pick = dist(s.rng);
  }
  s.active_k = s.remaining_chunk_sizes[pick];
  s.remaining_chunk_sizes.erase(s.remaining_chunk_sizes.begin() + static_cast<std::ptrdiff_t>(pick));
  s.swap_count = 0;
  s.swapped_ids.clear();
  if (s.mode == CurriculumMode::kHardOnly) s.swapped_ids.insert(s.example_ids.begin(), s.example_ids.end());
}

}  // namespace

std::size_t CurriculumState::swap_capacity() const { return robust_ceil(1.0 / delta); }

std::size_t CurriculumState::swap_quantum() const {
  return robust_ceil(delta * static_cast<double>(example_ids.size()));
}

CurriculumState init_state(const std::vector<std::size_t>& chunk_sizes, double delta, std::uint64_t seed,
                           std::vector<std::string> example_ids, CurriculumMode mode, bool ordered) {
  if (!(delta > 0.0 && delta <= 1.0)) throw UsageError("curriculum: delta must lie in (0, 1]");
  if (chunk_sizes.empty()) throw UsageError("curriculum: chunk size list is empty");
  CurriculumState s;
  s.remaining_chunk_sizes = chunk_sizes;
  s.delta = delta;
  s.seed = seed;
  s.ordered = ordered;
  s.mode = mode;
  s.rng.seed(seed);
  std::sort(example_ids.begin(), example_ids.end());
  example_ids.erase(std::unique(example_ids.begin(), example_ids.end()), example_ids.end());
  s.example_ids = std::move(example_ids);
  take_next_size(s);
  return s;
}

CurriculumAction on_epoch_end(CurriculumState& s, double dev_score) {
  if (!std::isfinite(dev_score)) throw NumericError("curriculum: dev score is not finite");
  if (!s.has_best || dev_score > s.best_dev) {
    s.best_dev = dev_score;
    s.has_best = true;
    return CurriculumAction::kImproved;
  }
  if (s.mode == CurriculumMode::kEasyOnly || s.mode == CurriculumMode::kHardOnly) {
    return CurriculumAction::kExhausted;
  }
  if (s.mode == CurriculumMode::kFull && s.swap_count < s.swap_capacity()) {
    std::vector<std::string> pool;
    for (const auto& id : s.example_ids)
      if (!s.swapped_ids.count(id)) pool.push_back(id);
    const std::size_t take = std::min(s.swap_quantum(), pool.size());
    // Partial Fisher-Yates: the first `take` slots become the sample.
    for (std::size_t i = 0; i < take; ++i) {
      std::uniform_int_distribution<std::size_t> dist(i, pool.size() - 1);
      std::swap(pool[i], pool[dist(s.rng)]);
      s.swapped_ids.insert(pool[i]);
    }
    ++s.swap_count;
    return CurriculumAction::kSwapped;
  }
  if (!s.remaining_chunk_sizes.empty()) {
    take_next_size(s);
    return CurriculumAction::kAdvanced;
  }
  return CurriculumAction::kExhausted;
}

std::map<std::string, ContextWindow> current_training_set(const CurriculumState& state, const SetPair& sets) {
  std::map<std::string, ContextWindow> out;
  for (const auto& [id, window] : sets.easy) {
    if (state.swapped_ids.count(id)) {
      out.emplace(id, sets.hard.at(id));
    } else {
      out.emplace(id, window);
    }
  }
  return out;
}

std::string training_manifest_json(const CurriculumState& state) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& id : state.example_ids) {
    j[id] = {{"set", state.swapped_ids.count(id) ? "hard" : "easy"}, {"chunk_size", state.active_k}};
  }
  return j.dump(2);
}

std::string CurriculumState::to_json() const {
  std::ostringstream rng_text;
  rng_text << rng;
  nlohmann::json j;
  j["version"] = 1;
  j["remaining_chunk_sizes"] = remaining_chunk_sizes;
  j["active_k"] = active_k;
  j["swap_count"] = swap_count;
  j["swapped_ids"] = swapped_ids;
  j["example_ids"] = example_ids;
  j["best_dev"] = has_best ? nlohmann::json(best_dev) : nlohmann::json(nullptr);
  j["delta"] = delta;
  j["seed"] = seed;
  j["ordered"] = ordered;
  j["mode"] = curriculum_mode_name(mode);
  j["rng_state"] = rng_text.str();
  return j.dump(2);
}

CurriculumState CurriculumState::from_json(const std::string& text) {
  CurriculumState s;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("version").get<int>() != 1) throw DataError("curriculum state: unsupported version");
    s.remaining_chunk_sizes = j.at("remaining_chunk_sizes").get<std::vector<std::size_t>>();
    s.active_k = j.at("active_k").get<std::size_t>();
    s.swap_count = j.at("swap_count").get<std::size_t>();
    s.swapped_ids = j.at("swapped_ids").get<std::set<std::string>>();
    s.example_ids = j.at("example_ids").get<std::vector<std::string>>();
    s.has_best = !j.at("best_dev").is_null();
    s.best_dev = s.has_best ? j.at("best_dev").get<double>() : 0.0;
    s.delta = j.at("delta").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.ordered = j.at("ordered").get<bool>();
    s.mode = parse_curriculum_mode(j.at("mode").get<std::string>());
    std::istringstream rng_text(j.at("rng_state").get<std::string>());
    rng_text >> s.rng;
    if (!rng_text) throw DataError("curriculum state: bad rng_state");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("curriculum state: ") + e.what());
  }
  return s;
}

void CurriculumState::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write curriculum state " + path.string());
  os << to_json() << '\n';
}

CurriculumState CurriculumState::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read curriculum state " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace ialcpg
