#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ialcpg/corpus.hpp"
#include "ialcpg/retrieval.hpp"

namespace ialcpg {

/// Easy (answer-cued) and hard (question-cued) windows for one chunk size.
struct SetPair {
  std::size_t chunk_size = 0;
  std::map<std::string, ContextWindow> easy;
  std::map<std::string, ContextWindow> hard;
};

/// Builds one SetPair per chunk size for `examples`.
std::map<std::size_t, SetPair> build_sets(const Dataset& dataset,
                                          const std::vector<const QAExample*>& examples,
                                          const RetrievalConfig& retrieval,
                                          const std::vector<std::size_t>& chunk_sizes,
                                          const StopwordSet& stopwords);

enum class CurriculumMode {
  kFull,             // swaps within a size, then advance to a new size
  kNoAnswerability,  // advance on every failure, never swap
  kEasyOnly,         // static easy set
  kHardOnly,         // static hard set
};

std::string curriculum_mode_name(CurriculumMode m);
CurriculumMode parse_curriculum_mode(const std::string& s);

enum class CurriculumAction { kImproved, kSwapped, kAdvanced, kExhausted };

std::string action_name(CurriculumAction a);

struct CurriculumState {
  std::vector<std::size_t> remaining_chunk_sizes;
  std::size_t active_k = 0;
  std::size_t swap_count = 0;
  std::set<std::string> swapped_ids;
  std::vector<std::string> example_ids;  // sorted; the population swaps draw from
  double best_dev = 0.0;
  bool has_best = false;
  double delta = 0.05;
  std::uint64_t seed = 0;
  bool ordered = false;  // take sizes in list order instead of sampling
  CurriculumMode mode = CurriculumMode::kFull;
  std::mt19937_64 rng;

  /// ceil(1 / delta): swap events allowed within one chunk size.
  std::size_t swap_capacity() const;
  /// ceil(delta * N): ids moved per swap event.
  std::size_t swap_quantum() const;

  std::string to_json() const;
  static CurriculumState from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static CurriculumState load(const std::filesystem::path& path);
};

/// Picks the first chunk size (uniformly at random unless `ordered`) and starts
/// from the easy set. Hard-only mode starts with every id swapped.
CurriculumState init_state(const std::vector<std::size_t>& chunk_sizes, double delta, std::uint64_t seed,
                           std::vector<std::string> example_ids, CurriculumMode mode = CurriculumMode::kFull,
                           bool ordered = false);

/// Scheduler transition after one epoch's dev evaluation.
CurriculumAction on_epoch_end(CurriculumState& state, double dev_score);

/// Swapped ids take their hard window, the rest their easy window.
std::map<std::string, ContextWindow> current_training_set(const CurriculumState& state, const SetPair& sets);

/// Audit listing: example_id -> {"set": "easy"|"hard", "chunk_size": k}.
std::string training_manifest_json(const CurriculumState& state);

}  // namespace ialcpg
