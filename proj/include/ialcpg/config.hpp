#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ialcpg/curriculum.hpp"
#include "ialcpg/ial.hpp"

namespace ialcpg {

struct TrainConfig {
  std::size_t d = 128;
  std::size_t n = 256;
  std::size_t e = 64;
  std::ptrdiff_t band = 200;
  std::vector<std::size_t> chunk_sizes{50, 100, 200, 500};
  bool chunk_order = false;  // take chunk sizes in listed order
  double delta = 0.05;
  std::size_t max_context = 2000;
  std::size_t top_k = 1000;
  std::size_t max_answer_len = 8;
  std::size_t max_question_len = 30;
  double learning_rate = 0.5;
  double l2 = 1e-6;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  std::size_t min_stories = 10;
  double embed_stddev = 0.1;
  std::string embedding_file;  // optional; empty keeps random vectors
  Activation activation = Activation::kRelu;

  bool ial_off = false;
  bool dense_attention = false;
  bool enhancement_off = false;
  bool pg_off = false;
  CurriculumMode curriculum_mode = CurriculumMode::kFull;

  std::string corpus;  // JSONL dataset path
  std::string out_dir = "run";

  /// Applies one key = value assignment; throws UsageError for unknown keys
  /// or malformed values.
  void set(const std::string& key, const std::string& value);
  /// Checks ranges; throws UsageError.
  void validate() const;
  std::string to_text() const;
};

/// key = value lines; '#' starts a comment.
TrainConfig parse_config(const std::string& text, const std::string& source = "<config>");
TrainConfig load_config(const std::filesystem::path& path);

/// Named configurations mirroring the ablation table rows.
struct Ablation {
  std::string name;
  std::string description;
};
const std::vector<Ablation>& ablations();
/// Throws UsageError for unknown names.
void apply_ablation(TrainConfig& config, const std::string& name);

}  // namespace ialcpg
