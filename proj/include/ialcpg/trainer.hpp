#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ialcpg/config.hpp"
#include "ialcpg/corpus.hpp"
#include "ialcpg/curriculum.hpp"
#include "ialcpg/metrics.hpp"
#include "ialcpg/model.hpp"

namespace ialcpg {

/// Mean NLL over labels that are not ignored, plus l2 * (sum of squared
/// weight-matrix entries) when params is given. Throws DataError if every
/// label is ignored.
ag::Tensor step_loss(const std::vector<BlendedDistribution>& dists, const std::vector<GoldLabel>& gold,
                     const ParameterSet* params = nullptr, double l2 = 0.0);

/// Position of a gold label inside the blended index space.
std::size_t blended_index(const GoldLabel& label, std::size_t context_length);

struct AdadeltaState {
  double rho = 0.95;
  double eps = 1e-6;
  double learning_rate = 1.0;
  std::vector<std::vector<double>> sq_grad;    // E[g^2]
  std::vector<std::vector<double>> sq_update;  // E[dx^2]
};

/// One update over every trainable parameter using its accumulated grad.
void adadelta_update(ParameterSet& params, AdadeltaState& state);

/// Gold labels for one answer plus a trailing PAD stop label when the answer
/// is shorter than max_answer_len. Without the generator only PAD survives in
/// the vocabulary block.
std::vector<GoldLabel> training_targets(const TokenSeq& context, const TokenSeq& answer, const Vocab& gen_vocab,
                                        const StopwordSet& stopwords, std::size_t max_answer_len, bool pg_off);

/// One document per story: its text followed by the questions and answers of
/// the given examples, so story counts see answer-only words too.
std::vector<Story> vocab_documents(const Dataset& dataset, const std::vector<const QAExample*>& examples);

/// Question-cued windows only; answers never reach the query.
std::map<std::string, ContextWindow> question_windows(const Dataset& dataset,
                                                      const std::vector<const QAExample*>& examples,
                                                      const RetrievalConfig& retrieval, std::size_t chunk_size,
                                                      const StopwordSet& stopwords);

struct Prediction {
  std::string example_id;
  std::string answer;
  DecodeResult decode;
};

struct Evaluation {
  MetricReport report;
  std::vector<Prediction> predictions;
  std::size_t exact = 0;
};

bool exact_match(const std::string& prediction, const QAExample& ex);
std::string join_tokens(const TokenSeq& tokens);

Evaluation evaluate(const IalCpgModel& model, const std::vector<const QAExample*>& examples,
                    const std::map<std::string, ContextWindow>& windows, std::size_t max_answer_len);

ModelConfig model_config(const TrainConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  std::size_t targets = 0;  // answer targets that contributed a gradient step
  MetricReport dev;
  std::string action;
  std::size_t active_k = 0;
  std::size_t swap_count = 0;
  std::size_t swapped = 0;

  std::string to_json() const;
};

struct TrainOptions {
  bool write_files = true;
  // Called after each epoch; returning true stops training.
  std::function<bool(const EpochRecord&, const IalCpgModel&)> on_epoch;
};

struct TrainResult {
  std::unique_ptr<IalCpgModel> model;
  std::vector<EpochRecord> log;
  CurriculumState curriculum;
};

/// Everything derived from the dataset before the first epoch.
struct TrainingData {
  Vocab input_vocab;
  Vocab gen_vocab;
  std::vector<const QAExample*> train;
  std::vector<const QAExample*> dev;
  std::map<std::size_t, SetPair> sets;
  std::map<std::size_t, std::map<std::string, ContextWindow>> dev_windows;
};

TrainingData prepare(const TrainConfig& cfg, const Dataset& dataset, const StopwordSet& stopwords);

TrainResult train(const TrainConfig& cfg, const Dataset& dataset, const StopwordSet& stopwords,
                  const TrainOptions& options = {});

/// Rebuilds a trained model from a run directory written by train().
std::unique_ptr<IalCpgModel> load_run(const std::filesystem::path& dir, TrainConfig* cfg_out = nullptr,
                                      const std::string& checkpoint = "");

}  // namespace ialcpg
