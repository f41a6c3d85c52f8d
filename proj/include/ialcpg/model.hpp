#pragma once

// The full reader: frozen embeddings, shared BiLSTM encoder, introspective
// alignment, and the pointer-generator decoder.

#include <cstdint>
#include <vector>

#include "ialcpg/corpus.hpp"
#include "ialcpg/encoder.hpp"
#include "ialcpg/ial.hpp"
#include "ialcpg/params.hpp"
#include "ialcpg/pointer_decoder.hpp"

namespace ialcpg {

struct ModelConfig {
  std::size_t d = 128;  // encoder width, d/2 per direction
  std::size_t n = 256;  // decoder size
  std::size_t e = 64;   // embedding dim
  double embed_stddev = 0.1;
  IalOptions ial;
  // Vocabulary block restricted to PAD: the decoder can copy or stop, never generate.
  bool pg_off = false;
  std::uint64_t seed = 1;
};

class IalCpgModel {
 public:
  IalCpgModel(const ModelConfig& config, Vocab input_vocab, Vocab gen_vocab);

  // Sub-module handles alias tensors in params_; copying would share them.
  IalCpgModel(const IalCpgModel&) = delete;
  IalCpgModel& operator=(const IalCpgModel&) = delete;

  const ModelConfig& config() const { return config_; }
  const Vocab& input_vocab() const { return input_vocab_; }
  const Vocab& gen_vocab() const { return gen_vocab_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  const ag::Tensor& embeddings() const { return embeddings_; }
  const DecoderParams& decoder() const { return decoder_; }

  struct Encoding {
    SequenceRep context;  // H^c
    SequenceRep question;  // H^q
    SequenceRep y;
    ag::Tensor projected_y;
    ag::Tensor question_pooled;
    DecoderState initial;
  };

  Encoding encode(const std::vector<int>& context_ids, const std::vector<int>& question_ids) const;
  Encoding encode(const TokenSeq& context, const TokenSeq& question) const;

  struct Step {
    BlendedDistribution dist;
    DecoderState state;
  };
  Step step(const Encoding& enc, const DecoderState& prev, int prev_input_id) const;

  /// Blended distributions for `steps` steps where step t conditions on the
  /// gold token t-1 (BOS first).
  std::vector<BlendedDistribution> teacher_forced(const Encoding& enc, const TokenSeq& answer,
                                                  std::size_t steps) const;

  DecodeResult decode(const TokenSeq& context, const TokenSeq& question, std::size_t max_len) const;

  /// Allowed vocabulary entries; empty means all.
  const std::vector<std::uint8_t>& vocab_allowed() const { return allowed_; }

 private:
  ModelConfig config_;
  Vocab input_vocab_;
  Vocab gen_vocab_;
  ParameterSet params_;
  ag::Tensor embeddings_;
  BiLstmParams encoder_;
  IalParams ial_;
  DecoderParams decoder_;
  std::vector<std::uint8_t> allowed_;
};

}  // namespace ialcpg
