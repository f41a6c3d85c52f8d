#include "ialcpg/model.hpp"

#include <random>

#include "ialcpg/errors.hpp"

namespace ialcpg {

IalCpgModel::IalCpgModel(const ModelConfig& config, Vocab input_vocab, Vocab gen_vocab)
    : config_(config), input_vocab_(std::move(input_vocab)), gen_vocab_(std::move(gen_vocab)) {
  if (config_.d == 0 || config_.d % 2 != 0) throw UsageError("encoder width d must be even and positive");
  if (config_.n == 0 || config_.e == 0) throw UsageError("decoder size and embedding dim must be positive");
  std::mt19937_64 rng(config_.seed);
  embeddings_ = params_.add("embed", make_embedding_table(input_vocab_.size(), config_.e, config_.embed_stddev, rng),
                            ParamKind::kFrozen);
  encoder_ = make_bilstm(params_, "enc", config_.e, config_.d / 2, rng);
  ial_ = make_ial(params_, config_.d, config_.ial, rng);
  decoder_ = make_decoder(params_, 2 * config_.d, config_.d, config_.e, config_.n, gen_vocab_.size(), rng);
  if (config_.pg_off) {
    allowed_.assign(gen_vocab_.size(), 0);
    allowed_[Vocab::kPad] = 1;
  }
}

IalCpgModel::Encoding IalCpgModel::encode(const std::vector<int>& context_ids,
                                          const std::vector<int>& question_ids) const {
  if (context_ids.empty()) throw DataError("empty context");
  std::vector<int> q = question_ids;
  if (q.empty()) q.push_back(Vocab::kUnk);

  Encoding enc;
  enc.context = bilstm(embed(context_ids, embeddings_), encoder_);
  enc.question = bilstm(embed(q, embeddings_), encoder_);
  enc.y = ial_forward(enc.context, enc.question, ial_, config_.ial);
  enc.projected_y = project_context(enc.y.rows, decoder_);
  enc.question_pooled = question_pool(enc.question, decoder_);
  enc.initial = init_decoder(enc.y.rows, decoder_);
  return enc;
}

IalCpgModel::Encoding IalCpgModel::encode(const TokenSeq& context, const TokenSeq& question) const {
  return encode(input_vocab_.encode(context), input_vocab_.encode(question));
}

IalCpgModel::Step IalCpgModel::step(const Encoding& enc, const DecoderState& prev, int prev_input_id) const {
  const AttentionResult att =
      decode_attention(enc.y.rows, enc.projected_y, enc.y.mask, prev.h, enc.question_pooled, decoder_);
  const int id = prev_input_id;
  const ag::Tensor w_prev = ag::embedding_lookup(embeddings_, std::span<const int>(&id, 1));
  Step out;
  out.state = decoder_step(att.context, w_prev, prev, decoder_);
  const ag::Tensor v = generate_dist(out.state.h, decoder_, allowed_);
  const ag::Tensor p = switch_gate(out.state.c, out.state.h, att.context, decoder_);
  out.dist = blend(att.weights, v, p);
  return out;
}

std::vector<BlendedDistribution> IalCpgModel::teacher_forced(const Encoding& enc, const TokenSeq& answer,
                                                             std::size_t steps) const {
  std::vector<BlendedDistribution> dists;
  dists.reserve(steps);
  DecoderState state = enc.initial;
  int prev = Vocab::kBos;
  for (std::size_t t = 0; t < steps; ++t) {
    Step s = step(enc, state, prev);
    dists.push_back(s.dist);
    state = s.state;
    prev = t < answer.size() ? input_vocab_.id_or_unk(answer[t]) : Vocab::kPad;
  }
  return dists;
}

DecodeResult IalCpgModel::decode(const TokenSeq& context, const TokenSeq& question, std::size_t max_len) const {
  const Encoding enc = encode(context, question);
  DecoderState state = enc.initial;
  auto fn = [&](std::size_t, int prev) {
    Step s = step(enc, state, prev);
    state = s.state;
    return s.dist;
  };
  return greedy_decode(fn, context, gen_vocab_, input_vocab_, max_len);
}

}  // namespace ialcpg
