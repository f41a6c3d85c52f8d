#include "ialcpg/pointer_decoder.hpp"

#include "ialcpg/errors.hpp"

namespace ialcpg {

DecoderParams make_decoder(ParameterSet& params, std::size_t y_width, std::size_t question_width,
                           std::size_t embed_dim, std::size_t n, std::size_t vocab_size, std::mt19937_64& rng) {
  DecoderParams p;
  using K = ParamKind;
  p.init_w = params.add("dec.init.w", glorot_uniform(y_width, n, rng), K::kWeight);
  p.init_b = params.add("dec.init.b", ag::Tensor::zeros(1, n), K::kBias);
  p.qpool_w = params.add("dec.qpool.w", glorot_uniform(question_width, question_width, rng), K::kWeight);
  p.qpool_v = params.add("dec.qpool.v", glorot_uniform(question_width, 1, rng), K::kWeight);
  p.qpool_proj = params.add("dec.qpool.proj", glorot_uniform(question_width, n, rng), K::kWeight);
  p.att_y_w = params.add("dec.att.y_w", glorot_uniform(y_width, n, rng), K::kWeight);
  p.att_y_b = params.add("dec.att.y_b", ag::Tensor::zeros(1, n), K::kBias);
  p.att_h_w = params.add("dec.att.h_w", glorot_uniform(n, n, rng), K::kWeight);
  p.att_v = params.add("dec.att.v", glorot_uniform(n, 1, rng), K::kWeight);
  p.lstm.w_x = params.add("dec.lstm.w_x", glorot_uniform(y_width + embed_dim, 4 * n, rng), K::kWeight);
  p.lstm.w_h = params.add("dec.lstm.w_h", glorot_uniform(n, 4 * n, rng), K::kWeight);
  p.lstm.bias = params.add("dec.lstm.bias", ag::Tensor::zeros(1, 4 * n), K::kBias);
  p.gen_w = params.add("dec.gen.w", glorot_uniform(n, vocab_size, rng), K::kWeight);
  p.gen_b = params.add("dec.gen.b", ag::Tensor::zeros(1, vocab_size), K::kBias);
  p.switch_c = params.add("dec.switch.c", glorot_uniform(n, 1, rng), K::kWeight);
  p.switch_h = params.add("dec.switch.h", glorot_uniform(n, 1, rng), K::kWeight);
  p.switch_y = params.add("dec.switch.y", glorot_uniform(y_width, 1, rng), K::kWeight);
  return p;
}

DecoderState init_decoder(const ag::Tensor& y, const DecoderParams& p) {
  if (y.rows() == 0) throw ShapeError("init_decoder: empty Y");
  const ag::Tensor pooled = ag::mean_pool(y, 0);
  return {ag::tanh(ag::add_bias(ag::matmul(pooled, p.init_w), p.init_b)), ag::Tensor::zeros(1, p.size()), 0};
}

ag::Tensor question_pool(const SequenceRep& question, const DecoderParams& p) {
  if (question.length() == 0) throw ShapeError("question_pool: empty question");
  const ag::Tensor scores = ag::transpose(ag::matmul(ag::tanh(ag::matmul(question.rows, p.qpool_w)), p.qpool_v));
  const ag::Tensor weights = ag::masked_softmax(scores, ag::Mask::rows_of(1, question.mask));
  return ag::matmul(ag::matmul(weights, question.rows), p.qpool_proj);
}

ag::Tensor project_context(const ag::Tensor& y, const DecoderParams& p) {
  return ag::add_bias(ag::matmul(y, p.att_y_w), p.att_y_b);
}

AttentionResult decode_attention(const ag::Tensor& y, const ag::Tensor& projected_y, const std::vector<std::uint8_t>& mask,
                                 const ag::Tensor& h_prev, const ag::Tensor& q_pooled, const DecoderParams& p) {
  if (mask.size() != y.rows()) throw ShapeError("decode_attention: mask length does not match Y " + y.shape_str());
  // The step term F_h(h) + F_q(H^q) is the same for every position.
  const ag::Tensor shared = ag::add(ag::matmul(h_prev, p.att_h_w), q_pooled);
  const ag::Tensor g = ag::tanh(ag::add_bias(projected_y, shared));
  const ag::Tensor scores = ag::transpose(ag::matmul(g, p.att_v));
  const ag::Tensor a = ag::masked_softmax(scores, ag::Mask::rows_of(1, mask));
  return {a, ag::matmul(a, y)};
}

DecoderState decoder_step(const ag::Tensor& y_t, const ag::Tensor& prev_embedding, const DecoderState& state,
                          const DecoderParams& p) {
  const ag::Tensor x = ag::concat({y_t, prev_embedding}, 1);
  auto next = ag::lstm_cell(x, state.h, state.c, p.lstm);
  return {next.h, next.c, state.t + 1};
}

ag::Tensor generate_dist(const ag::Tensor& h, const DecoderParams& p, const std::vector<std::uint8_t>& allowed) {
  const ag::Tensor logits = ag::add_bias(ag::matmul(h, p.gen_w), p.gen_b);
  const ag::Mask mask = allowed.empty() ? ag::Mask::all(1, logits.cols()) : ag::Mask::rows_of(1, allowed);
  return ag::masked_softmax(logits, mask);
}

ag::Tensor switch_gate(const ag::Tensor& c, const ag::Tensor& h, const ag::Tensor& y_t, const DecoderParams& p) {
  const ag::Tensor pre =
      ag::add(ag::add(ag::matmul(c, p.switch_c), ag::matmul(h, p.switch_h)), ag::matmul(y_t, p.switch_y));
  return ag::sigmoid(pre);
}

BlendedDistribution blend(const ag::Tensor& a, const ag::Tensor& v, const ag::Tensor& p) {
  if (a.rows() != 1 || v.rows() != 1) throw ShapeError("blend: expected row distributions, got " +
                                                       a.shape_str() + " and " + v.shape_str());
  return {ag::concat({ag::scalar_mul(p, a), ag::scalar_mul(ag::one_minus(p), v)}, 1), p, a.cols()};
}

DecodeResult greedy_decode(const StepFunction& step, const TokenSeq& context, const Vocab& gen_vocab,
                           const Vocab& input_vocab, std::size_t max_len) {
  DecodeResult result;
  int prev = Vocab::kBos;
  bool stopped = false;
  for (std::size_t t = 0; t < max_len; ++t) {
    const BlendedDistribution dist = step(t, prev);
    const auto probs = dist.probs.values();
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i)
      if (probs[i] > probs[best]) best = i;

    DecodeStep rec;
    rec.argmax = best;
    rec.p = dist.p.item();
    if (best < dist.context_length) {
      rec.pointer = true;
      rec.index = best;
      rec.token = context.at(best);
      prev = input_vocab.id_or_unk(rec.token);
    } else {
      rec.index = best - dist.context_length;
      rec.token = gen_vocab.token(static_cast<int>(rec.index));
      prev = rec.index < Vocab::kNumSpecial ? static_cast<int>(rec.index) : input_vocab.id_or_unk(rec.token);
    }
    if (!rec.pointer && rec.index == static_cast<std::size_t>(Vocab::kPad)) stopped = true;
    if (!stopped) result.tokens.push_back(rec.token);
    result.steps.push_back(std::move(rec));
  }
  return result;
}

}  // namespace ialcpg
