#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "ialcpg/autograd.hpp"
#include "ialcpg/corpus.hpp"
#include "ialcpg/encoder.hpp"
#include "ialcpg/params.hpp"

namespace ialcpg {

struct DecoderParams {
  // h_0 = tanh(mean(Y) W_init + b_init)
  ag::Tensor init_w, init_b;
  // Attentive question pooling: scores = tanh(H^q W_qp) w_qp, pooled row projected by W_qproj.
  ag::Tensor qpool_w, qpool_v, qpool_proj;
  // Attention over Y: g_i = tanh(y_i W_a + b_a + h W_h + q); score = g_i w_a.
  ag::Tensor att_y_w, att_y_b, att_h_w, att_v;
  ag::LstmParams lstm;
  // Vocabulary logits h W_v + b_v.
  ag::Tensor gen_w, gen_b;
  // Bias-free scalar maps feeding the switch.
  ag::Tensor switch_c, switch_h, switch_y;

  std::size_t size() const { return lstm.hidden(); }
};

/// y_width is the width of Y (2d); embed_dim is e; n the decoder size.
DecoderParams make_decoder(ParameterSet& params, std::size_t y_width, std::size_t question_width,
                           std::size_t embed_dim, std::size_t n, std::size_t vocab_size, std::mt19937_64& rng);

struct DecoderState {
  ag::Tensor h;  // 1 x n
  ag::Tensor c;  // 1 x n
  std::size_t t = 0;
};

DecoderState init_decoder(const ag::Tensor& y, const DecoderParams& p);

/// Attentive pooling over question rows, projected to the decoder size (1 x n).
ag::Tensor question_pool(const SequenceRep& question, const DecoderParams& p);

struct AttentionResult {
  ag::Tensor weights;  // 1 x l_c, a distribution over context positions
  ag::Tensor context;  // 1 x width(Y)
};

/// F_a(Y) = Y W_a + b_a, independent of the decoding step.
ag::Tensor project_context(const ag::Tensor& y, const DecoderParams& p);

/// Attention over Y given the previous hidden state and the pooled question.
/// `projected_y` is project_context(y). Masked positions get weight 0.
AttentionResult decode_attention(const ag::Tensor& y, const ag::Tensor& projected_y, const std::vector<std::uint8_t>& mask,
                                 const ag::Tensor& h_prev, const ag::Tensor& q_pooled, const DecoderParams& p);

/// One LSTM step on [y_t, w_{t-1}].
DecoderState decoder_step(const ag::Tensor& y_t, const ag::Tensor& prev_embedding, const DecoderState& state,
                          const DecoderParams& p);

/// softmax(h W_v + b_v) over the vocabulary entries enabled in `allowed`
/// (empty = all).
ag::Tensor generate_dist(const ag::Tensor& h, const DecoderParams& p, const std::vector<std::uint8_t>& allowed = {});

/// p_t = sigmoid(c . w_c + h . w_h + y_t . w_y), a 1x1 tensor.
ag::Tensor switch_gate(const ag::Tensor& c, const ag::Tensor& h, const ag::Tensor& y_t, const DecoderParams& p);

/// [p * a, (1 - p) * v]: the first context_length entries are pointer
/// outcomes, the rest vocabulary outcomes.
struct BlendedDistribution {
  ag::Tensor probs;  // 1 x (l_c + |V_g|)
  ag::Tensor p;      // 1 x 1
  std::size_t context_length = 0;
};

BlendedDistribution blend(const ag::Tensor& a, const ag::Tensor& v, const ag::Tensor& p);

struct DecodeStep {
  std::size_t argmax = 0;  // index into the blended distribution
  bool pointer = false;
  std::size_t index = 0;  // context position or vocabulary id
  Token token;
  double p = 0.0;
};

struct DecodeResult {
  TokenSeq tokens;  // emission up to the first PAD
  std::vector<DecodeStep> steps;
};

/// Produces the blended distribution for step t given the input-vocabulary id
/// of the previous output (BOS at t = 0).
using StepFunction = std::function<BlendedDistribution(std::size_t t, int prev_input_id)>;

/// Runs exactly max_len greedy steps; lowest index wins argmax ties. Pointer
/// outcomes emit the context token at that position.
DecodeResult greedy_decode(const StepFunction& step, const TokenSeq& context, const Vocab& gen_vocab,
                           const Vocab& input_vocab, std::size_t max_len);

}  // namespace ialcpg
