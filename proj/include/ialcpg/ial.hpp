#pragma once

// Introspective alignment: context/question affinity, soft alignment,
// comparison features, banded self-attention over those features, and a
// BiLSTM that aggregates everything into the final context representation.

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "ialcpg/autograd.hpp"
#include "ialcpg/encoder.hpp"
#include "ialcpg/params.hpp"

namespace ialcpg {

enum class Activation { kRelu, kTanh };

std::string activation_name(Activation a);
Activation parse_activation(const std::string& s);

/// x -> act(x W + b). A default-constructed transform is the identity.
struct Transform {
  ag::Tensor weight;
  ag::Tensor bias;
  Activation activation = Activation::kRelu;

  bool is_identity() const { return !weight.defined(); }
  ag::Tensor operator()(const ag::Tensor& x) const;
};

Transform make_transform(ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t out,
                         Activation act, std::mt19937_64& rng);

struct AffinityMatrix {
  ag::Tensor scores;                       // l_c x l_q
  std::vector<std::uint8_t> question_mask;  // length l_q
};

/// E_ij = F(h_i^c) . F(h_j^q) with one transform shared by both sides.
AffinityMatrix affinity(const SequenceRep& context, const SequenceRep& question, const Transform& f);

/// Softmax over question positions of each context row, applied to H^q.
ag::Tensor align(const AffinityMatrix& e, const SequenceRep& question);

/// [A, H^c, A - H^c, A * H^c] per row (width 4d).
ag::Tensor enhance(const ag::Tensor& aligned, const ag::Tensor& context);

/// Implicit band |i - j| <= half_width over an n x n grid.
class BandMask {
 public:
  BandMask(std::size_t n, std::size_t half_width) : n_(n), half_width_(half_width) {}
  bool operator()(std::size_t i, std::size_t j) const {
    return i < n_ && j < n_ && (i > j ? i - j : j - i) <= half_width_;
  }
  std::size_t size() const { return n_; }
  std::size_t half_width() const { return half_width_; }
  std::size_t count() const;
  ag::Mask dense() const { return ag::Mask::band(n_, half_width_); }

 private:
  std::size_t n_;
  std::size_t half_width_;
};

/// Self-attention scores restricted to a band, stored as l x (2w + 1) with
/// w = min(b, l - 1). Column m of row i holds the score against j = i - w + m;
/// slots with j outside [0, l) hold -infinity.
struct BandedScores {
  ag::Tensor values;
  std::size_t length = 0;
  std::size_t half_width = 0;

  std::size_t width() const { return 2 * half_width + 1; }
  bool defined(std::size_t i, std::size_t j) const;
  double at(std::size_t i, std::size_t j) const;
  std::size_t defined_count() const;
};

/// Banded P P^T for projected rows P; memory O(l * b).
BandedScores band_scores(const ag::Tensor& projected, std::ptrdiff_t band);
/// Row softmax over each band applied to `values`.
ag::Tensor band_attend(const BandedScores& scores, const ag::Tensor& values);

/// G_ij = F_s(Z_i) . F_s(Z_j) for |i - j| <= band. Throws UsageError if band < 0.
BandedScores introspective_scores(const ag::Tensor& z, const Transform& fs, std::ptrdiff_t band);
/// B = softmax(G) Z over each band.
ag::Tensor introspect(const BandedScores& g, const ag::Tensor& z);
/// Reference path materializing the full l x l score matrix and masking it.
ag::Tensor dense_introspect(const ag::Tensor& z, const Transform& fs, const ag::Mask& mask);

/// Y = BiLSTM([B, Z]) where Z already carries [A, H^c, A - H^c, A * H^c].
SequenceRep aggregate(const ag::Tensor& introspected, const ag::Tensor& z, const std::vector<std::uint8_t>& mask,
                      const BiLstmParams& params);

struct IalOptions {
  std::ptrdiff_t band = 200;
  bool dense_attention = false;  // full self-attention instead of the band
  bool ial_off = false;          // aggregate [A, H^c] directly
  bool enhancement_off = false;  // Z = [A, H^c] without comparison features
  Activation activation = Activation::kRelu;
};

struct IalParams {
  Transform f;
  Transform fs;
  BiLstmParams aggregator;
};

/// Width of Z and of the aggregator input for a given encoder width d.
std::size_t feature_width(std::size_t d, const IalOptions& opt);
std::size_t aggregator_input_width(std::size_t d, const IalOptions& opt);

IalParams make_ial(ParameterSet& params, std::size_t d, const IalOptions& opt, std::mt19937_64& rng);

/// Full layer: returns Y (l_c x 2d).
SequenceRep ial_forward(const SequenceRep& context, const SequenceRep& question, const IalParams& params,
                        const IalOptions& opt);

}  // namespace ialcpg
