#include "ialcpg/ial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "ialcpg/errors.hpp"

namespace ialcpg {

std::string activation_name(Activation a) { return a == Activation::kRelu ? "relu" : "tanh"; }

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  throw UsageError("unknown activation '" + s + "'");
}

ag::Tensor Transform::operator()(const ag::Tensor& x) const {
  if (is_identity()) return x;
  ag::Tensor pre = ag::add_bias(ag::matmul(x, weight), bias);
  return activation == Activation::kRelu ? ag::relu(pre) : ag::tanh(pre);
}

Transform make_transform(ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t out,
                         Activation act, std::mt19937_64& rng) {
  Transform t;
  t.weight = params.add(prefix + ".w", glorot_uniform(in, out, rng), ParamKind::kWeight);
  t.bias = params.add(prefix + ".b", ag::Tensor::zeros(1, out), ParamKind::kBias);
  t.activation = act;
  return t;
}

AffinityMatrix affinity(const SequenceRep& context, const SequenceRep& question, const Transform& f) {
  if (context.width() != question.width()) {
    throw ShapeError("affinity: context " + context.rows.shape_str() + " and question " +
                     question.rows.shape_str() + " widths differ");
  }
  const ag::Tensor fc = f(context.rows);
  const ag::Tensor fq = f(question.rows);
  return {ag::matmul(fc, ag::transpose(fq)), question.mask};
}

ag::Tensor align(const AffinityMatrix& e, const SequenceRep& question) {
  const ag::Mask mask = ag::Mask::rows_of(e.scores.rows(), e.question_mask);
  return ag::matmul(ag::masked_softmax(e.scores, mask), question.rows);
}

ag::Tensor enhance(const ag::Tensor& aligned, const ag::Tensor& context) {
  return ag::concat({aligned, context, ag::sub(aligned, context), ag::hadamard(aligned, context)}, 1);
}

std::size_t BandMask::count() const {
  std::size_t total = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t lo = i > half_width_ ? i - half_width_ : 0;
    const std::size_t hi = std::min(n_ - 1, i + half_width_);
    total += hi - lo + 1;
  }
  return total;
}

bool BandedScores::defined(std::size_t i, std::size_t j) const {
  return i < length && j < length && (i > j ? i - j : j - i) <= half_width;
}

double BandedScores::at(std::size_t i, std::size_t j) const {
  if (!defined(i, j)) return -std::numeric_limits<double>::infinity();
  return values(i, j + half_width - i);
}

std::size_t BandedScores::defined_count() const { return BandMask(length, half_width).count(); }

namespace {

// Slot m of row i maps to column j = i - w + m; returns the valid slot range.
std::pair<std::size_t, std::size_t> slot_range(std::size_t i, std::size_t w, std::size_t n) {
  const std::size_t first = i >= w ? 0 : w - i;
  const std::size_t last = std::min(2 * w, w + (n - 1 - i));
  return {first, last};
}

}  // namespace

BandedScores band_scores(const ag::Tensor& projected, std::ptrdiff_t band) {
  if (band < 0) throw UsageError("band half-width must be >= 0, got " + std::to_string(band));
  const std::size_t n = projected.rows();
  if (n == 0) throw ShapeError("band_scores: empty input");
  const std::size_t k = projected.cols();
  const std::size_t w = std::min(static_cast<std::size_t>(band), n - 1);
  const std::size_t width = 2 * w + 1;

  ag::Tensor out = ag::make_result(n, width, {projected}, [n, k, w, width](ag::Node& self) {
    ag::Node& P = *self.inputs[0];
    for (std::size_t i = 0; i < n; ++i) {
      const auto [first, last] = slot_range(i, w, n);
      for (std::size_t m = first; m <= last; ++m) {
        const double g = self.grad[i * width + m];
        if (g == 0.0) continue;
        const std::size_t j = i + m - w;
        for (std::size_t c = 0; c < k; ++c) {
          P.grad[i * k + c] += g * P.value[j * k + c];
          P.grad[j * k + c] += g * P.value[i * k + c];
        }
      }
    }
  });
  auto v = out.mutable_values();
  std::fill(v.begin(), v.end(), -std::numeric_limits<double>::infinity());
  const auto pv = projected.values();
  for (std::size_t i = 0; i < n; ++i) {
    const auto [first, last] = slot_range(i, w, n);
    for (std::size_t m = first; m <= last; ++m) {
      const std::size_t j = i + m - w;
      double dot = 0.0;
      for (std::size_t c = 0; c < k; ++c) dot += pv[i * k + c] * pv[j * k + c];
      v[i * width + m] = dot;
    }
  }
  return {out, n, w};
}

ag::Tensor band_attend(const BandedScores& scores, const ag::Tensor& values) {
  const std::size_t n = scores.length, w = scores.half_width, width = scores.width();
  if (values.rows() != n) {
    throw ShapeError("band_attend: scores cover " + std::to_string(n) + " rows, values are " + values.shape_str());
  }
  const std::size_t k = values.cols();
  auto probs = std::make_shared<std::vector<double>>(n * width, 0.0);
  const auto sv = scores.values.values();
  for (std::size_t i = 0; i < n; ++i) {
    const auto [first, last] = slot_range(i, w, n);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t m = first; m <= last; ++m) mx = std::max(mx, sv[i * width + m]);
    double total = 0.0;
    for (std::size_t m = first; m <= last; ++m) {
      (*probs)[i * width + m] = std::exp(sv[i * width + m] - mx);
      total += (*probs)[i * width + m];
    }
    for (std::size_t m = first; m <= last; ++m) (*probs)[i * width + m] /= total;
  }

  ag::Tensor out = ag::make_result(n, k, {scores.values, values}, [n, w, width, k, probs](ag::Node& self) {
    ag::Node& G = *self.inputs[0];
    ag::Node& V = *self.inputs[1];
    const auto& p = *probs;
    std::vector<double> dp(width);
    for (std::size_t i = 0; i < n; ++i) {
      const auto [first, last] = slot_range(i, w, n);
      const double* gout = &self.grad[i * k];
      double weighted = 0.0;
      for (std::size_t m = first; m <= last; ++m) {
        const std::size_t j = i + m - w;
        const double pij = p[i * width + m];
        double d = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
          d += gout[c] * V.value[j * k + c];
          if (V.requires_grad) V.grad[j * k + c] += pij * gout[c];
        }
        dp[m] = d;
        weighted += pij * d;
      }
      if (G.requires_grad) {
        for (std::size_t m = first; m <= last; ++m) G.grad[i * width + m] += p[i * width + m] * (dp[m] - weighted);
      }
    }
  });
  auto ov = out.mutable_values();
  const auto vv = values.values();
  for (std::size_t i = 0; i < n; ++i) {
    const auto [first, last] = slot_range(i, w, n);
    for (std::size_t m = first; m <= last; ++m) {
      const std::size_t j = i + m - w;
      const double pij = (*probs)[i * width + m];
      for (std::size_t c = 0; c < k; ++c) ov[i * k + c] += pij * vv[j * k + c];
    }
  }
  return out;
}

BandedScores introspective_scores(const ag::Tensor& z, const Transform& fs, std::ptrdiff_t band) {
  if (band < 0) throw UsageError("band half-width must be >= 0, got " + std::to_string(band));
  return band_scores(fs(z), band);
}

ag::Tensor introspect(const BandedScores& g, const ag::Tensor& z) { return band_attend(g, z); }

ag::Tensor dense_introspect(const ag::Tensor& z, const Transform& fs, const ag::Mask& mask) {
  const ag::Tensor p = fs(z);
  const ag::Tensor g = ag::matmul(p, ag::transpose(p));
  return ag::matmul(ag::masked_softmax(g, mask), z);
}

SequenceRep aggregate(const ag::Tensor& introspected, const ag::Tensor& z, const std::vector<std::uint8_t>& mask,
                      const BiLstmParams& params) {
  return bilstm({ag::concat({introspected, z}, 1), mask}, params);
}

std::size_t feature_width(std::size_t d, const IalOptions& opt) { return opt.enhancement_off ? 2 * d : 4 * d; }

std::size_t aggregator_input_width(std::size_t d, const IalOptions& opt) {
  return opt.ial_off ? 2 * d : 2 * feature_width(d, opt);
}

IalParams make_ial(ParameterSet& params, std::size_t d, const IalOptions& opt, std::mt19937_64& rng) {
  IalParams p;
  p.f = make_transform(params, "ial.f", d, d, opt.activation, rng);
  if (!opt.ial_off) {
    const std::size_t zw = feature_width(d, opt);
    p.fs = make_transform(params, "ial.fs", zw, zw, opt.activation, rng);
  }
  p.aggregator = make_bilstm(params, "ial.aggregate", aggregator_input_width(d, opt), d, rng);
  return p;
}

SequenceRep ial_forward(const SequenceRep& context, const SequenceRep& question, const IalParams& params,
                        const IalOptions& opt) {
  const ag::Tensor a = align(affinity(context, question, params.f), question);
  if (opt.ial_off) return bilstm({ag::concat({a, context.rows}, 1), context.mask}, params.aggregator);

  const ag::Tensor z = opt.enhancement_off ? ag::concat({a, context.rows}, 1) : enhance(a, context.rows);
  ag::Tensor b;
  if (opt.dense_attention) {
    b = dense_introspect(z, params.fs, ag::Mask::all(z.rows(), z.rows()));
  } else {
    b = introspect(introspective_scores(z, params.fs, opt.band), z);
  }
  return aggregate(b, z, context.mask, params.aggregator);
}

}  // namespace ialcpg
