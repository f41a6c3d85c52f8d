#include "ialcpg/encoder.hpp"

#include <fstream>
#include <sstream>

#include "ialcpg/errors.hpp"

namespace ialcpg {

ag::Tensor make_embedding_table(std::size_t vocab_size, std::size_t dim, double stddev, std::mt19937_64& rng) {
  ag::Tensor table = gaussian(vocab_size, dim, stddev, rng);
  for (std::size_t j = 0; j < dim; ++j) table.at(Vocab::kPad, j) = 0.0;
  return table;
}

std::size_t load_embedding_file(const std::filesystem::path& path, const Vocab& vocab, ag::Tensor& table) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read embedding file " + path.string());
  std::size_t replaced = 0, lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;
    std::vector<double> values;
    double v = 0.0;
    while (ls >> v) values.push_back(v);
    if (values.size() != table.cols()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(table.cols()) + " values, got " + std::to_string(values.size()));
    }
    const auto id = vocab.find(token);
    if (!id || *id == Vocab::kPad) continue;
    for (std::size_t j = 0; j < values.size(); ++j) table.at(static_cast<std::size_t>(*id), j) = values[j];
    ++replaced;
  }
  return replaced;
}

SequenceRep embed(std::span<const int> ids, const ag::Tensor& table) {
  SequenceRep rep{ag::embedding_lookup(table, ids), {}};
  rep.mask.reserve(ids.size());
  for (int id : ids) rep.mask.push_back(id == Vocab::kPad ? 0 : 1);
  return rep;
}

namespace {

ag::LstmParams make_lstm(ParameterSet& params, const std::string& prefix, std::size_t input_dim,
                         std::size_t hidden, std::mt19937_64& rng) {
  ag::LstmParams p;
  p.w_x = params.add(prefix + ".w_x", glorot_uniform(input_dim, 4 * hidden, rng), ParamKind::kWeight);
  p.w_h = params.add(prefix + ".w_h", glorot_uniform(hidden, 4 * hidden, rng), ParamKind::kWeight);
  p.bias = params.add(prefix + ".bias", ag::Tensor::zeros(1, 4 * hidden), ParamKind::kBias);
  return p;
}

}  // namespace

BiLstmParams make_bilstm(ParameterSet& params, const std::string& prefix, std::size_t input_dim,
                         std::size_t hidden_per_direction, std::mt19937_64& rng) {
  BiLstmParams p;
  p.forward = make_lstm(params, prefix + ".fwd", input_dim, hidden_per_direction, rng);
  p.backward = make_lstm(params, prefix + ".bwd", input_dim, hidden_per_direction, rng);
  return p;
}

ag::Tensor run_lstm(const SequenceRep& inputs, const ag::LstmParams& params, bool reverse) {
  if (inputs.width() != params.input()) {
    throw ShapeError("lstm: input width " + std::to_string(inputs.width()) + " does not match parameters " +
                     params.w_x.shape_str());
  }
  const std::size_t n = inputs.length();
  const std::size_t h = params.hidden();
  const ag::Tensor projected = ag::add_bias(ag::matmul(inputs.rows, params.w_x), params.bias);
  std::vector<ag::Tensor> out(n);
  ag::Tensor hs = ag::Tensor::zeros(1, h);
  ag::Tensor cs = ag::Tensor::zeros(1, h);
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t i = reverse ? n - 1 - step : step;
    if (!inputs.mask[i]) {
      out[i] = ag::Tensor::zeros(1, h);
      continue;
    }
    auto st = ag::lstm_cell_projected(ag::row(projected, i), hs, cs, params);
    hs = st.h;
    cs = st.c;
    out[i] = hs;
  }
  return ag::concat(out, 0);
}

SequenceRep bilstm(const SequenceRep& inputs, const BiLstmParams& params) {
  if (inputs.length() == 0) throw ShapeError("bilstm: empty sequence");
  if (inputs.mask.size() != inputs.length()) throw ShapeError("bilstm: mask length mismatch");
  ag::Tensor fwd = run_lstm(inputs, params.forward, false);
  ag::Tensor bwd = run_lstm(inputs, params.backward, true);
  return {ag::concat({fwd, bwd}, 1), inputs.mask};
}

}  // namespace ialcpg
