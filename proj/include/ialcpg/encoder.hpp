#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ialcpg/autograd.hpp"
#include "ialcpg/corpus.hpp"
#include "ialcpg/params.hpp"

namespace ialcpg {

/// A sequence of row vectors plus a per-row validity mask (false = PAD).
struct SequenceRep {
  ag::Tensor rows;
  std::vector<std::uint8_t> mask;

  std::size_t length() const { return rows.rows(); }
  std::size_t width() const { return rows.cols(); }
};

/// |V| x e frozen table; row PAD (0) is all zeros.
ag::Tensor make_embedding_table(std::size_t vocab_size, std::size_t dim, double stddev, std::mt19937_64& rng);

/// Overwrites rows for tokens listed in a text vector file ("token v1 ... ve"
/// per line). Returns the number of rows replaced; PAD is never touched.
std::size_t load_embedding_file(const std::filesystem::path& path, const Vocab& vocab, ag::Tensor& table);

/// Looks up ids; id PAD yields a zero row and a false mask entry.
SequenceRep embed(std::span<const int> ids, const ag::Tensor& table);

struct BiLstmParams {
  ag::LstmParams forward;
  ag::LstmParams backward;
  std::size_t hidden_per_direction() const { return forward.hidden(); }
};

/// Registers "<prefix>.fwd.*" and "<prefix>.bwd.*" LSTM weights.
BiLstmParams make_bilstm(ParameterSet& params, const std::string& prefix, std::size_t input_dim,
                         std::size_t hidden_per_direction, std::mt19937_64& rng);

/// Runs one LSTM over the valid rows of `inputs` in the given direction;
/// returns one hidden row per input row (zero rows at PAD positions).
ag::Tensor run_lstm(const SequenceRep& inputs, const ag::LstmParams& params, bool reverse);

/// Left-to-right and right-to-left passes over valid rows, concatenated per
/// position into width 2 * hidden_per_direction. PAD rows stay zero.
SequenceRep bilstm(const SequenceRep& inputs, const BiLstmParams& params);

}  // namespace ialcpg
