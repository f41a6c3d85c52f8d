#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ialcpg/autograd.hpp"

namespace ialcpg {

/// How a parameter participates in optimization and regularization.
enum class ParamKind : std::uint8_t {
  kWeight = 0,  // trainable, L2-penalized
  kBias = 1,    // trainable, not penalized
  kFrozen = 2,  // never updated (pretrained-style embedding tables)
};

struct Parameter {
  std::string name;
  ag::Tensor tensor;
  ParamKind kind = ParamKind::kWeight;

  bool trainable() const { return kind != ParamKind::kFrozen; }
};

/// Named parameters of one model; names are unique.
class ParameterSet {
 public:
  /// Registers a new parameter. Trainable tensors get requires_grad set.
  ag::Tensor& add(std::string name, ag::Tensor tensor, ParamKind kind);

  ag::Tensor& get(const std::string& name);
  const ag::Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::vector<Parameter>& all() { return params_; }
  const std::vector<Parameter>& all() const { return params_; }
  std::size_t size() const { return params_.size(); }

  void zero_grad();
  /// Sum of squared entries of every kWeight parameter, as a graph node.
  ag::Tensor l2_term() const;
  std::size_t scalar_count() const;

 private:
  std::vector<Parameter> params_;
};

// Initializers drawing from a caller-owned engine so model construction is
// a pure function of the seed.
ag::Tensor glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng);
ag::Tensor gaussian(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng);

// Checkpoint container: magic "IALCPGCK", u32 version, u32 count, then per
// tensor: u32 name length, name bytes, u8 kind, u8 dtype (0 = float64),
// u32 rank, u64 dims[rank], raw little-endian values.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ParameterSet& params, const std::filesystem::path& path);
/// Loads values into an existing set; names, kinds and shapes must match.
void load_checkpoint(ParameterSet& params, const std::filesystem::path& path);

}  // namespace ialcpg
