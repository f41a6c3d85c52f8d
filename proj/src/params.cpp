#include "ialcpg/params.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "ialcpg/errors.hpp"

namespace ialcpg {

namespace {

constexpr char kMagic[8] = {'I', 'A', 'L', 'C', 'P', 'G', 'C', 'K'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::istream& is, const std::filesystem::path& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw DataError("checkpoint " + path.string() + ": truncated file");
  }
  return v;
}

}  // namespace

ag::Tensor& ParameterSet::add(std::string name, ag::Tensor tensor, ParamKind kind) {
  if (contains(name)) throw UsageError("duplicate parameter name: " + name);
  tensor.set_requires_grad(kind != ParamKind::kFrozen);
  params_.push_back({std::move(name), std::move(tensor), kind});
  return params_.back().tensor;
}

ag::Tensor& ParameterSet::get(const std::string& name) {
  for (auto& p : params_)
    if (p.name == name) return p.tensor;
  throw UsageError("unknown parameter: " + name);
}

const ag::Tensor& ParameterSet::get(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return p.tensor;
  throw UsageError("unknown parameter: " + name);
}

bool ParameterSet::contains(const std::string& name) const {
  return std::any_of(params_.begin(), params_.end(), [&](const Parameter& p) { return p.name == name; });
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

ag::Tensor ParameterSet::l2_term() const {
  ag::Tensor total = ag::Tensor::scalar(0.0);
  for (const auto& p : params_)
    if (p.kind == ParamKind::kWeight) total = ag::add(total, ag::sum_squares(p.tensor));
  return total;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

ag::Tensor glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = dist(rng);
  return ag::Tensor::from(rows, cols, std::move(v));
}

ag::Tensor gaussian(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = dist(rng);
  return ag::Tensor::from(rows, cols, std::move(v));
}

void save_checkpoint(const ParameterSet& params, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot write checkpoint " + path.string());
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, kCheckpointVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params.all()) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint8_t>(os, static_cast<std::uint8_t>(p.kind));
    put<std::uint8_t>(os, 0);
    put<std::uint32_t>(os, 2);
    put<std::uint64_t>(os, p.tensor.rows());
    put<std::uint64_t>(os, p.tensor.cols());
    const auto v = p.tensor.values();
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!os) throw DataError("failed writing checkpoint " + path.string());
}

void load_checkpoint(ParameterSet& params, const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read checkpoint " + path.string());
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw DataError("checkpoint " + path.string() + ": bad magic");
  }
  const auto version = take<std::uint32_t>(is, path);
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint " + path.string() + ": unsupported version " + std::to_string(version));
  }
  const auto count = take<std::uint32_t>(is, path);
  if (count != params.size()) {
    throw DataError("checkpoint " + path.string() + ": holds " + std::to_string(count) +
                    " tensors, model has " + std::to_string(params.size()));
  }
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto len = take<std::uint32_t>(is, path);
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) throw DataError("checkpoint " + path.string() + ": truncated name");
    const auto kind = take<std::uint8_t>(is, path);
    const auto dtype = take<std::uint8_t>(is, path);
    const auto rank = take<std::uint32_t>(is, path);
    if (dtype != 0 || rank != 2) {
      throw DataError("checkpoint " + path.string() + ": tensor " + name + " has unsupported dtype/rank");
    }
    const auto rows = take<std::uint64_t>(is, path);
    const auto cols = take<std::uint64_t>(is, path);
    if (!params.contains(name)) throw DataError("checkpoint " + path.string() + ": unknown tensor " + name);
    auto& t = params.get(name);
    if (t.rows() != rows || t.cols() != cols) {
      throw DataError("checkpoint " + path.string() + ": tensor " + name + " shape mismatch");
    }
    auto it = std::find_if(params.all().begin(), params.all().end(),
                           [&](const Parameter& p) { return p.name == name; });
    if (static_cast<std::uint8_t>(it->kind) != kind) {
      throw DataError("checkpoint " + path.string() + ": tensor " + name + " kind mismatch");
    }
    auto v = t.mutable_values();
    if (!is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)))) {
      throw DataError("checkpoint " + path.string() + ": truncated values for " + name);
    }
  }
}

}  // namespace ialcpg
