#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ialcpg/gradcheck.hpp"
#include "ialcpg/model.hpp"

namespace ialcpg {

struct MicroDims {
  std::size_t d = 4;
  std::size_t n = 6;
  std::size_t e = 4;
  std::size_t context_len = 12;
  std::size_t question_len = 5;
  std::size_t gen_vocab = 9;  // including the three specials
  std::size_t steps = 3;
  std::ptrdiff_t band = 3;
};

/// Random micro model plus one teacher-forced example.
struct MicroProblem {
  std::unique_ptr<IalCpgModel> model;
  TokenSeq context;
  TokenSeq question;
  TokenSeq answer;
  std::vector<GoldLabel> labels;
};

MicroProblem make_micro_problem(const MicroDims& dims, std::uint64_t seed, const IalOptions& ial = {},
                                bool pg_off = false);

struct SuiteCase {
  std::string name;
  ag::GradCheckReport report;
};

struct SuiteReport {
  std::vector<SuiteCase> cases;
  double seconds = 0.0;
  bool passed() const;
  double max_rel_error() const;
  std::string to_text() const;
};

/// Every primitive on random small shapes.
SuiteReport check_primitives(std::uint64_t seed, double eps = 1e-5, double tol = 1e-4);
/// Teacher-forced NLL of the composed micro model, wrt every trainable parameter.
SuiteReport check_micro_model(const MicroDims& dims, std::uint64_t seed, double eps = 1e-5, double tol = 1e-4);

SuiteReport run_gradcheck_suite(std::uint64_t seed);

}  // namespace ialcpg
