#include "ialcpg/gradcheck_suite.hpp"

#include <chrono>
#include <cstdio>
#include <random>

#include "ialcpg/errors.hpp"
#include "ialcpg/ial.hpp"
#include "ialcpg/trainer.hpp"

namespace ialcpg {

using ag::Tensor;

bool SuiteReport::passed() const {
  for (const auto& c : cases)
    if (!c.report.passed) return false;
  return true;
}

double SuiteReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& c : cases) m = std::max(m, c.report.max_rel_error());
  return m;
}

std::string SuiteReport::to_text() const {
  std::string out;
  char buf[256];
  for (const auto& c : cases) {
    std::size_t checked = 0, excluded = 0;
    for (const auto& e : c.report.entries) {
      checked += e.checked;
      excluded += e.excluded;
    }
    std::snprintf(buf, sizeof buf, "%-4s %-28s max_rel_err=%.3e checked=%zu excluded=%zu\n",
                  c.report.passed ? "ok" : "FAIL", c.name.c_str(), c.report.max_rel_error(), checked, excluded);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%s: %zu cases, max_rel_err=%.3e, %.2fs\n", passed() ? "PASS" : "FAIL",
                cases.size(), max_rel_error(), seconds);
  out += buf;
  return out;
}

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0,
                     bool grad = true) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(r * c);
  for (auto& x : v) x = u(rng);
  return Tensor::from(r, c, std::move(v), grad);
}

struct Case {
  std::string name;
  std::vector<ag::NamedTensor> inputs;
  std::function<Tensor(const std::vector<Tensor>&)> op;
};

}  // namespace

SuiteReport check_primitives(std::uint64_t seed, double eps, double tol) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(seed);
  auto T = [&](std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
    return random_tensor(r, c, rng, lo, hi);
  };

  std::vector<Case> cases;
  cases.push_back({"matmul", {{"a", T(3, 4)}, {"b", T(4, 2)}}, [](auto& x) { return ag::matmul(x[0], x[1]); }});
  cases.push_back({"transpose", {{"a", T(3, 5)}}, [](auto& x) { return ag::transpose(x[0]); }});
  cases.push_back({"add", {{"a", T(2, 3)}, {"b", T(2, 3)}}, [](auto& x) { return ag::add(x[0], x[1]); }});
  cases.push_back({"sub", {{"a", T(2, 3)}, {"b", T(2, 3)}}, [](auto& x) { return ag::sub(x[0], x[1]); }});
  cases.push_back({"hadamard", {{"a", T(3, 3)}, {"b", T(3, 3)}}, [](auto& x) { return ag::hadamard(x[0], x[1]); }});
  cases.push_back({"add_bias", {{"a", T(4, 3)}, {"b", T(1, 3)}}, [](auto& x) { return ag::add_bias(x[0], x[1]); }});
  cases.push_back({"sigmoid", {{"a", T(3, 4, -3, 3)}}, [](auto& x) { return ag::sigmoid(x[0]); }});
  cases.push_back({"tanh", {{"a", T(3, 4, -2, 2)}}, [](auto& x) { return ag::tanh(x[0]); }});
  cases.push_back({"relu", {{"a", T(3, 4)}}, [](auto& x) { return ag::relu(x[0]); }});
  cases.push_back({"log", {{"a", T(2, 4, 0.5, 2.0)}}, [](auto& x) { return ag::log(x[0]); }});
  cases.push_back({"scale", {{"a", T(2, 3)}}, [](auto& x) { return ag::scale(x[0], -1.7); }});
  cases.push_back({"scalar_mul", {{"s", T(1, 1)}, {"a", T(2, 3)}}, [](auto& x) { return ag::scalar_mul(x[0], x[1]); }});
  cases.push_back({"one_minus", {{"a", T(2, 3)}}, [](auto& x) { return ag::one_minus(x[0]); }});
  cases.push_back({"concat_rows", {{"a", T(2, 3)}, {"b", T(1, 3)}}, [](auto& x) { return ag::concat({x[0], x[1]}, 0); }});
  cases.push_back({"concat_cols", {{"a", T(2, 3)}, {"b", T(2, 2)}}, [](auto& x) { return ag::concat({x[0], x[1]}, 1); }});
  cases.push_back({"slice_cols", {{"a", T(3, 5)}}, [](auto& x) { return ag::slice_cols(x[0], 1, 4); }});
  cases.push_back({"slice_rows", {{"a", T(5, 3)}}, [](auto& x) { return ag::slice_rows(x[0], 2, 5); }});
  cases.push_back({"row", {{"a", T(4, 3)}}, [](auto& x) { return ag::row(x[0], 2); }});
  cases.push_back({"pick", {{"a", T(3, 3)}}, [](auto& x) { return ag::pick(x[0], 1, 2); }});
  cases.push_back({"mean_pool_rows", {{"a", T(4, 3)}}, [](auto& x) { return ag::mean_pool(x[0], 0); }});
  cases.push_back({"mean_pool_cols", {{"a", T(4, 3)}}, [](auto& x) { return ag::mean_pool(x[0], 1); }});
  cases.push_back({"sum", {{"a", T(3, 3)}}, [](auto& x) { return ag::sum(x[0]); }});
  cases.push_back({"sum_squares", {{"a", T(3, 3)}}, [](auto& x) { return ag::sum_squares(x[0]); }});
  cases.push_back({"embedding_lookup", {{"table", T(6, 3)}}, [](auto& x) {
                     const std::vector<int> ids{4, 0, 4, 2, 5};
                     return ag::embedding_lookup(x[0], ids);
                   }});
  cases.push_back({"masked_softmax", {{"s", T(3, 5, -2, 2)}}, [](auto& x) {
                     ag::Mask m = ag::Mask::all(3, 5);
                     m.set(0, 1, false);
                     m.set(1, 0, false);
                     m.set(1, 4, false);
                     m.set(2, 3, false);
                     return ag::masked_softmax(x[0], m);
                   }});
  cases.push_back({"softmax_nll", {{"s", T(1, 6, -2, 2)}}, [](auto& x) {
                     return ag::scale(ag::log(ag::pick(ag::masked_softmax(x[0], ag::Mask::all(1, 6)), 0, 3)), -1.0);
                   }});
  cases.push_back({"lstm_pointwise", {{"pre", T(1, 12, -2, 2)}, {"c", T(1, 3)}},
                   [](auto& x) { return ag::lstm_pointwise(x[0], x[1]); }});
  {
    ag::LstmParams lp{T(3, 12, -0.7, 0.7), T(3, 12, -0.7, 0.7), T(1, 12, -0.3, 0.3)};
    cases.push_back({"lstm_cell",
                     {{"x", T(1, 3)}, {"h", T(1, 3)}, {"c", T(1, 3)}, {"w_x", lp.w_x}, {"w_h", lp.w_h}, {"bias", lp.bias}},
                     [lp](auto& x) {
                       auto st = ag::lstm_cell(x[0], x[1], x[2], lp);
                       return ag::concat({st.h, st.c}, 1);
                     }});
  }
  for (std::ptrdiff_t b : {0, 1, 3}) {
    cases.push_back({"band_attention_b" + std::to_string(b), {{"p", T(6, 3)}, {"v", T(6, 4)}},
                     [b](auto& x) { return band_attend(band_scores(x[0], b), x[1]); }});
  }
  {
    Transform fs{T(4, 4, -0.8, 0.8), T(1, 4, -0.2, 0.2), Activation::kTanh};
    cases.push_back({"dense_introspect", {{"z", T(5, 4)}, {"fs.w", fs.weight}, {"fs.b", fs.bias}},
                     [fs](auto& x) { return dense_introspect(x[0], fs, ag::Mask::band(5, 2)); }});
  }

  SuiteReport report;
  for (auto& c : cases) {
    // The probe weights are drawn once per case so every evaluation sees the same loss.
    const Tensor weights = [&] {
      std::vector<Tensor> vals;
      for (auto& in : c.inputs) vals.push_back(in.tensor);
      const Tensor out = c.op(vals);
      return random_tensor(out.rows(), out.cols(), rng, -1.0, 1.0, false);
    }();
    auto fn = [&]() {
      std::vector<Tensor> vals;
      for (auto& in : c.inputs) vals.push_back(in.tensor);
      return ag::sum(ag::hadamard(c.op(vals), weights));
    };
    report.cases.push_back({c.name, ag::grad_check(fn, c.inputs, eps, tol)});
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

MicroProblem make_micro_problem(const MicroDims& dims, std::uint64_t seed, const IalOptions& ial, bool pg_off) {
  if (dims.gen_vocab < Vocab::kNumSpecial + 2) throw UsageError("micro problem needs at least 2 generation tokens");
  if (dims.context_len < 2 || dims.steps < 1) throw UsageError("micro problem too small");
  std::mt19937_64 rng(seed);

  std::vector<Token> gen_tokens, input_tokens;
  for (std::size_t i = 0; i + Vocab::kNumSpecial < dims.gen_vocab; ++i) gen_tokens.push_back("w" + std::to_string(i));
  input_tokens = gen_tokens;
  for (std::size_t i = 0; i < 10; ++i) input_tokens.push_back("c" + std::to_string(i));

  // "w0" never appears in the context, so its label must come from the vocabulary.
  std::uniform_int_distribution<std::size_t> pick_tok(1, input_tokens.size() - 1);
  MicroProblem p;
  for (std::size_t i = 0; i < dims.context_len; ++i) p.context.push_back(input_tokens[pick_tok(rng)]);
  for (std::size_t i = 0; i < dims.question_len; ++i) p.question.push_back(input_tokens[pick_tok(rng)]);
  const std::size_t start = dims.context_len / 3;
  for (std::size_t t = 0; t + 1 < dims.steps; ++t) p.answer.push_back(p.context[(start + t) % dims.context_len]);
  p.answer.push_back("w0");

  ModelConfig cfg;
  cfg.d = dims.d;
  cfg.n = dims.n;
  cfg.e = dims.e;
  cfg.embed_stddev = 0.5;
  cfg.ial = ial;
  cfg.ial.band = dims.band;
  cfg.pg_off = pg_off;
  cfg.seed = seed + 17;
  p.model = std::make_unique<IalCpgModel>(cfg, Vocab(input_tokens), Vocab(gen_tokens));
  p.labels = training_targets(p.context, p.answer, p.model->gen_vocab(), StopwordSet{}, dims.steps, pg_off);
  return p;
}

SuiteReport check_micro_model(const MicroDims& dims, std::uint64_t seed, double eps, double tol) {
  const auto start = std::chrono::steady_clock::now();
  MicroProblem p = make_micro_problem(dims, seed);
  // Biases start at zero; nudge them so their gradients are generic. Doubled
  // weights lift the smallest gradients clear of the finite-difference
  // rounding floor (about 1e-10 absolute at this loss scale).
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (auto& param : p.model->params().all()) {
    if (param.kind == ParamKind::kBias)
      for (auto& v : param.tensor.mutable_values()) v = u(rng);
    if (param.kind == ParamKind::kWeight)
      for (auto& v : param.tensor.mutable_values()) v *= 2.0;
  }

  const IalCpgModel& model = *p.model;
  auto fn = [&]() {
    const auto enc = model.encode(p.context, p.question);
    return step_loss(model.teacher_forced(enc, p.answer, p.labels.size()), p.labels, &model.params(), 1e-3);
  };
  std::vector<ag::NamedTensor> wrt;
  for (const auto& param : model.params().all())
    if (param.trainable()) wrt.push_back({param.name, param.tensor});

  SuiteReport report;
  report.cases.push_back({"micro_model", ag::grad_check(fn, wrt, eps, tol)});
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

SuiteReport run_gradcheck_suite(std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  SuiteReport all = check_primitives(seed);
  SuiteReport micro = check_micro_model(MicroDims{}, seed);
  all.cases.insert(all.cases.end(), micro.cases.begin(), micro.cases.end());
  all.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return all;
}

}  // namespace ialcpg
