#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "ialcpg/autograd.hpp"
#include "ialcpg/errors.hpp"
#include "ialcpg/gradcheck.hpp"
#include "ialcpg/params.hpp"
#include "oracles.hpp"

using namespace ialcpg;
using ag::Tensor;

namespace {

Tensor rand_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng, bool grad = true, double lo = -1.0,
                   double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(r * c);
  for (auto& x : v) x = u(rng);
  return Tensor::from(r, c, v, grad);
}

// Weighted sum so every output entry gets a distinct upstream gradient.
Tensor probe(const Tensor& t, const Tensor& w) { return ag::sum(ag::hadamard(t, w)); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_SUITE("autograd") {

TEST_CASE("identity matmul and zero hadamard") {
  std::mt19937_64 rng(1);
  Tensor x = rand_tensor(2, 3, rng);
  Tensor eye = Tensor::from(2, 2, {1, 0, 0, 1});
  Tensor y = ag::matmul(eye, x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.values()[i] == x.values()[i]);

  Tensor z = ag::hadamard(x, Tensor::zeros(2, 3));
  ag::backward(ag::sum(z));
  for (double v : z.values()) CHECK(v == 0.0);
  for (double g : x.grad()) CHECK(g == 0.0);
}

TEST_CASE("sigmoid derivative at zero") {
  Tensor x = Tensor::scalar(0.0, true);
  ag::backward(ag::sum(ag::sigmoid(x)));
  CHECK(x.grad()[0] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("sum and sum of squares gradients") {
  std::mt19937_64 rng(2);
  Tensor x = rand_tensor(3, 4, rng);
  ag::backward(ag::sum(x));
  for (double g : x.grad()) CHECK(g == 1.0);
  x.zero_grad();
  ag::backward(ag::sum(ag::hadamard(x, x)));
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x.grad()[i] == doctest::Approx(2.0 * x.values()[i]));
}

TEST_CASE("leaf gradients accumulate across backward calls") {
  Tensor x = Tensor::row_vector({1.0, -2.0}, true);
  Tensor loss = ag::sum(ag::scale(x, 3.0));
  ag::backward(loss);
  ag::backward(loss);
  CHECK(x.grad()[0] == 6.0);
  CHECK(x.grad()[1] == 6.0);
}

TEST_CASE("masked softmax values") {
  auto row = [](std::vector<double> s, std::vector<std::uint8_t> m) {
    ag::Mask mask{1, s.size(), m};
    return ag::masked_softmax(Tensor::row_vector(s), mask);
  };
  auto a = row({0, 0}, {1, 1});
  CHECK(a(0, 0) == doctest::Approx(0.5));
  auto b = row({1, 2, 3}, {1, 1, 1});
  const auto want = oracle::softmax({1, 2, 3});
  for (std::size_t j = 0; j < 3; ++j) CHECK(b(0, j) == doctest::Approx(want[j]).epsilon(1e-14));
  CHECK(std::abs(b(0, 0) - 0.0900) < 5e-5);
  CHECK(std::abs(b(0, 1) - 0.2447) < 5e-5);
  CHECK(std::abs(b(0, 2) - 0.6652) < 5e-5);
  auto c = row({5, 100}, {1, 0});
  CHECK(c(0, 0) == 1.0);
  CHECK(c(0, 1) == 0.0);
  CHECK_THROWS_AS(row({1, 2}, {0, 0}), NumericError);
}

TEST_CASE("masked softmax rows sum to one on random masks") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t r = 1 + rng() % 8, c = 1 + rng() % 8;
    Tensor s = rand_tensor(r, c, rng, false, -30, 30);
    ag::Mask m = ag::Mask::all(r, c, false);
    for (std::size_t i = 0; i < r; ++i) {
      m.set(i, rng() % c, true);
      for (std::size_t j = 0; j < c; ++j)
        if (rng() % 2) m.set(i, j, true);
    }
    Tensor p = ag::masked_softmax(s, m);
    for (std::size_t i = 0; i < r; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        if (!m(i, j)) CHECK(p(i, j) == 0.0);
        total += p(i, j);
      }
      CHECK(std::abs(total - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("lstm cell with zero parameters outputs zero") {
  ag::LstmParams p{Tensor::zeros(3, 12), Tensor::zeros(3, 12), Tensor::zeros(1, 12)};
  auto st = ag::lstm_cell(Tensor::row_vector({0.3, -1.0, 2.0}), Tensor::zeros(1, 3), Tensor::zeros(1, 3), p);
  for (double v : st.h.values()) CHECK(v == 0.0);
  for (double v : st.c.values()) CHECK(v == 0.0);
}

TEST_CASE("lstm cell against hand evaluation") {
  std::mt19937_64 rng(6);
  const std::size_t in = 2, h = 3;
  ag::LstmParams p{rand_tensor(in, 4 * h, rng), rand_tensor(h, 4 * h, rng), rand_tensor(1, 4 * h, rng)};
  Tensor x = rand_tensor(1, in, rng), hp = rand_tensor(1, h, rng), cp = rand_tensor(1, h, rng);
  auto st = ag::lstm_cell(x, hp, cp, p);
  for (std::size_t k = 0; k < h; ++k) {
    double pre[4];
    for (std::size_t g = 0; g < 4; ++g) {
      const std::size_t col = g * h + k;
      double s = p.bias(0, col);
      for (std::size_t i = 0; i < in; ++i) s += x(0, i) * p.w_x(i, col);
      for (std::size_t i = 0; i < h; ++i) s += hp(0, i) * p.w_h(i, col);
      pre[g] = s;
    }
    const double c = sigmoid(pre[1]) * cp(0, k) + sigmoid(pre[0]) * std::tanh(pre[2]);
    CHECK(st.c(0, k) == doctest::Approx(c).epsilon(1e-13));
    CHECK(st.h(0, k) == doctest::Approx(sigmoid(pre[3]) * std::tanh(c)).epsilon(1e-13));
  }
}

TEST_CASE("saturated forget gate carries the cell") {
  const std::size_t h = 2;
  ag::LstmParams p{Tensor::zeros(1, 4 * h), Tensor::zeros(h, 4 * h), Tensor::zeros(1, 4 * h)};
  for (std::size_t k = 0; k < h; ++k) {
    p.bias.at(0, h + k) = 60.0;     // forget
    p.bias.at(0, k) = 60.0;         // input
    p.bias.at(0, 2 * h + k) = 0.5;  // candidate
  }
  auto st = ag::lstm_cell(Tensor::zeros(1, 1), Tensor::zeros(1, h), Tensor::row_vector({1e6, -3e5}), p);
  CHECK(st.c(0, 0) == doctest::Approx(1e6 + std::tanh(0.5)).epsilon(1e-14));
  CHECK(st.c(0, 1) == doctest::Approx(-3e5 + std::tanh(0.5)).epsilon(1e-14));
}

TEST_CASE("lstm cell gradient on a 3-dim cell") {
  std::mt19937_64 rng(9);
  ag::LstmParams p{rand_tensor(3, 12, rng), rand_tensor(3, 12, rng), rand_tensor(1, 12, rng)};
  Tensor x = rand_tensor(1, 3, rng), hp = rand_tensor(1, 3, rng), cp = rand_tensor(1, 3, rng);
  Tensor w = rand_tensor(1, 6, rng, false);
  auto fn = [&] {
    auto st = ag::lstm_cell(x, hp, cp, p);
    return probe(ag::concat({st.h, st.c}, 1), w);
  };
  auto rep = ag::grad_check(fn, {{"x", x}, {"h", hp}, {"c", cp}, {"w_x", p.w_x}, {"w_h", p.w_h}, {"b", p.bias}},
                            1e-5, 1e-6);
  CHECK(rep.passed);
  CHECK(rep.max_rel_error() < 1e-6);
}

TEST_CASE("masked softmax plus nll gradient") {
  std::mt19937_64 rng(10);
  Tensor s = rand_tensor(3, 5, rng, true, -2, 2);
  ag::Mask m = ag::Mask::band(5, 1);
  m = ag::Mask{3, 5, std::vector<std::uint8_t>(m.on.begin(), m.on.begin() + 15)};
  auto fn = [&] {
    Tensor p = ag::masked_softmax(s, m);
    return ag::scale(ag::add(ag::log(ag::pick(p, 0, 1)), ag::log(ag::pick(p, 2, 3))), -1.0);
  };
  auto rep = ag::grad_check(fn, {{"scores", s}}, 1e-5, 1e-6);
  CHECK(rep.passed);
  CHECK(rep.max_rel_error() < 1e-6);
}

TEST_CASE("linear function has machine-precision gradient error") {
  std::mt19937_64 rng(11);
  Tensor x = rand_tensor(2, 3, rng);
  Tensor w = rand_tensor(2, 3, rng, false);
  auto rep = ag::grad_check([&] { return probe(x, w); }, {{"x", x}});
  CHECK(rep.max_rel_error() < 1e-9);
}

TEST_CASE("relu probed at zero is excluded") {
  Tensor x = Tensor::row_vector({0.0, 0.7, -0.4}, true);
  auto rep = ag::grad_check([&] { return ag::sum(ag::relu(x)); }, {{"x", x}});
  REQUIRE(rep.entries.size() == 1);
  CHECK(rep.entries[0].excluded == 1);
  CHECK(rep.entries[0].checked == 2);
  CHECK(rep.passed);
}

TEST_CASE("every primitive matches finite differences on random shapes") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t r = 1 + rng() % 8, c = 1 + rng() % 8, k = 1 + rng() % 8;
    Tensor a = rand_tensor(r, c, rng), b = rand_tensor(r, c, rng), m = rand_tensor(c, k, rng);
    Tensor bias = rand_tensor(1, c, rng), s = Tensor::scalar(0.7, true);
    Tensor pos = rand_tensor(r, c, rng, true, 0.5, 2.0);
    Tensor table = rand_tensor(6, c, rng);
    Tensor w_rc = rand_tensor(r, c, rng, false), w_rk = rand_tensor(r, k, rng, false);
    Tensor w_cr = rand_tensor(c, r, rng, false);
    Tensor w_2rc = rand_tensor(2 * r, c, rng, false), w_r2c = rand_tensor(r, 2 * c, rng, false);
    Tensor w_1c = rand_tensor(1, c, rng, false), w_r1 = rand_tensor(r, 1, rng, false);
    Tensor w_3c = rand_tensor(3, c, rng, false);
    const std::vector<int> ids{1, 4, 1};
    ag::Mask mask = ag::Mask::all(r, c, true);
    if (c > 1) mask.set(0, c - 1, false);

    const std::vector<std::pair<std::string, std::function<Tensor()>>> cases{
        {"matmul", [&] { return probe(ag::matmul(a, m), w_rk); }},
        {"transpose", [&] { return probe(ag::transpose(a), w_cr); }},
        {"add", [&] { return probe(ag::add(a, b), w_rc); }},
        {"sub", [&] { return probe(ag::sub(a, b), w_rc); }},
        {"hadamard", [&] { return probe(ag::hadamard(a, b), w_rc); }},
        {"add_bias", [&] { return probe(ag::add_bias(a, bias), w_rc); }},
        {"sigmoid", [&] { return probe(ag::sigmoid(a), w_rc); }},
        {"tanh", [&] { return probe(ag::tanh(a), w_rc); }},
        {"relu", [&] { return probe(ag::relu(a), w_rc); }},
        {"log", [&] { return probe(ag::log(pos), w_rc); }},
        {"scale", [&] { return probe(ag::scale(a, -1.5), w_rc); }},
        {"scalar_mul", [&] { return probe(ag::scalar_mul(s, a), w_rc); }},
        {"one_minus", [&] { return probe(ag::one_minus(a), w_rc); }},
        {"concat0", [&] { return probe(ag::concat({a, b}, 0), w_2rc); }},
        {"concat1", [&] { return probe(ag::concat({a, b}, 1), w_r2c); }},
        {"slice_cols", [&] { return probe(ag::slice_cols(a, 0, 1), ag::slice_cols(w_rc, 0, 1)); }},
        {"slice_rows", [&] { return probe(ag::slice_rows(a, r - 1, r), w_1c); }},
        {"row", [&] { return probe(ag::row(a, 0), w_1c); }},
        {"pick", [&] { return ag::scale(ag::pick(a, r - 1, c - 1), 2.0); }},
        {"mean_pool0", [&] { return probe(ag::mean_pool(a, 0), w_1c); }},
        {"mean_pool1", [&] { return probe(ag::mean_pool(a, 1), w_r1); }},
        {"sum_squares", [&] { return ag::sum_squares(a); }},
        {"embedding", [&] { return probe(ag::embedding_lookup(table, ids), w_3c); }},
        {"masked_softmax", [&] { return probe(ag::masked_softmax(a, mask), w_rc); }},
    };
    for (const auto& [name, fn] : cases) {
      auto rep = ag::grad_check(fn, {{"a", a}, {"b", b}, {"m", m}, {"bias", bias}, {"s", s}, {"pos", pos},
                                     {"table", table}});
      INFO(name, " trial ", trial);
      CHECK(rep.passed);
      CHECK(rep.max_rel_error() < 1e-4);
    }
  }
}

TEST_CASE("shape errors name both shapes") {
  Tensor a = Tensor::zeros(2, 3), b = Tensor::zeros(2, 2);
  try {
    ag::matmul(a, b);
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
    CHECK(msg.find("2x2") != std::string::npos);
  }
  CHECK_THROWS_AS(ag::add(a, b), ShapeError);
  CHECK_THROWS_AS(ag::backward(a), ShapeError);
  CHECK_THROWS_AS(ag::embedding_lookup(a, std::vector<int>{5}), ShapeError);
}

TEST_CASE("evaluation is bit-identical across runs") {
  auto run = [] {
    std::mt19937_64 rng(13);
    Tensor a = rand_tensor(4, 5, rng), m = rand_tensor(5, 3, rng);
    Tensor out = ag::tanh(ag::matmul(a, m));
    ag::backward(ag::sum_squares(out));
    std::vector<double> v(out.values().begin(), out.values().end());
    v.insert(v.end(), a.grad().begin(), a.grad().end());
    return v;
  };
  CHECK(run() == run());
}

TEST_CASE("checkpoint round trip and validation") {
  std::mt19937_64 rng(14);
  ParameterSet p;
  p.add("w", rand_tensor(3, 4, rng), ParamKind::kWeight);
  p.add("b", rand_tensor(1, 4, rng), ParamKind::kBias);
  p.add("e", rand_tensor(5, 2, rng, false), ParamKind::kFrozen);
  CHECK_THROWS_AS(p.add("w", Tensor::zeros(1, 1), ParamKind::kWeight), UsageError);
  CHECK(p.scalar_count() == 12 + 4 + 10);
  CHECK_FALSE(p.get("e").requires_grad());
  CHECK(p.l2_term().item() == doctest::Approx(ag::sum_squares(p.get("w")).item()));

  const auto path = std::filesystem::temp_directory_path() / "ialcpg_params_rt.ckpt";
  save_checkpoint(p, path);
  ParameterSet q;
  q.add("w", Tensor::zeros(3, 4), ParamKind::kWeight);
  q.add("b", Tensor::zeros(1, 4), ParamKind::kBias);
  q.add("e", Tensor::zeros(5, 2), ParamKind::kFrozen);
  load_checkpoint(q, path);
  for (const char* name : {"w", "b", "e"}) {
    const auto x = p.get(name).values(), y = q.get(name).values();
    CHECK(std::equal(x.begin(), x.end(), y.begin(), y.end()));
  }
  ParameterSet wrong;
  wrong.add("w", Tensor::zeros(4, 3), ParamKind::kWeight);
  wrong.add("b", Tensor::zeros(1, 4), ParamKind::kBias);
  wrong.add("e", Tensor::zeros(5, 2), ParamKind::kFrozen);
  CHECK_THROWS_AS(load_checkpoint(wrong, path), DataError);
  std::filesystem::resize_file(path, 20);
  CHECK_THROWS_AS(load_checkpoint(q, path), DataError);
  std::filesystem::remove(path);
}

}  // TEST_SUITE
