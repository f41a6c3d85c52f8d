#include <cmath>
#include <random>

#include "doctest.h"
#include "ialcpg/gradcheck.hpp"
#include "ialcpg/gradcheck_suite.hpp"
#include "ialcpg/pointer_decoder.hpp"
#include "ialcpg/trainer.hpp"
#include "oracles.hpp"

using namespace ialcpg;
using ag::Tensor;

namespace {

Tensor randn(std::size_t r, std::size_t c, std::mt19937_64& rng, bool grad = false) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(r * c);
  for (auto& x : v) x = g(rng);
  return Tensor::from(r, c, v, grad);
}

void zero(Tensor& t) {
  for (auto& v : t.mutable_values()) v = 0.0;
}

struct Fixture {
  ParameterSet params;
  DecoderParams p;
  std::mt19937_64 rng{3};
  // Y width 6, question width 3, embed 2, n 4, |V_g| 7
  Fixture() { p = make_decoder(params, 6, 3, 2, 4, 7, rng); }
};

Tensor uniform_row(std::size_t n) { return Tensor::filled(1, n, 1.0 / static_cast<double>(n)); }

}  // namespace

TEST_SUITE("pointer_decoder") {

TEST_CASE("init state from mean pooled Y") {
  Fixture f;
  std::mt19937_64 rng(1);
  auto y = randn(5, 6, rng);
  auto s = init_decoder(y, f.p);
  oracle::Mat mean(1, std::vector<double>(6, 0.0));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 6; ++j) mean[0][j] += y(i, j) / 5.0;
  const auto h = oracle::matmul(mean, oracle::to_mat(f.p.init_w));
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(s.h(0, j) == doctest::Approx(std::tanh(h[0][j] + f.p.init_b(0, j))).epsilon(1e-13));
    CHECK(s.c(0, j) == 0.0);
  }
  Tensor constant = Tensor::filled(3, 6, 0.25);
  auto c = init_decoder(constant, f.p);
  auto one = init_decoder(Tensor::filled(1, 6, 0.25), f.p);
  for (std::size_t j = 0; j < 4; ++j) CHECK(c.h(0, j) == doctest::Approx(one.h(0, j)).epsilon(1e-15));
  zero(f.p.init_w);
  const auto zeroed = init_decoder(y, f.p);
  for (double v : zeroed.h.values()) CHECK(v == 0.0);
}

TEST_CASE("question pooling") {
  Fixture f;
  std::mt19937_64 rng(2);
  auto proj = [&](const Tensor& r) { return oracle::matmul(oracle::to_mat(r), oracle::to_mat(f.p.qpool_proj))[0]; };
  auto q1 = randn(1, 3, rng);
  auto pooled = question_pool({q1, {1}}, f.p);
  const auto want = proj(q1);
  for (std::size_t j = 0; j < 4; ++j) CHECK(pooled(0, j) == doctest::Approx(want[j]).epsilon(1e-13));

  auto twice = Tensor::from(2, 3, {q1(0, 0), q1(0, 1), q1(0, 2), q1(0, 0), q1(0, 1), q1(0, 2)});
  auto p2 = question_pool({twice, {1, 1}}, f.p);
  for (std::size_t j = 0; j < 4; ++j) CHECK(p2(0, j) == doctest::Approx(want[j]).epsilon(1e-13));

  // score row 1 far above the others
  zero(f.p.qpool_w);
  for (std::size_t i = 0; i < 3; ++i) f.p.qpool_w.at(i, i) = 1.0;
  for (std::size_t i = 0; i < 3; ++i) f.p.qpool_v.at(i, 0) = 1000.0;
  auto q3 = Tensor::from(3, 3, {-1, -1, -1, 2, 2, 2, -0.5, 0, 0});
  auto p3 = question_pool({q3, {1, 1, 1}}, f.p);
  const auto win = proj(ag::row(q3, 1));
  for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(p3(0, j) - win[j]) < 1e-6);
}

TEST_CASE("attention against the double-loop oracle") {
  Fixture f;
  std::mt19937_64 rng(4);
  for (auto& v : f.p.att_y_b.mutable_values()) v = 0.3;
  auto y = randn(7, 6, rng), h = randn(1, 4, rng), q = randn(1, 4, rng);
  std::vector<std::uint8_t> mask{1, 1, 0, 1, 1, 1, 0};
  auto att = decode_attention(y, project_context(y, f.p), mask, h, q, f.p);
  std::vector<double> scores;
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < 7; ++i) {
    if (!mask[i]) continue;
    double s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      double g = f.p.att_y_b(0, k) + q(0, k);
      for (std::size_t j = 0; j < 6; ++j) g += y(i, j) * f.p.att_y_w(j, k);
      for (std::size_t j = 0; j < 4; ++j) g += h(0, j) * f.p.att_h_w(j, k);
      s += std::tanh(g) * f.p.att_v(k, 0);
    }
    scores.push_back(s);
    live.push_back(i);
  }
  const auto w = oracle::softmax(scores);
  std::vector<double> expect(7, 0.0);
  for (std::size_t k = 0; k < live.size(); ++k) expect[live[k]] = w[k];
  for (std::size_t i = 0; i < 7; ++i) CHECK(std::abs(att.weights(0, i) - expect[i]) < 1e-12);
  for (std::size_t j = 0; j < 6; ++j) {
    double c = 0.0;
    for (std::size_t i = 0; i < 7; ++i) c += expect[i] * y(i, j);
    CHECK(std::abs(att.context(0, j) - c) < 1e-12);
  }
}

TEST_CASE("attention degenerate cases") {
  Fixture f;
  std::mt19937_64 rng(5);
  auto y1 = randn(1, 6, rng);
  auto a = decode_attention(y1, project_context(y1, f.p), {1}, randn(1, 4, rng), randn(1, 4, rng), f.p);
  CHECK(a.weights(0, 0) == 1.0);
  for (std::size_t j = 0; j < 6; ++j) CHECK(a.context(0, j) == doctest::Approx(y1(0, j)));
  zero(f.p.att_v);
  auto y = randn(4, 6, rng);
  auto u = decode_attention(y, project_context(y, f.p), {1, 1, 1, 1}, randn(1, 4, rng), randn(1, 4, rng), f.p);
  for (std::size_t j = 0; j < 6; ++j)
    CHECK(u.context(0, j) == doctest::Approx((y(0, j) + y(1, j) + y(2, j) + y(3, j)) / 4.0));
}

TEST_CASE("decoder step with zero parameters") {
  Fixture f;
  zero(f.p.lstm.w_x);
  zero(f.p.lstm.w_h);
  std::mt19937_64 rng(6);
  auto s = decoder_step(randn(1, 6, rng), randn(1, 2, rng), {randn(1, 4, rng), Tensor::zeros(1, 4), 0}, f.p);
  for (double v : s.h.values()) CHECK(v == 0.0);
  CHECK(s.t == 1);
}

TEST_CASE("generation distribution") {
  Fixture f;
  std::mt19937_64 rng(7);
  zero(f.p.gen_w);
  auto v = generate_dist(randn(1, 4, rng), f.p);
  for (std::size_t j = 0; j < 7; ++j) CHECK(v(0, j) == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
  f.p.gen_b.at(0, 5) = 1000.0;
  auto spike = generate_dist(randn(1, 4, rng), f.p);
  CHECK(spike(0, 5) > 1.0 - 1e-12);
  auto only_pad = generate_dist(randn(1, 4, rng), f.p, {1, 0, 0, 0, 0, 0, 0});
  CHECK(only_pad(0, 0) == 1.0);
  Fixture g;
  for (int trial = 0; trial < 20; ++trial) {
    auto r = generate_dist(randn(1, 4, rng), g.p);
    double s = 0.0;
    for (double x : r.values()) s += x;
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
}

TEST_CASE("switch gate") {
  Fixture f;
  std::mt19937_64 rng(8);
  auto c = randn(1, 4, rng), h = randn(1, 4, rng), y = randn(1, 6, rng);
  Fixture z;
  zero(z.p.switch_c);
  zero(z.p.switch_h);
  zero(z.p.switch_y);
  CHECK(switch_gate(c, h, y, z.p).item() == 0.5);
  z.p.switch_y.at(0, 0) = 1e4;
  CHECK(switch_gate(c, h, Tensor::filled(1, 6, 1.0), z.p).item() == doctest::Approx(1.0));

  // At p = 0.5 (inputs chosen so the pre-activation vanishes) every input still gets gradient.
  auto cz = Tensor::zeros(1, 4, true), hz = Tensor::zeros(1, 4, true), yz = Tensor::zeros(1, 6, true);
  auto fn = [&] { return switch_gate(cz, hz, yz, f.p); };
  CHECK(fn().item() == 0.5);
  ag::backward(fn());
  auto nonzero = [](const Tensor& t) {
    double m = 0.0;
    for (double g : t.grad()) m += std::abs(g);
    return m > 0.0;
  };
  CHECK(nonzero(cz));
  CHECK(nonzero(hz));
  CHECK(nonzero(yz));
  auto rep = ag::grad_check(fn, {{"c", cz}, {"h", hz}, {"y", yz}});
  CHECK(rep.passed);
}

TEST_CASE("blend arithmetic") {
  auto a = uniform_row(4), v = uniform_row(5);
  auto b = blend(a, v, Tensor::scalar(0.3));
  CHECK(b.context_length == 4);
  for (std::size_t j = 0; j < 4; ++j) CHECK(b.probs(0, j) == doctest::Approx(0.3 / 4.0).epsilon(1e-15));
  for (std::size_t j = 4; j < 9; ++j) CHECK(b.probs(0, j) == doctest::Approx(0.7 / 5.0).epsilon(1e-15));
  auto one = blend(a, v, Tensor::scalar(1.0));
  for (std::size_t j = 4; j < 9; ++j) CHECK(one.probs(0, j) == 0.0);
  auto none = blend(a, v, Tensor::scalar(0.0));
  for (std::size_t j = 0; j < 4; ++j) CHECK(none.probs(0, j) == 0.0);
  for (std::size_t j = 4; j < 9; ++j) CHECK(none.probs(0, j) == v(0, j - 4));
}

TEST_CASE("greedy decode copies under a forced pointer") {
  const TokenSeq context{"red", "ships", "sail", "home"};
  Vocab gen({"the", "sail"});
  Vocab input({"red", "ships", "sail", "home", "the"});
  auto step = [&](std::size_t t, int) {
    std::vector<double> a(4, 0.01);
    a[t == 0 ? 1 : 2] = 0.97;
    return blend(Tensor::row_vector(a), uniform_row(gen.size()), Tensor::scalar(1.0));
  };
  auto out = greedy_decode(step, context, gen, input, 2);
  CHECK(out.tokens == TokenSeq{"ships", "sail"});
  CHECK(out.steps[0].pointer);
  CHECK(out.steps[1].index == 2);
}

TEST_CASE("greedy decode emission rules") {
  const TokenSeq context{"a1", "a2", "a3", "a4"};
  Vocab gen({"the", "end"});
  Vocab input({"a1", "a2", "a3", "a4", "the"});
  std::vector<int> seen_prev;
  // vocab "the", pointer 3, PAD, then pointer 0 again (suppressed after the stop)
  auto step = [&](std::size_t t, int prev) {
    seen_prev.push_back(prev);
    std::vector<double> a(4, 0.0), v(gen.size(), 0.0);
    double p = 0.5;
    if (t == 0) v[3] = 1.0, p = 0.4;
    if (t == 1) a[3] = 1.0, p = 0.9;
    if (t == 2) v[Vocab::kPad] = 1.0, p = 0.1;
    if (t == 3) a[0] = 1.0, p = 0.9;
    if (t == 1 || t == 3) v[4] = 1.0;
    if (t == 0 || t == 2) a[1] = 1.0;
    return blend(Tensor::row_vector(a), Tensor::row_vector(v), Tensor::scalar(p));
  };
  auto out = greedy_decode(step, context, gen, input, 4);
  CHECK(out.tokens == TokenSeq{"the", "a4"});
  CHECK(out.steps.size() == 4);
  CHECK(seen_prev == std::vector<int>{Vocab::kBos, *input.find("the"), *input.find("a4"), Vocab::kPad});

  // exact tie resolves to the lowest index, which is a pointer slot
  auto tie = [&](std::size_t, int) {
    return blend(uniform_row(4), Tensor::row_vector({0.25, 0.25, 0.25, 0.25, 0.0}), Tensor::scalar(0.5));
  };
  auto t = greedy_decode(tie, context, gen, input, 1);
  CHECK(t.steps[0].argmax == 0);
}

TEST_CASE("micro model steps are distributions and greedy picks the explicit argmax") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    MicroProblem mp = make_micro_problem(MicroDims{}, seed, {}, seed % 2 == 0);
    const auto& m = *mp.model;
    const auto enc = m.encode(mp.context, mp.question);
    DecoderState state = enc.initial;
    std::vector<std::vector<double>> materialized;
    auto fn = [&](std::size_t, int prev) {
      auto s = m.step(enc, state, prev);
      state = s.state;
      materialized.emplace_back(s.dist.probs.values().begin(), s.dist.probs.values().end());
      const double p = s.dist.p.item();
      CHECK(p > 0.0);
      CHECK(p < 1.0);
      return s.dist;
    };
    auto out = greedy_decode(fn, mp.context, m.gen_vocab(), m.input_vocab(), 5);
    REQUIRE(materialized.size() == 5);
    for (std::size_t t = 0; t < 5; ++t) {
      const auto& v = materialized[t];
      REQUIRE(v.size() == mp.context.size() + m.gen_vocab().size());
      double s = 0.0;
      for (double x : v) {
        CHECK(x >= 0.0);
        s += x;
      }
      CHECK(std::abs(s - 1.0) < 1e-9);
      CHECK(out.steps[t].argmax == static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin()));
    }
  }
}

TEST_CASE("teacher forcing feeds gold tokens and inference feeds emitted ones") {
  MicroProblem mp = make_micro_problem(MicroDims{}, 11);
  const auto& m = *mp.model;
  const auto enc = m.encode(mp.context, mp.question);
  const auto tf = m.teacher_forced(enc, mp.answer, 4);
  DecoderState st = enc.initial;
  std::vector<int> prev{Vocab::kBos};
  for (const auto& t : mp.answer) prev.push_back(m.input_vocab().id_or_unk(t));
  for (std::size_t t = 0; t < 4; ++t) {
    auto s = m.step(enc, st, prev[t]);
    st = s.state;
    const auto a = s.dist.probs.values(), b = tf[t].probs.values();
    CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
  }

  auto dec = m.decode(mp.context, mp.question, 4);
  st = enc.initial;
  int p = Vocab::kBos;
  for (std::size_t t = 0; t < 4; ++t) {
    auto s = m.step(enc, st, p);
    st = s.state;
    const auto v = s.dist.probs.values();
    CHECK(dec.steps[t].argmax == static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin()));
    p = dec.steps[t].pointer ? m.input_vocab().id_or_unk(dec.steps[t].token)
        : dec.steps[t].index < Vocab::kNumSpecial ? static_cast<int>(dec.steps[t].index)
                                                  : m.input_vocab().id_or_unk(dec.steps[t].token);
  }
}

TEST_CASE("saturated switch only emits context tokens") {
  MicroProblem mp = make_micro_problem(MicroDims{}, 12);
  DecoderParams dec = mp.model->decoder();  // handles share storage with the model
  zero(dec.switch_c);
  zero(dec.switch_h);
  zero(dec.switch_y);
  // Drive every cell entry to about +1, then weight the cell heavily.
  for (auto& v : dec.lstm.bias.mutable_values()) v = 0.0;
  const std::size_t n = dec.size();
  for (std::size_t k = 0; k < n; ++k) dec.lstm.bias.at(0, 2 * n + k) = 50.0;  // candidate
  for (std::size_t k = 0; k < n; ++k) dec.lstm.bias.at(0, k) = 50.0;          // input gate
  for (std::size_t k = 0; k < n; ++k) dec.switch_c.at(k, 0) = 100.0;
  auto out = mp.model->decode(mp.context, mp.question, 6);
  for (const auto& s : out.steps) {
    CHECK(s.pointer);
    CHECK(s.p > 1.0 - 1e-12);
  }
}

TEST_CASE("decoder gradient over three teacher-forced steps") {
  auto rep = check_micro_model(MicroDims{}, 3);
  CHECK(rep.passed());
  CHECK(rep.max_rel_error() < 1e-4);
}

}  // TEST_SUITE
