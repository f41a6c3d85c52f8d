#include "ialcpg/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "ialcpg/errors.hpp"

namespace ialcpg::ag {

namespace {

std::shared_ptr<Node> new_node(std::size_t rows, std::size_t cols, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->rows = rows;
  node->cols = cols;
  node->value.assign(rows * cols, 0.0);
  node->grad.assign(rows * cols, 0.0);
  node->requires_grad = requires_grad;
  return node;
}

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_str() + " and " +
                   b.shape_str());
}

void require_same(const char* op, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_fail(op, a, b);
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Node& in(Node& self, std::size_t k) { return *self.inputs[k]; }

}  // namespace

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
  return Tensor(new_node(rows, cols, requires_grad));
}

Tensor Tensor::filled(std::size_t rows, std::size_t cols, double v, bool requires_grad) {
  auto node = new_node(rows, cols, requires_grad);
  std::fill(node->value.begin(), node->value.end(), v);
  return Tensor(node);
}

Tensor Tensor::from(std::size_t rows, std::size_t cols, std::vector<double> values,
                    bool requires_grad) {
  if (values.size() != rows * cols) {
    throw ShapeError("tensor: " + std::to_string(values.size()) + " values for shape [" +
                     std::to_string(rows) + "x" + std::to_string(cols) + "]");
  }
  auto node = new_node(rows, cols, requires_grad);
  node->value = std::move(values);
  return Tensor(node);
}

Tensor Tensor::row_vector(std::vector<double> values, bool requires_grad) {
  const std::size_t n = values.size();
  return from(1, n, std::move(values), requires_grad);
}

Tensor Tensor::scalar(double v, bool requires_grad) { return from(1, 1, {v}, requires_grad); }

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[' << rows() << 'x' << cols() << ']';
  return os.str();
}

void Tensor::set_requires_grad(bool on) { node_->requires_grad = on; }

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item: expected [1x1], got " + shape_str());
  return node_->value[0];
}

void Tensor::zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

Tensor Tensor::clone() const {
  auto node = new_node(rows(), cols(), false);
  node->value = node_->value;
  return Tensor(node);
}

Tensor make_result(std::size_t rows, std::size_t cols, std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward) {
  bool needs = false;
  for (const auto& t : inputs) needs = needs || t.requires_grad();
  auto node = new_node(rows, cols, needs);
  if (needs) {
    node->inputs.reserve(inputs.size());
    for (auto& t : inputs) node->inputs.push_back(t.node());
    node->backward = std::move(backward);
  }
  return Tensor(node);
}

Mask Mask::all(std::size_t rows, std::size_t cols, bool value) {
  return Mask{rows, cols, std::vector<std::uint8_t>(rows * cols, value ? 1 : 0)};
}

Mask Mask::band(std::size_t n, std::size_t half_width) {
  Mask m = all(n, n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i > half_width ? i - half_width : 0;
    const std::size_t hi = std::min(n - 1, i + half_width);
    for (std::size_t j = lo; j <= hi; ++j) m.set(i, j, true);
  }
  return m;
}

Mask Mask::rows_of(std::size_t rows, const std::vector<std::uint8_t>& column_mask) {
  Mask m{rows, column_mask.size(), {}};
  m.on.reserve(rows * column_mask.size());
  for (std::size_t r = 0; r < rows; ++r) m.on.insert(m.on.end(), column_mask.begin(), column_mask.end());
  return m;
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(on.begin(), on.end(), std::uint8_t{1}));
}

// C += A * B with A (m x k), B (k x n); accumulation order over k is ascending.
static void gemm_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                     std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_fail("matmul", a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out = make_result(m, n, {a, b}, [m, k, n](Node& self) {
    Node& A = in(self, 0);
    Node& B = in(self, 1);
    if (A.requires_grad) {
      // dA = dC * B^T
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double g = self.grad[i * n + j];
          if (g == 0.0) continue;
          for (std::size_t p = 0; p < k; ++p) A.grad[i * k + p] += g * B.value[p * n + j];
        }
    }
    if (B.requires_grad) {
      // dB = A^T * dC
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double av = A.value[i * k + p];
          if (av == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) B.grad[p * n + j] += av * self.grad[i * n + j];
        }
    }
  });
  gemm_acc(a.values().data(), b.values().data(), out.mutable_values().data(), m, k, n);
  return out;
}

Tensor transpose(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out = make_result(c, r, {a}, [r, c](Node& self) {
    Node& A = in(self, 0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) A.grad[i * c + j] += self.grad[j * r + i];
  });
  auto v = out.mutable_values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) v[j * r + i] = a(i, j);
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same("add", a, b);
  Tensor out = make_result(a.rows(), a.cols(), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      Node& X = in(self, k);
      if (!X.requires_grad) continue;
      for (std::size_t i = 0; i < self.grad.size(); ++i) X.grad[i] += self.grad[i];
    }
  });
  auto v = out.mutable_values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] + b.values()[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same("sub", a, b);
  Tensor out = make_result(a.rows(), a.cols(), {a, b}, [](Node& self) {
    Node& A = in(self, 0);
    Node& B = in(self, 1);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (A.requires_grad) A.grad[i] += self.grad[i];
      if (B.requires_grad) B.grad[i] -= self.grad[i];
    }
  });
  auto v = out.mutable_values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] - b.values()[i];
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same("hadamard", a, b);
  Tensor out = make_result(a.rows(), a.cols(), {a, b}, [](Node& self) {
    Node& A = in(self, 0);
    Node& B = in(self, 1);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (A.requires_grad) A.grad[i] += self.grad[i] * B.value[i];
      if (B.requires_grad) B.grad[i] += self.grad[i] * A.value[i];
    }
  });
  auto v = out.mutable_values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] * b.values()[i];
  return out;
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) shape_fail("add_bias", a, bias);
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out = make_result(r, c, {a, bias}, [r, c](Node& self) {
    Node& A = in(self, 0);
    Node& B = in(self, 1);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        const double g = self.grad[i * c + j];
        if (A.requires_grad) A.grad[i * c + j] += g;
        if (B.requires_grad) B.grad[j] += g;
      }
  });
  auto v = out.mutable_values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) v[i * c + j] = a(i, j) + bias(0, j);
  return out;
}

namespace {

// Elementwise map whose derivative is expressed through input x and output y.
template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& a, Fwd fwd, Deriv deriv) {
  Tensor out = make_result(a.rows(), a.cols(), {a}, [deriv](Node& self) {
    Node& A = in(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      A.grad[i] += self.grad[i] * deriv(A.value[i], self.value[i]);
  });
  auto v = out.mutable_values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fwd(a.values()[i]);
  return out;
}

}  // namespace

Tensor sigmoid(const Tensor& a) {
  return unary(a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor log(const Tensor& a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(a, [factor](double x) { return factor * x; }, [factor](double, double) { return factor; });
}

Tensor one_minus(const Tensor& a) {
  return unary(a, [](double x) { return 1.0 - x; }, [](double, double) { return -1.0; });
}

Tensor scalar_mul(const Tensor& s, const Tensor& a) {
  if (s.size() != 1) shape_fail("scalar_mul", s, a);
  Tensor out = make_result(a.rows(), a.cols(), {s, a}, [](Node& self) {
    Node& S = in(self, 0);
    Node& A = in(self, 1);
    const double sv = S.value[0];
    double acc = 0.0;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      acc += self.grad[i] * A.value[i];
      if (A.requires_grad) A.grad[i] += self.grad[i] * sv;
    }
    if (S.requires_grad) S.grad[0] += acc;
  });
  const double sv = s.item();
  auto v = out.mutable_values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = sv * a.values()[i];
  return out;
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  if (axis != 0 && axis != 1) throw ShapeError("concat: axis must be 0 or 1");
  std::size_t rows = 0, cols = 0;
  if (axis == 0) {
    cols = parts.front().cols();
    for (const auto& p : parts) {
      if (p.cols() != cols) shape_fail("concat", parts.front(), p);
      rows += p.rows();
    }
  } else {
    rows = parts.front().rows();
    for (const auto& p : parts) {
      if (p.rows() != rows) shape_fail("concat", parts.front(), p);
      cols += p.cols();
    }
  }
  // Offsets of each part within the result, along the concatenation axis.
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    off += axis == 0 ? p.rows() : p.cols();
  }
  Tensor out = make_result(rows, cols, parts, [axis, offsets, cols](Node& self) {
    for (std::size_t k = 0; k < self.inputs.size(); ++k) {
      Node& P = in(self, k);
      if (!P.requires_grad) continue;
      for (std::size_t i = 0; i < P.rows; ++i)
        for (std::size_t j = 0; j < P.cols; ++j) {
          const std::size_t src = axis == 0 ? (offsets[k] + i) * cols + j : i * cols + offsets[k] + j;
          P.grad[i * P.cols + j] += self.grad[src];
        }
    }
  });
  auto v = out.mutable_values();
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& p = parts[k];
    for (std::size_t i = 0; i < p.rows(); ++i)
      for (std::size_t j = 0; j < p.cols(); ++j) {
        const std::size_t dst = axis == 0 ? (offsets[k] + i) * cols + j : i * cols + offsets[k] + j;
        v[dst] = p(i, j);
      }
  }
  return out;
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  if (begin > end || end > a.cols()) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") out of bounds for " + a.shape_str());
  }
  const std::size_t r = a.rows(), c = a.cols(), w = end - begin;
  Tensor out = make_result(r, w, {a}, [r, c, w, begin](Node& self) {
    Node& A = in(self, 0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < w; ++j) A.grad[i * c + begin + j] += self.grad[i * w + j];
  });
  auto v = out.mutable_values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < w; ++j) v[i * w + j] = a(i, begin + j);
  return out;
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  if (begin > end || end > a.rows()) {
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") out of bounds for " + a.shape_str());
  }
  const std::size_t c = a.cols(), h = end - begin;
  Tensor out = make_result(h, c, {a}, [c, begin](Node& self) {
    Node& A = in(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) A.grad[begin * c + i] += self.grad[i];
  });
  std::copy_n(a.values().begin() + static_cast<std::ptrdiff_t>(begin * c), h * c,
              out.mutable_values().begin());
  return out;
}

Tensor row(const Tensor& a, std::size_t r) { return slice_rows(a, r, r + 1); }

Tensor pick(const Tensor& a, std::size_t r, std::size_t c) {
  if (r >= a.rows() || c >= a.cols()) {
    throw ShapeError("pick: index (" + std::to_string(r) + "," + std::to_string(c) +
                     ") out of bounds for " + a.shape_str());
  }
  const std::size_t idx = r * a.cols() + c;
  Tensor out = make_result(1, 1, {a}, [idx](Node& self) { in(self, 0).grad[idx] += self.grad[0]; });
  out.mutable_values()[0] = a.values()[idx];
  return out;
}

Tensor mean_pool(const Tensor& a, int axis) {
  if (axis != 0 && axis != 1) throw ShapeError("mean_pool: axis must be 0 or 1");
  if (a.size() == 0) throw ShapeError("mean_pool: empty input " + a.shape_str());
  const std::size_t r = a.rows(), c = a.cols();
  const std::size_t out_r = axis == 0 ? 1 : r;
  const std::size_t out_c = axis == 0 ? c : 1;
  const double inv = 1.0 / static_cast<double>(axis == 0 ? r : c);
  Tensor out = make_result(out_r, out_c, {a}, [r, c, axis, inv](Node& self) {
    Node& A = in(self, 0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) A.grad[i * c + j] += inv * self.grad[axis == 0 ? j : i];
  });
  auto v = out.mutable_values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) v[axis == 0 ? j : i] += a(i, j);
  for (auto& x : v) x *= inv;
  return out;
}

Tensor sum(const Tensor& a) {
  Tensor out = make_result(1, 1, {a}, [](Node& self) {
    Node& A = in(self, 0);
    for (auto& g : A.grad) g += self.grad[0];
  });
  double s = 0.0;
  for (double x : a.values()) s += x;
  out.mutable_values()[0] = s;
  return out;
}

Tensor sum_squares(const Tensor& a) {
  Tensor out = make_result(1, 1, {a}, [](Node& self) {
    Node& A = in(self, 0);
    for (std::size_t i = 0; i < A.grad.size(); ++i) A.grad[i] += 2.0 * A.value[i] * self.grad[0];
  });
  double s = 0.0;
  for (double x : a.values()) s += x * x;
  out.mutable_values()[0] = s;
  return out;
}

Tensor embedding_lookup(const Tensor& table, std::span<const int> ids) {
  const std::size_t c = table.cols();
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= table.rows()) {
      throw ShapeError("embedding_lookup: id " + std::to_string(id) + " out of range for table " +
                       table.shape_str());
    }
  }
  std::vector<int> idv(ids.begin(), ids.end());
  Tensor out = make_result(ids.size(), c, {table}, [idv, c](Node& self) {
    Node& T = in(self, 0);
    for (std::size_t i = 0; i < idv.size(); ++i)
      for (std::size_t j = 0; j < c; ++j) T.grad[static_cast<std::size_t>(idv[i]) * c + j] += self.grad[i * c + j];
  });
  auto v = out.mutable_values();
  for (std::size_t i = 0; i < idv.size(); ++i)
    for (std::size_t j = 0; j < c; ++j) v[i * c + j] = table(static_cast<std::size_t>(idv[i]), j);
  return out;
}

Tensor masked_softmax(const Tensor& scores, const Mask& mask) {
  if (mask.rows != scores.rows() || mask.cols != scores.cols()) {
    throw ShapeError("masked_softmax: mask [" + std::to_string(mask.rows) + "x" +
                     std::to_string(mask.cols) + "] does not match scores " + scores.shape_str());
  }
  const std::size_t r = scores.rows(), c = scores.cols();
  Tensor out = make_result(r, c, {scores}, [r, c](Node& self) {
    Node& S = in(self, 0);
    for (std::size_t i = 0; i < r; ++i) {
      const double* y = &self.value[i * c];
      const double* g = &self.grad[i * c];
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += y[j] * g[j];
      for (std::size_t j = 0; j < c; ++j) S.grad[i * c + j] += y[j] * (g[j] - dot);
    }
  });
  auto v = out.mutable_values();
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < c; ++j)
      if (mask(i, j)) {
        mx = std::max(mx, scores(i, j));
        any = true;
      }
    if (!any) throw NumericError("masked_softmax: row " + std::to_string(i) + " is fully masked");
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (!mask(i, j)) continue;
      v[i * c + j] = std::exp(scores(i, j) - mx);
      total += v[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) v[i * c + j] /= total;
  }
  return out;
}

Tensor lstm_pointwise(const Tensor& preact, const Tensor& c_prev) {
  const std::size_t h = c_prev.cols();
  if (preact.rows() != 1 || c_prev.rows() != 1 || preact.cols() != 4 * h) {
    shape_fail("lstm_pointwise", preact, c_prev);
  }
  // Gate activations cached for backward: i, f, g, o, tanh(c).
  auto cache = std::make_shared<std::vector<double>>(5 * h);
  Tensor out = make_result(1, 2 * h, {preact, c_prev}, [h, cache](Node& self) {
    Node& Z = in(self, 0);
    Node& C = in(self, 1);
    const auto& k = *cache;
    for (std::size_t j = 0; j < h; ++j) {
      const double ig = k[j], fg = k[h + j], gg = k[2 * h + j], og = k[3 * h + j], tc = k[4 * h + j];
      const double dh = self.grad[j];
      const double dc = self.grad[h + j] + dh * og * (1.0 - tc * tc);
      if (Z.requires_grad) {
        Z.grad[j] += dc * gg * ig * (1.0 - ig);
        Z.grad[h + j] += dc * C.value[j] * fg * (1.0 - fg);
        Z.grad[2 * h + j] += dc * ig * (1.0 - gg * gg);
        Z.grad[3 * h + j] += dh * tc * og * (1.0 - og);
      }
      if (C.requires_grad) C.grad[j] += dc * fg;
    }
  });
  auto v = out.mutable_values();
  auto& k = *cache;
  for (std::size_t j = 0; j < h; ++j) {
    const double ig = stable_sigmoid(preact(0, j));
    const double fg = stable_sigmoid(preact(0, h + j));
    const double gg = std::tanh(preact(0, 2 * h + j));
    const double og = stable_sigmoid(preact(0, 3 * h + j));
    const double c = fg * c_prev(0, j) + ig * gg;
    const double tc = std::tanh(c);
    k[j] = ig;
    k[h + j] = fg;
    k[2 * h + j] = gg;
    k[3 * h + j] = og;
    k[4 * h + j] = tc;
    v[j] = og * tc;
    v[h + j] = c;
  }
  return out;
}

LstmState lstm_cell_projected(const Tensor& projected_x, const Tensor& h_prev, const Tensor& c_prev,
                              const LstmParams& params) {
  const std::size_t h = params.hidden();
  if (h_prev.rows() != 1 || h_prev.cols() != h) shape_fail("lstm_cell", h_prev, params.w_h);
  if (c_prev.rows() != 1 || c_prev.cols() != h) shape_fail("lstm_cell", c_prev, params.w_h);
  Tensor pre = add(projected_x, matmul(h_prev, params.w_h));
  Tensor hc = lstm_pointwise(pre, c_prev);
  return {slice_cols(hc, 0, h), slice_cols(hc, h, 2 * h)};
}

LstmState lstm_cell(const Tensor& x, const Tensor& h_prev, const Tensor& c_prev,
                    const LstmParams& params) {
  if (x.rows() != 1 || x.cols() != params.input()) shape_fail("lstm_cell", x, params.w_x);
  return lstm_cell_projected(add_bias(matmul(x, params.w_x), params.bias), h_prev, c_prev, params);
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.rows() != 1 || loss.cols() != 1) {
    throw ShapeError("backward: loss must be a scalar [1x1], got " +
                     (loss.defined() ? loss.shape_str() : std::string("undefined")));
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order (inputs before users).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  Node* root = loss.node().get();
  stack.emplace_back(root, 0);
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && child->backward && seen.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (Node* n : order)
    if (n->backward) std::fill(n->grad.begin(), n->grad.end(), 0.0);
  root->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward) n->backward(*n);
  }
}

}  // namespace ialcpg::ag
