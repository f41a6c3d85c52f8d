#pragma once

// Dense rank-2 tensors with reverse-mode differentiation.
//
// Every tensor is a rows x cols matrix of doubles; vectors are 1 x n rows.
// Operations build a graph as they run. backward() on a 1x1 loss walks the
// graph in reverse topological order and accumulates gradients into every
// tensor that requires them. Leaf gradients persist until zero_grad().

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ialcpg::ag {

struct Node {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into inputs' grads.
  std::function<void(Node&)> backward;
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
  static Tensor filled(std::size_t rows, std::size_t cols, double v, bool requires_grad = false);
  static Tensor from(std::size_t rows, std::size_t cols, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor row_vector(std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  std::size_t rows() const { return node_->rows; }
  std::size_t cols() const { return node_->cols; }
  std::size_t size() const { return node_->value.size(); }
  std::vector<std::size_t> shape() const { return {node_->rows, node_->cols}; }
  std::string shape_str() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on);

  std::span<const double> values() const { return node_->value; }
  std::span<double> mutable_values() { return node_->value; }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() { return node_->grad; }

  double operator()(std::size_t r, std::size_t c) const { return node_->value[r * node_->cols + c]; }
  double& at(std::size_t r, std::size_t c) { return node_->value[r * node_->cols + c]; }
  double grad_at(std::size_t r, std::size_t c) const { return node_->grad[r * node_->cols + c]; }
  /// Value of a 1x1 tensor.
  double item() const;

  void zero_grad();
  /// Detached deep copy of the values.
  Tensor clone() const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  friend Tensor make_result(std::size_t, std::size_t, std::vector<Tensor>,
                            std::function<void(Node&)>);
  std::shared_ptr<Node> node_;
};

// Internal helper shared by op implementations: builds a result node and wires
// the backward closure only when some input requires a gradient.
Tensor make_result(std::size_t rows, std::size_t cols, std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward);

/// Boolean matrix used by masked_softmax; true marks an entry that participates.
struct Mask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> on;

  static Mask all(std::size_t rows, std::size_t cols, bool value = true);
  /// Band |i - j| <= half_width on a square matrix.
  static Mask band(std::size_t n, std::size_t half_width);
  /// Repeats a column mask (length cols) on every row.
  static Mask rows_of(std::size_t rows, const std::vector<std::uint8_t>& column_mask);

  bool operator()(std::size_t r, std::size_t c) const { return on[r * cols + c] != 0; }
  void set(std::size_t r, std::size_t c, bool v) { on[r * cols + c] = v ? 1 : 0; }
  std::size_t count() const;
};

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
/// a (r x c) plus a 1 x c row added to every row. The only broadcast supported.
Tensor add_bias(const Tensor& a, const Tensor& bias);

Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor log(const Tensor& a);

Tensor scale(const Tensor& a, double factor);
/// Multiplies every entry of a by the 1x1 tensor s.
Tensor scalar_mul(const Tensor& s, const Tensor& a);
/// 1 - a, elementwise.
Tensor one_minus(const Tensor& a);

/// axis 0 stacks rows, axis 1 joins columns.
Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor row(const Tensor& a, std::size_t r);
Tensor pick(const Tensor& a, std::size_t r, std::size_t c);

/// axis 0 averages over rows (result 1 x cols), axis 1 over columns (rows x 1).
Tensor mean_pool(const Tensor& a, int axis);
Tensor sum(const Tensor& a);
Tensor sum_squares(const Tensor& a);

/// Gathers table rows; ids must be < table.rows().
Tensor embedding_lookup(const Tensor& table, std::span<const int> ids);

/// Row-wise softmax over unmasked entries. Masked entries come out as exactly 0.
/// Throws NumericError if any row has no unmasked entry.
Tensor masked_softmax(const Tensor& scores, const Mask& mask);

/// Fused LSTM gate arithmetic. preact is 1 x 4H in gate order
/// [input, forget, candidate, output]; returns 1 x 2H holding [h, c].
Tensor lstm_pointwise(const Tensor& preact, const Tensor& c_prev);

struct LstmParams {
  Tensor w_x;   // in x 4H
  Tensor w_h;   // H x 4H
  Tensor bias;  // 1 x 4H
  std::size_t hidden() const { return w_h.rows(); }
  std::size_t input() const { return w_x.rows(); }
};

struct LstmState {
  Tensor h;
  Tensor c;
};

LstmState lstm_cell(const Tensor& x, const Tensor& h_prev, const Tensor& c_prev,
                    const LstmParams& params);
/// Same as lstm_cell with x * w_x + bias already computed (1 x 4H).
LstmState lstm_cell_projected(const Tensor& projected_x, const Tensor& h_prev,
                              const Tensor& c_prev, const LstmParams& params);

/// Computes reachable gradients of a 1x1 loss. Intermediate gradients are
/// recomputed each call; leaf gradients accumulate.
void backward(const Tensor& loss);

}  // namespace ialcpg::ag
