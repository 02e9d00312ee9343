#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "bioel/matrix.hpp"

namespace bioel {

class Graph;

namespace detail {

struct Node {
  Matd owned;                  // storage when the graph owns the value
  const Matd* val = nullptr;   // points at `owned` or at external storage
  Matd grad;                   // lazily sized; unused when grad_sink is set
  Matd* grad_sink = nullptr;   // external accumulator for parameter leaves
  bool grad_enabled = false;   // leaf participates in differentiation
  bool needs_grad = false;     // some grad-enabled leaf is upstream
  bool grad_live = false;      // grad buffer has received a contribution
  const char* op = "leaf";
  int index = 0;
  Graph* graph = nullptr;
  std::vector<Node*> parents;
  std::function<void(Node&)> backprop;
};

Matd& grad_buffer(Node& n);

// Adds an upstream contribution to a parent, skipping subgraphs that cannot
// reach a grad-enabled leaf. Fan-out sums naturally through repeated calls.
template <typename Expr>
void accumulate(Node& parent, const Expr& contribution) {
  if (!parent.needs_grad) return;
  grad_buffer(parent) += contribution;
}

}  // namespace detail

// Cheap handle to a graph-owned tensor; valid while its Graph is alive.
class Var {
 public:
  Var() = default;

  const Matd& value() const;
  // Accumulated gradient of a grad-enabled leaf; valid after backward().
  const Matd& grad() const;
  bool grad_enabled() const;
  Graph* graph() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  explicit operator bool() const { return node_ != nullptr; }

 private:
  friend class Graph;
  explicit Var(detail::Node* n) : node_(n) {}
  detail::Node* node_ = nullptr;
};

// Ordered record of executed primitives. Nodes are appended in execution
// order, so the tape is always topologically sorted; backward() replays it
// in reverse exactly once.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Leaf owning a copy of `value`.
  Var input(Matd value, bool grad_enabled = false);
  // Leaf aliasing external storage (no copy, no gradient).
  Var leaf(const Matd& external);
  // Leaf aliasing external storage whose gradient accumulates into
  // *grad_sink (same shape, caller-zeroed). Null sink marks it frozen.
  Var param(const Matd& external, Matd* grad_sink);

  // Reverse pass from a scalar (1x1) output.
  void backward(const Var& output);
  // Reverse pass with an explicit upstream gradient (vector-Jacobian form).
  void backward(const Var& output, const Matd& seed);

  std::size_t size() const { return nodes_.size(); }

  // Records one executed primitive. Used by the op library.
  Var record(const char* op, Matd value, const std::vector<Var>& parents,
             std::function<void(detail::Node&)> backprop);

 private:
  std::vector<std::unique_ptr<detail::Node>> nodes_;
  bool ran_backward_ = false;
};

// ---- Primitives -----------------------------------------------------------

Var add(Var a, Var b);
Var matmul(Var a, Var b);
Var transpose(Var a);
Var scale(Var a, double s);

// Position-wise affine map: out[i] = x[i] * w + b, with b a 1 x d_out row.
Var linear(Var x, Var w, Var b);

// Elementwise max(0, x); the subgradient at exactly 0 is 0.
Var relu(Var x);
Var tanh(Var x);

// Same-length 1-D convolution over rows of x (L x d_in) with zero padding
// outside [0, L). The filter bank w is (width * d_in) x channels with window
// offsets stacked top to bottom; width must be odd.
Var conv1d_same(Var x, Var w, Var b, int width);

// Row-wise softmax of logits + mask, computed with per-row max subtraction.
// Mask entries must be 0 or -inf; masked entries come out exactly 0.
Var masked_softmax(Var logits, const Matd& mask);
Var softmax_rows(Var logits);

Var gather_rows(Var table, const std::vector<int>& ids);
Var slice_rows(Var x, Eigen::Index start, Eigen::Index count);
Var slice_cols(Var x, Eigen::Index start, Eigen::Index count);
Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);

// Zeroes the rows whose keep flag is false (padding rows, gradient included).
Var mask_rows(Var x, const std::vector<bool>& keep);

Var row_l2_normalize(Var x);
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

// Per-channel max over rows with valid[i] set. At least one row must be valid.
Var pool_max(Var h, const std::vector<bool>& valid);

Var sum_all(Var x);

// Mean over rows i of -log softmax(logits[i])[i]; logits must be square.
Var diagonal_nll(Var logits);

}  // namespace bioel
