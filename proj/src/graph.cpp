#include "bioel/graph.hpp"

#include <string>

#include "bioel/error.hpp"

namespace bioel {

namespace detail {

Matd& grad_buffer(Node& n) {
  n.grad_live = true;
  if (n.grad_sink) return *n.grad_sink;
  if (n.grad.size() == 0) n.grad = Matd::Zero(n.val->rows(), n.val->cols());
  return n.grad;
}

}  // namespace detail

const Matd& Var::value() const {
  if (!node_) throw InvariantError("use of an empty Var");
  return *node_->val;
}

const Matd& Var::grad() const {
  if (!node_) throw InvariantError("use of an empty Var");
  if (!node_->grad_enabled) {
    throw InvariantError(std::string("gradient requested for a tensor without grad enabled (") +
                         node_->op + ")");
  }
  return detail::grad_buffer(*node_);
}

bool Var::grad_enabled() const {
  if (!node_) throw InvariantError("use of an empty Var");
  return node_->grad_enabled;
}

Graph* Var::graph() const {
  if (!node_) throw InvariantError("use of an empty Var");
  return node_->graph;
}

Var Graph::input(Matd value, bool grad_enabled) {
  auto n = std::make_unique<detail::Node>();
  n->owned = std::move(value);
  n->val = &n->owned;
  n->grad_enabled = grad_enabled;
  n->needs_grad = grad_enabled;
  n->graph = this;
  n->index = int(nodes_.size());
  nodes_.push_back(std::move(n));
  return Var(nodes_.back().get());
}

Var Graph::leaf(const Matd& external) {
  auto n = std::make_unique<detail::Node>();
  n->val = &external;
  n->graph = this;
  n->index = int(nodes_.size());
  nodes_.push_back(std::move(n));
  return Var(nodes_.back().get());
}

Var Graph::param(const Matd& external, Matd* grad_sink) {
  if (grad_sink && (grad_sink->rows() != external.rows() || grad_sink->cols() != external.cols())) {
    throw InvariantError("parameter gradient sink shape does not match the parameter");
  }
  auto n = std::make_unique<detail::Node>();
  n->val = &external;
  n->grad_sink = grad_sink;
  n->grad_enabled = grad_sink != nullptr;
  n->needs_grad = grad_sink != nullptr;
  n->graph = this;
  n->index = int(nodes_.size());
  nodes_.push_back(std::move(n));
  return Var(nodes_.back().get());
}

Var Graph::record(const char* op, Matd value, const std::vector<Var>& parents,
                  std::function<void(detail::Node&)> backprop) {
  if (!value.allFinite()) {
    throw InvariantError(std::string("non-finite values produced by ") + op);
  }
  auto n = std::make_unique<detail::Node>();
  n->op = op;
  n->owned = std::move(value);
  n->val = &n->owned;
  n->graph = this;
  n->index = int(nodes_.size());
  n->parents.reserve(parents.size());
  for (const Var& p : parents) {
    if (!p.node_ || p.node_->graph != this) {
      throw InvariantError(std::string(op) + ": inputs must belong to the same graph");
    }
    n->parents.push_back(p.node_);
    n->needs_grad = n->needs_grad || p.node_->needs_grad;
  }
  if (n->needs_grad) n->backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var(nodes_.back().get());
}

void Graph::backward(const Var& output) {
  if (!output.node_) throw InvariantError("backward: empty output");
  if (output.rows() != 1 || output.cols() != 1) {
    throw InvariantError("backward requires a scalar output; got " +
                         std::to_string(output.rows()) + "x" + std::to_string(output.cols()));
  }
  backward(output, Matd::Ones(1, 1));
}

void Graph::backward(const Var& output, const Matd& seed) {
  detail::Node* out = output.node_;
  if (!out || out->graph != this) throw InvariantError("backward: output is not in this graph");
  if (ran_backward_) {
    throw InvariantError("backward already ran for this graph; record a fresh forward trace");
  }
  ran_backward_ = true;
  if (seed.rows() != out->val->rows() || seed.cols() != out->val->cols()) {
    throw InvariantError("backward: seed shape does not match the output");
  }
  detail::grad_buffer(*out) += seed;
  for (int i = out->index; i >= 0; --i) {
    detail::Node& n = *nodes_[std::size_t(i)];
    if (n.grad_live && n.needs_grad && n.backprop) n.backprop(n);
  }
}

}  // namespace bioel
