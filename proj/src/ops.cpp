#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bioel/error.hpp"
#include "bioel/graph.hpp"

namespace bioel {

namespace {

using detail::accumulate;
using detail::grad_buffer;
using detail::Node;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string shape_of(const Matd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Graph* graph_from(const Var& v) { return v.graph(); }

// Window-stacked view of x for a width-k same convolution: row t holds the
// rows of x in [t-(k-1)/2, t+(k-1)/2], zero outside [0, L).
Matd im2col(const Matd& x, int k) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index din = x.cols();
  const int half = (k - 1) / 2;
  Matd xt = Matd::Zero(rows, Eigen::Index(k) * din);
  for (int o = 0; o < k; ++o) {
    const Eigen::Index shift = Eigen::Index(o) - half;  // source = t + shift
    const Eigen::Index t0 = std::max<Eigen::Index>(0, -shift);
    const Eigen::Index t1 = std::min<Eigen::Index>(rows, rows - shift);
    if (t1 <= t0) continue;
    xt.block(t0, Eigen::Index(o) * din, t1 - t0, din) = x.middleRows(t0 + shift, t1 - t0);
  }
  return xt;
}

Matd col2im(const Matd& dxt, int k, Eigen::Index rows, Eigen::Index din) {
  const int half = (k - 1) / 2;
  Matd dx = Matd::Zero(rows, din);
  for (int o = 0; o < k; ++o) {
    const Eigen::Index shift = Eigen::Index(o) - half;
    const Eigen::Index t0 = std::max<Eigen::Index>(0, -shift);
    const Eigen::Index t1 = std::min<Eigen::Index>(rows, rows - shift);
    if (t1 <= t0) continue;
    dx.middleRows(t0 + shift, t1 - t0) += dxt.block(t0, Eigen::Index(o) * din, t1 - t0, din);
  }
  return dx;
}

}  // namespace

Var add(Var a, Var b) {
  const Matd& av = a.value();
  const Matd& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) {
    throw InvariantError("add: shape mismatch " + shape_of(av) + " vs " + shape_of(bv));
  }
  return graph_from(a)->record("add", av + bv, {a, b}, [](Node& n) {
    accumulate(*n.parents[0], n.grad);
    accumulate(*n.parents[1], n.grad);
  });
}

Var matmul(Var a, Var b) {
  const Matd& av = a.value();
  const Matd& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw InvariantError("matmul: inner dimensions disagree, " + shape_of(av) + " * " +
                         shape_of(bv));
  }
  return graph_from(a)->record("matmul", av * bv, {a, b}, [](Node& n) {
    const Matd& av = *n.parents[0]->val;
    const Matd& bv = *n.parents[1]->val;
    accumulate(*n.parents[0], n.grad * bv.transpose());
    accumulate(*n.parents[1], av.transpose() * n.grad);
  });
}

Var transpose(Var a) {
  return graph_from(a)->record("transpose", a.value().transpose(), {a}, [](Node& n) {
    accumulate(*n.parents[0], n.grad.transpose());
  });
}

Var scale(Var a, double s) {
  return graph_from(a)->record("scale", a.value() * s, {a}, [s](Node& n) {
    accumulate(*n.parents[0], n.grad * s);
  });
}

Var linear(Var x, Var w, Var b) {
  const Matd& xv = x.value();
  const Matd& wv = w.value();
  const Matd& bv = b.value();
  if (xv.cols() != wv.rows()) {
    throw InvariantError("linear: input " + shape_of(xv) + " does not match weight " +
                         shape_of(wv));
  }
  if (bv.rows() != 1 || bv.cols() != wv.cols()) {
    throw InvariantError("linear: bias " + shape_of(bv) + " does not match weight " +
                         shape_of(wv));
  }
  Matd out = xv * wv;
  out.rowwise() += bv.row(0);
  return graph_from(x)->record("linear", std::move(out), {x, w, b}, [](Node& n) {
    Node& x = *n.parents[0];
    Node& w = *n.parents[1];
    Node& b = *n.parents[2];
    accumulate(x, n.grad * w.val->transpose());
    accumulate(w, x.val->transpose() * n.grad);
    accumulate(b, n.grad.colwise().sum());
  });
}

Var relu(Var x) {
  return graph_from(x)->record("relu", x.value().cwiseMax(0.0), {x}, [](Node& n) {
    const Matd& xv = *n.parents[0]->val;
    accumulate(*n.parents[0],
               ((xv.array() > 0.0).cast<double>() * n.grad.array()).matrix());
  });
}

Var tanh(Var x) {
  return graph_from(x)->record("tanh", x.value().array().tanh().matrix(), {x}, [](Node& n) {
    const Matd& y = *n.val;
    accumulate(*n.parents[0], ((1.0 - y.array().square()) * n.grad.array()).matrix());
  });
}

Var conv1d_same(Var x, Var w, Var b, int width) {
  if (width < 1 || width % 2 == 0) {
    throw InvariantError("conv1d_same: kernel width must be odd and positive, got " +
                         std::to_string(width));
  }
  const Matd& xv = x.value();
  const Matd& wv = w.value();
  const Matd& bv = b.value();
  if (xv.rows() < 1) throw InvariantError("conv1d_same: empty input");
  if (wv.rows() != Eigen::Index(width) * xv.cols()) {
    throw InvariantError("conv1d_same: filter bank " + shape_of(wv) + " does not match width " +
                         std::to_string(width) + " over input " + shape_of(xv));
  }
  if (bv.rows() != 1 || bv.cols() != wv.cols()) {
    throw InvariantError("conv1d_same: bias " + shape_of(bv) + " does not match filter bank " +
                         shape_of(wv));
  }
  Matd out = im2col(xv, width) * wv;
  out.rowwise() += bv.row(0);
  return graph_from(x)->record("conv1d_same", std::move(out), {x, w, b}, [width](Node& n) {
    Node& x = *n.parents[0];
    Node& w = *n.parents[1];
    Node& b = *n.parents[2];
    // The stacked-window view is cheap to regather, so it is not kept alive.
    if (w.needs_grad) accumulate(w, im2col(*x.val, width).transpose() * n.grad);
    accumulate(b, n.grad.colwise().sum());
    if (x.needs_grad) {
      accumulate(x, col2im(n.grad * w.val->transpose(), width, x.val->rows(), x.val->cols()));
    }
  });
}

Var masked_softmax(Var logits, const Matd& mask) {
  const Matd& xv = logits.value();
  if (mask.rows() != xv.rows() || mask.cols() != xv.cols()) {
    throw InvariantError("masked_softmax: mask " + shape_of(mask) + " does not match logits " +
                         shape_of(xv));
  }
  if (!((mask.array() == 0.0) || (mask.array() == kNegInf)).all()) {
    throw InvariantError("masked_softmax: mask entries must be 0 or -inf");
  }
  Matd probs(xv.rows(), xv.cols());
  for (Eigen::Index i = 0; i < xv.rows(); ++i) {
    double max_logit = kNegInf;
    for (Eigen::Index j = 0; j < xv.cols(); ++j) {
      if (mask(i, j) == 0.0) max_logit = std::max(max_logit, xv(i, j));
    }
    if (max_logit == kNegInf) {
      throw InvariantError("masked_softmax: fully masked row " + std::to_string(i));
    }
    double sum = 0.0;
    for (Eigen::Index j = 0; j < xv.cols(); ++j) {
      const double e = mask(i, j) == 0.0 ? std::exp(xv(i, j) - max_logit) : 0.0;
      probs(i, j) = e;
      sum += e;
    }
    probs.row(i) /= sum;
  }
  return graph_from(logits)->record("masked_softmax", std::move(probs), {logits}, [](Node& n) {
    const Matd& p = *n.val;
    Matd dx(p.rows(), p.cols());
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const double inner = (n.grad.row(i).array() * p.row(i).array()).sum();
      dx.row(i) = (p.row(i).array() * (n.grad.row(i).array() - inner)).matrix();
    }
    accumulate(*n.parents[0], dx);
  });
}

Var softmax_rows(Var logits) {
  return masked_softmax(logits, Matd::Zero(logits.rows(), logits.cols()));
}

Var gather_rows(Var table, const std::vector<int>& ids) {
  const Matd& tv = table.value();
  Matd out(Eigen::Index(ids.size()), tv.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || Eigen::Index(ids[r]) >= tv.rows()) {
      throw DataError("gather_rows: id " + std::to_string(ids[r]) + " out of range [0, " +
                      std::to_string(tv.rows()) + ")");
    }
    out.row(Eigen::Index(r)) = tv.row(ids[r]);
  }
  return graph_from(table)->record("gather_rows", std::move(out), {table}, [ids](Node& n) {
    Node& table = *n.parents[0];
    if (!table.needs_grad) return;
    Matd& buf = grad_buffer(table);
    for (std::size_t r = 0; r < ids.size(); ++r) buf.row(ids[r]) += n.grad.row(Eigen::Index(r));
  });
}

Var slice_rows(Var x, Eigen::Index start, Eigen::Index count) {
  const Matd& xv = x.value();
  if (start < 0 || count < 1 || start + count > xv.rows()) {
    throw InvariantError("slice_rows: range [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") outside " + shape_of(xv));
  }
  return graph_from(x)->record("slice_rows", xv.middleRows(start, count), {x},
                               [start, count](Node& n) {
                                 Node& x = *n.parents[0];
                                 if (!x.needs_grad) return;
                                 grad_buffer(x).middleRows(start, count) += n.grad;
                               });
}

Var slice_cols(Var x, Eigen::Index start, Eigen::Index count) {
  const Matd& xv = x.value();
  if (start < 0 || count < 1 || start + count > xv.cols()) {
    throw InvariantError("slice_cols: range [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") outside " + shape_of(xv));
  }
  return graph_from(x)->record("slice_cols", xv.middleCols(start, count), {x},
                               [start, count](Node& n) {
                                 Node& x = *n.parents[0];
                                 if (!x.needs_grad) return;
                                 grad_buffer(x).middleCols(start, count) += n.grad;
                               });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw InvariantError("concat_rows: no inputs");
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts.front().cols();
  for (const Var& p : parts) {
    if (p.cols() != cols) throw InvariantError("concat_rows: column counts disagree");
    rows += p.rows();
  }
  Matd out(rows, cols);
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  return graph_from(parts.front())->record("concat_rows", std::move(out), parts, [](Node& n) {
    Eigen::Index at = 0;
    for (Node* p : n.parents) {
      accumulate(*p, n.grad.middleRows(at, p->val->rows()));
      at += p->val->rows();
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw InvariantError("concat_cols: no inputs");
  Eigen::Index cols = 0;
  const Eigen::Index rows = parts.front().rows();
  for (const Var& p : parts) {
    if (p.rows() != rows) throw InvariantError("concat_cols: row counts disagree");
    cols += p.cols();
  }
  Matd out(rows, cols);
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return graph_from(parts.front())->record("concat_cols", std::move(out), parts, [](Node& n) {
    Eigen::Index at = 0;
    for (Node* p : n.parents) {
      accumulate(*p, n.grad.middleCols(at, p->val->cols()));
      at += p->val->cols();
    }
  });
}

Var mask_rows(Var x, const std::vector<bool>& keep) {
  const Matd& xv = x.value();
  if (Eigen::Index(keep.size()) != xv.rows()) {
    throw InvariantError("mask_rows: flag count does not match rows");
  }
  Matd out = xv;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    if (!keep[std::size_t(i)]) out.row(i).setZero();
  }
  return graph_from(x)->record("mask_rows", std::move(out), {x}, [keep](Node& n) {
    Matd dx = n.grad;
    for (Eigen::Index i = 0; i < dx.rows(); ++i) {
      if (!keep[std::size_t(i)]) dx.row(i).setZero();
    }
    accumulate(*n.parents[0], dx);
  });
}

Var row_l2_normalize(Var x) {
  const Matd& xv = x.value();
  Matd out(xv.rows(), xv.cols());
  for (Eigen::Index i = 0; i < xv.rows(); ++i) {
    const double r = xv.row(i).norm();
    if (r < 1e-12) {
      throw InvariantError("row_l2_normalize: zero vector in row " + std::to_string(i));
    }
    out.row(i) = xv.row(i) / r;
  }
  return graph_from(x)->record("row_l2_normalize", std::move(out), {x}, [](Node& n) {
    const Matd& xv = *n.parents[0]->val;
    const Matd& y = *n.val;
    Matd dx(y.rows(), y.cols());
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const double r = xv.row(i).norm();
      const double inner = n.grad.row(i).dot(y.row(i));
      dx.row(i) = (n.grad.row(i) - inner * y.row(i)) / r;
    }
    accumulate(*n.parents[0], dx);
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  const Matd& xv = x.value();
  const Matd& gv = gain.value();
  const Matd& bv = bias.value();
  if (gv.rows() != 1 || gv.cols() != xv.cols() || bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw InvariantError("layer_norm: gain/bias must be 1x" + std::to_string(xv.cols()));
  }
  Matd out(xv.rows(), xv.cols());
  for (Eigen::Index i = 0; i < xv.rows(); ++i) {
    const double mu = xv.row(i).mean();
    const double var = (xv.row(i).array() - mu).square().mean();
    const double inv = 1.0 / std::sqrt(var + eps);
    out.row(i) = (((xv.row(i).array() - mu) * inv) * gv.row(0).array() + bv.row(0).array());
  }
  return graph_from(x)->record("layer_norm", std::move(out), {x, gain, bias}, [eps](Node& n) {
    Node& x = *n.parents[0];
    Node& gain = *n.parents[1];
    Node& bias = *n.parents[2];
    const Matd& xv = *x.val;
    const Matd& gv = *gain.val;
    const Eigen::Index cols = xv.cols();
    Matd dx(xv.rows(), cols);
    Matd dgain = Matd::Zero(1, cols);
    Matd dbias = Matd::Zero(1, cols);
    for (Eigen::Index i = 0; i < xv.rows(); ++i) {
      const double mu = xv.row(i).mean();
      const double var = (xv.row(i).array() - mu).square().mean();
      const double inv = 1.0 / std::sqrt(var + eps);
      const auto xhat = ((xv.row(i).array() - mu) * inv).eval();
      dbias.row(0) += n.grad.row(i);
      dgain.row(0).array() += n.grad.row(i).array() * xhat;
      const auto dxhat = (n.grad.row(i).array() * gv.row(0).array()).eval();
      const double m1 = dxhat.mean();
      const double m2 = (dxhat * xhat).mean();
      dx.row(i) = ((dxhat - m1 - xhat * m2) * inv).matrix();
    }
    accumulate(x, dx);
    accumulate(gain, dgain);
    accumulate(bias, dbias);
  });
}

Var pool_max(Var h, const std::vector<bool>& valid) {
  const Matd& hv = h.value();
  if (Eigen::Index(valid.size()) != hv.rows()) {
    throw InvariantError("pool_max: flag count does not match rows");
  }
  std::vector<Eigen::Index> arg(std::size_t(hv.cols()), -1);
  Matd out(1, hv.cols());
  for (Eigen::Index c = 0; c < hv.cols(); ++c) {
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < hv.rows(); ++i) {
      if (!valid[std::size_t(i)]) continue;
      if (best < 0 || hv(i, c) > hv(best, c)) best = i;
    }
    if (best < 0) throw InvariantError("pool_max: no valid positions");
    arg[std::size_t(c)] = best;
    out(0, c) = hv(best, c);
  }
  return graph_from(h)->record("pool_max", std::move(out), {h}, [arg](Node& n) {
    Node& h = *n.parents[0];
    if (!h.needs_grad) return;
    Matd& buf = grad_buffer(h);
    for (Eigen::Index c = 0; c < buf.cols(); ++c) {
      buf(arg[std::size_t(c)], c) += n.grad(0, c);
    }
  });
}

Var sum_all(Var x) {
  Matd out(1, 1);
  out(0, 0) = x.value().sum();
  return graph_from(x)->record("sum_all", std::move(out), {x}, [](Node& n) {
    Node& x = *n.parents[0];
    if (!x.needs_grad) return;
    grad_buffer(x).array() += n.grad(0, 0);
  });
}

Var diagonal_nll(Var logits) {
  const Matd& xv = logits.value();
  if (xv.rows() != xv.cols() || xv.rows() < 1) {
    throw InvariantError("diagonal_nll: logits must be square, got " + shape_of(xv));
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < xv.rows(); ++i) {
    const double m = xv.row(i).maxCoeff();
    const double lse = m + std::log((xv.row(i).array() - m).exp().sum());
    total += lse - xv(i, i);
  }
  Matd out(1, 1);
  out(0, 0) = total / double(xv.rows());
  return graph_from(logits)->record("diagonal_nll", std::move(out), {logits}, [](Node& n) {
    const Matd& xv = *n.parents[0]->val;
    const double w = n.grad(0, 0) / double(xv.rows());
    Matd dx(xv.rows(), xv.cols());
    for (Eigen::Index i = 0; i < xv.rows(); ++i) {
      const double m = xv.row(i).maxCoeff();
      const auto e = (xv.row(i).array() - m).exp().eval();
      dx.row(i) = (e / e.sum()).matrix() * w;
      dx(i, i) -= w;
    }
    accumulate(*n.parents[0], dx);
  });
}

}  // namespace bioel
