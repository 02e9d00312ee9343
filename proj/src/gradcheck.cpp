#include "bioel/gradcheck.hpp"

#include <cmath>

#include "bioel/error.hpp"

namespace bioel {

namespace {

double evaluate_scalar(const GraphFn& f, const std::vector<Matd>& inputs) {
  Graph g;
  std::vector<Var> leaves;
  leaves.reserve(inputs.size());
  for (const Matd& m : inputs) leaves.push_back(g.input(m, false));
  const Var out = f(g, leaves);
  if (out.rows() != 1 || out.cols() != 1) {
    throw InvariantError("gradient check requires a scalar-valued function");
  }
  return out.value()(0, 0);
}

}  // namespace

std::vector<Matd> analytic_gradients(const GraphFn& f, const std::vector<Matd>& inputs) {
  Graph g;
  std::vector<Var> leaves;
  leaves.reserve(inputs.size());
  for (const Matd& m : inputs) leaves.push_back(g.input(m, true));
  const Var out = f(g, leaves);
  if (out.rows() != 1 || out.cols() != 1) {
    throw InvariantError("gradient check requires a scalar-valued function");
  }
  g.backward(out);
  std::vector<Matd> grads;
  grads.reserve(leaves.size());
  for (const Var& v : leaves) grads.push_back(v.grad());
  return grads;
}

std::vector<Matd> numeric_gradients(const GraphFn& f, const std::vector<Matd>& inputs, double h) {
  if (h <= 0.0) throw InvariantError("numeric_gradients: step must be positive");
  std::vector<Matd> grads;
  grads.reserve(inputs.size());
  std::vector<Matd> work = inputs;
  for (std::size_t t = 0; t < work.size(); ++t) {
    Matd g(work[t].rows(), work[t].cols());
    for (Eigen::Index i = 0; i < work[t].rows(); ++i) {
      for (Eigen::Index j = 0; j < work[t].cols(); ++j) {
        const double saved = work[t](i, j);
        work[t](i, j) = saved + h;
        const double up = evaluate_scalar(f, work);
        work[t](i, j) = saved - h;
        const double down = evaluate_scalar(f, work);
        work[t](i, j) = saved;
        g(i, j) = (up - down) / (2.0 * h);
      }
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

GradCheckReport compare_gradients(const std::vector<Matd>& analytic,
                                  const std::vector<Matd>& numeric, double tol,
                                  const std::vector<std::string>& names) {
  if (analytic.size() != numeric.size()) {
    throw InvariantError("compare_gradients: input counts disagree");
  }
  GradCheckReport report;
  for (std::size_t t = 0; t < analytic.size(); ++t) {
    const Matd& a = analytic[t];
    const Matd& n = numeric[t];
    if (a.rows() != n.rows() || a.cols() != n.cols()) {
      throw InvariantError("compare_gradients: gradient shapes disagree");
    }
    GradCheckEntry entry;
    entry.name = t < names.size() ? names[t] : "input" + std::to_string(t);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        const double rel = std::abs(a(i, j) - n(i, j)) /
                           (std::abs(a(i, j)) + std::abs(n(i, j)) + 1e-12);
        entry.max_rel_err = std::max(entry.max_rel_err, rel);
      }
    }
    entry.pass = entry.max_rel_err <= tol;
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.pass = report.pass && entry.pass;
    report.inputs.push_back(std::move(entry));
  }
  return report;
}

GradCheckReport finite_difference_check(const GraphFn& f, const std::vector<Matd>& inputs,
                                        double h, double tol,
                                        const std::vector<std::string>& names) {
  return compare_gradients(analytic_gradients(f, inputs), numeric_gradients(f, inputs, h), tol,
                           names);
}

}  // namespace bioel
