#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bioel/graph.hpp"

namespace bioel {

// A differentiable computation: given a graph and one leaf per input tensor,
// build the forward trace and return a scalar (1x1) output.
using GraphFn = std::function<Var(Graph&, const std::vector<Var>&)>;

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> inputs;  // one entry per input tensor
  double max_rel_err = 0.0;
  bool pass = true;
};

// One reverse pass; returns the gradient for every input, in order.
std::vector<Matd> analytic_gradients(const GraphFn& f, const std::vector<Matd>& inputs);

// Central differences, (f(x+h) - f(x-h)) / 2h per coordinate, forward
// evaluations only. Inputs must sit away from non-differentiable points
// (no coordinate within h of a ReLU kink).
std::vector<Matd> numeric_gradients(const GraphFn& f, const std::vector<Matd>& inputs, double h);

// Relative error |a - n| / (|a| + |n| + 1e-12), reported per input tensor.
GradCheckReport compare_gradients(const std::vector<Matd>& analytic,
                                  const std::vector<Matd>& numeric, double tol,
                                  const std::vector<std::string>& names = {});

GradCheckReport finite_difference_check(const GraphFn& f, const std::vector<Matd>& inputs,
                                        double h, double tol,
                                        const std::vector<std::string>& names = {});

}  // namespace bioel
