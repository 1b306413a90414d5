#pragma once

#include <functional>
#include <span>
#include <vector>

namespace radloc {

struct LbfgsOptions {
  int max_iterations = 100;
  int memory = 10;
  double grad_tolerance = 1e-8;
  double wolfe_c1 = 1e-4;  // sufficient decrease
  double wolfe_c2 = 0.9;   // curvature
  int max_line_search_steps = 40;
};

struct LbfgsResult {
  std::vector<double> x;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // f after each accepted step
};

/// Objective callback: writes the gradient into `grad` and returns f(x).
using LbfgsObjective =
    std::function<double(std::span<const double> x, std::span<double> grad)>;

/// Limited-memory BFGS with a strong-Wolfe line search. Accepted steps are
/// monotone in f by construction.
LbfgsResult lbfgs_minimize(const LbfgsObjective& objective,
                           std::vector<double> x0,
                           const LbfgsOptions& options = {});

}  // namespace radloc
