#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "aceg/autodiff/graph.hpp"

namespace aceg::ad {

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0.0;
  int configs = 0;
  bool passed = false;
};

struct GradCheckOptions {
  double step = 1e-3;       // finite difference step (4th-order stencil)
  double floor = 1e-6;      // denominator floor for relative error
  double tolerance = 1e-4;  // pass threshold on max relative error
  int configs = 20;         // random configurations per op
  int max_entries = 48;     // probed entries per tensor (all when smaller)
  std::uint64_t seed = 7;
};

/// Relative error |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor);

/// Compares analytic gradients with central finite differences. `loss`
/// re-evaluates the scalar objective from the current contents of `values`;
/// entries are perturbed in place and restored. Returns the max relative
/// error over the probed entries.
double finite_difference_error(const std::function<double()>& loss, std::span<Matrix<double>* const> values,
                               std::span<const Matrix<double>> analytic, const GradCheckOptions& opts);

/// Builds a graph over `inputs` (all as gradient-carrying leaves), reduces it
/// to a scalar with `build`, and checks every input gradient.
double check_graph_gradients(const std::function<Var(Graph<double>&, std::span<const Var>)>& build,
                             std::vector<Matrix<double>> inputs, const GradCheckOptions& opts);

/// Gradient checks for every differentiable engine op, each over
/// `opts.configs` random shapes and values.
std::vector<GradCheckResult> run_op_gradchecks(const GradCheckOptions& opts = {});

}  // namespace aceg::ad
