#pragma once

#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "geoshoot/core.hpp"
#include "geoshoot/shooting.hpp"

namespace geoshoot {

// Limited-memory quasi-Newton minimization of the registration objective over
// the initial momenta, self-contained so the line-search behavior is
// testable. The generic core below works on flat coefficient vectors; the
// registration entry point adapts the shooting evaluation to it.

enum class TerminationReason {
  GradientTolerance,
  ObjectiveTolerance,
  MaxIterations,
  LineSearchFailure,
  NonFinite,
};

const char* to_string(TerminationReason r);

struct TraceRecord {
  int iteration = 0;
  double total = 0.0;
  double energy = 0.0;
  double attachment = 0.0;
  double grad_inf = 0.0;
  double wall_ms = 0.0;
};

struct OptimizationTrace {
  std::vector<TraceRecord> records;
  TerminationReason reason = TerminationReason::MaxIterations;

  /// Columns exactly: iter,total,energy,attachment,grad_inf,wall_ms
  void write_csv(std::ostream& os) const;
};

// --- Generic core ------------------------------------------------------------

/// Evaluates f(x) and writes the gradient into grad (resized by the callee).
/// May return +inf to reject x (e.g. a blown-up forward integration).
using ObjectiveFn =
    std::function<double(const std::vector<double>& x, std::vector<double>& grad)>;

/// Called once per accepted iterate (including the starting point, iter 0).
using IterateCallback = std::function<void(int iteration, double f,
                                           double grad_inf, double wall_ms)>;

struct MinimizeResult {
  std::vector<double> x;
  double f = 0.0;
  double grad_inf = 0.0;
  TerminationReason reason = TerminationReason::MaxIterations;
  int iterations = 0;
  int evaluations = 0;
};

/// L-BFGS with a strong-Wolfe line search. Every accepted iterate strictly
/// decreases f; the first search direction is steepest descent. A failed
/// line search terminates with the best iterate found so far.
MinimizeResult minimize(const ObjectiveFn& objective, std::vector<double> x0,
                        const OptimizerConfig& config,
                        const IterateCallback& on_iterate = {});

// --- Registration entry point --------------------------------------------------

/// Minimizes H(q0, p0) + lambda |q(1) - target|^2 over p0, starting from
/// p0 = 0 (the identity transform). eval_stats, when given, accumulates
/// instrumentation over every objective evaluation.
std::pair<MomentumSet, OptimizationTrace> optimize(const PointSet& q0,
                                                   const PointSet& target,
                                                   const ShootingConfig& config,
                                                   EvalStats* eval_stats = nullptr,
                                                   int threads = 0);

}  // namespace geoshoot
