#include "geoshoot/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <ostream>

namespace geoshoot {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double inf = std::numeric_limits<double>::infinity();

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double two_norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

struct HistoryPair {
  std::vector<double> s, y;
  double rho;
};

// Two-loop recursion; with empty history this is plain steepest descent.
std::vector<double> search_direction(const std::vector<double>& grad,
                                     const std::deque<HistoryPair>& history) {
  std::vector<double> d = grad;
  if (!history.empty()) {
    std::vector<double> a(history.size());
    for (std::size_t i = history.size(); i-- > 0;) {
      a[i] = history[i].rho * dot(history[i].s, d);
      for (std::size_t k = 0; k < d.size(); ++k) d[k] -= a[i] * history[i].y[k];
    }
    const HistoryPair& newest = history.back();
    const double gamma =
        dot(newest.s, newest.y) / dot(newest.y, newest.y);
    for (double& v : d) v *= gamma;
    for (std::size_t i = 0; i < history.size(); ++i) {
      const double b = history[i].rho * dot(history[i].y, d);
      for (std::size_t k = 0; k < d.size(); ++k)
        d[k] += (a[i] - b) * history[i].s[k];
    }
  }
  for (double& v : d) v = -v;
  return d;
}

struct LineSearchOutcome {
  bool ok = false;
  double step = 0.0;
  double f = inf;
  std::vector<double> x, g;
};

struct Evaluator {
  const ObjectiveFn& objective;
  int count = 0;

  double operator()(const std::vector<double>& x, std::vector<double>& g) {
    ++count;
    return objective(x, g);
  }
};

// Strong-Wolfe search along d from (x0, f0, g0). Evaluation budget is
// max_trials across both the bracketing and the zoom phase; if the budget
// runs out, the best point satisfying sufficient decrease (if any) is
// re-evaluated and accepted so that the caller's notion of "last evaluation"
// always refers to the accepted point.
LineSearchOutcome wolfe_line_search(Evaluator& eval,
                                    const std::vector<double>& x0, double f0,
                                    const std::vector<double>& g0,
                                    const std::vector<double>& d,
                                    double initial_step,
                                    const LineSearchConfig& cfg) {
  const double dphi0 = dot(g0, d);
  LineSearchOutcome out;
  if (dphi0 >= 0.0) return out;  // not a descent direction
  const double c1 = cfg.sufficient_decrease;
  const double c2 = cfg.curvature;

  const auto at = [&](double a) {
    std::vector<double> x(x0.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x0[i] + a * d[i];
    return x;
  };
  const auto armijo_ok = [&](double a, double fa) {
    return fa <= f0 + c1 * a * dphi0;
  };

  int trials = 0;
  double best_a = 0.0, best_f = f0;

  std::vector<double> g;
  double a_prev = 0.0, f_prev = f0;
  double a = initial_step;
  double lo = -1.0, hi = -1.0, f_lo = 0.0;
  bool zooming = false;

  while (trials < cfg.max_trials) {
    if (!zooming) {
      std::vector<double> x = at(a);
      const double fa = eval(x, g);
      ++trials;
      const double dphia = std::isfinite(fa) ? dot(g, d) : 0.0;
      if (!std::isfinite(fa) || !armijo_ok(a, fa) ||
          (trials > 1 && fa >= f_prev)) {
        lo = a_prev;
        f_lo = f_prev;
        hi = a;
        zooming = true;
        continue;
      }
      if (fa < best_f) {
        best_a = a;
        best_f = fa;
      }
      if (std::abs(dphia) <= -c2 * dphi0) {
        out.ok = true;
        out.step = a;
        out.f = fa;
        out.x = std::move(x);
        out.g = std::move(g);
        return out;
      }
      if (dphia >= 0.0) {
        lo = a;
        f_lo = fa;
        hi = a_prev;
        zooming = true;
        continue;
      }
      a_prev = a;
      f_prev = fa;
      a *= 2.0;
    } else {
      const double am = 0.5 * (lo + hi);
      std::vector<double> x = at(am);
      const double fm = eval(x, g);
      ++trials;
      const double dphim = std::isfinite(fm) ? dot(g, d) : 0.0;
      if (!std::isfinite(fm) || !armijo_ok(am, fm) || fm >= f_lo) {
        hi = am;
        continue;
      }
      if (fm < best_f) {
        best_a = am;
        best_f = fm;
      }
      if (std::abs(dphim) <= -c2 * dphi0) {
        out.ok = true;
        out.step = am;
        out.f = fm;
        out.x = std::move(x);
        out.g = std::move(g);
        return out;
      }
      if (dphim * (hi - lo) >= 0.0) hi = lo;
      lo = am;
      f_lo = fm;
    }
  }

  // Budget exhausted: fall back to the best sufficient-decrease point.
  if (best_a > 0.0 && best_f < f0) {
    std::vector<double> x = at(best_a);
    const double fb = eval(x, g);
    if (std::isfinite(fb) && fb < f0) {
      out.ok = true;
      out.step = best_a;
      out.f = fb;
      out.x = std::move(x);
      out.g = std::move(g);
    }
  }
  return out;
}

}  // namespace

const char* to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::GradientTolerance: return "gradient_tolerance";
    case TerminationReason::ObjectiveTolerance: return "objective_tolerance";
    case TerminationReason::MaxIterations: return "max_iterations";
    case TerminationReason::LineSearchFailure: return "line_search_failure";
    case TerminationReason::NonFinite: return "non_finite";
  }
  return "?";
}

void OptimizationTrace::write_csv(std::ostream& os) const {
  os << "iter,total,energy,attachment,grad_inf,wall_ms\n";
  char buf[256];
  for (const TraceRecord& r : records) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.3f\n",
                  r.iteration, r.total, r.energy, r.attachment, r.grad_inf,
                  r.wall_ms);
    os << buf;
  }
}

MinimizeResult minimize(const ObjectiveFn& objective, std::vector<double> x0,
                        const OptimizerConfig& config,
                        const IterateCallback& on_iterate) {
  const auto t0 = Clock::now();
  const auto wall_ms = [&] {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  };

  Evaluator eval{objective};
  MinimizeResult res;
  res.x = std::move(x0);

  std::vector<double> g;
  res.f = eval(res.x, g);
  if (!std::isfinite(res.f))
    throw NonFiniteObjectiveAtStart("objective is non-finite at the start point");
  res.grad_inf = inf_norm(g);
  if (on_iterate) on_iterate(0, res.f, res.grad_inf, wall_ms());

  std::deque<HistoryPair> history;
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    if (res.grad_inf <= config.gradient_tolerance) {
      res.reason = TerminationReason::GradientTolerance;
      res.evaluations = eval.count;
      return res;
    }

    std::vector<double> d = search_direction(g, history);
    if (dot(g, d) >= 0.0) {  // stale curvature; restart from steepest descent
      history.clear();
      d = g;
      for (double& v : d) v = -v;
    }
    const double initial_step =
        history.empty() ? 1.0 / std::max(1.0, res.grad_inf) : 1.0;

    LineSearchOutcome ls = wolfe_line_search(eval, res.x, res.f, g, d,
                                             initial_step, config.line_search);
    if (!ls.ok) {
      res.reason = TerminationReason::LineSearchFailure;
      res.evaluations = eval.count;
      return res;
    }
    if (!std::isfinite(inf_norm(ls.g))) {
      res.reason = TerminationReason::NonFinite;
      res.evaluations = eval.count;
      return res;
    }

    HistoryPair pair;
    pair.s.resize(res.x.size());
    pair.y.resize(res.x.size());
    for (std::size_t k = 0; k < res.x.size(); ++k) {
      pair.s[k] = ls.x[k] - res.x[k];
      pair.y[k] = ls.g[k] - g[k];
    }
    const double sy = dot(pair.s, pair.y);
    if (sy > 1e-10 * two_norm(pair.s) * two_norm(pair.y)) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (static_cast<int>(history.size()) > config.memory)
        history.pop_front();
    }

    const double f_prev = res.f;
    res.x = std::move(ls.x);
    res.f = ls.f;
    g = std::move(ls.g);
    res.grad_inf = inf_norm(g);
    res.iterations = iter;
    if (on_iterate) on_iterate(iter, res.f, res.grad_inf, wall_ms());

    if (std::abs(f_prev - res.f) <=
        config.relative_objective_tolerance * std::max(1.0, std::abs(res.f))) {
      res.reason = TerminationReason::ObjectiveTolerance;
      res.evaluations = eval.count;
      return res;
    }
  }
  res.reason = res.grad_inf <= config.gradient_tolerance
                   ? TerminationReason::GradientTolerance
                   : TerminationReason::MaxIterations;
  res.evaluations = eval.count;
  return res;
}

std::pair<MomentumSet, OptimizationTrace> optimize(const PointSet& q0,
                                                   const PointSet& target,
                                                   const ShootingConfig& config,
                                                   EvalStats* eval_stats,
                                                   int threads) {
  validate_config(config);
  require_aligned(q0.size(), target.size(), "optimize");
  const std::size_t n = q0.size();

  ObjectiveReport last_report;
  const ObjectiveFn fn = [&](const std::vector<double>& x,
                             std::vector<double>& grad) -> double {
    grad.assign(3 * n, 0.0);
    std::vector<Vec3> p(n);
    for (std::size_t i = 0; i < n; ++i)
      p[i] = {x[3 * i], x[3 * i + 1], x[3 * i + 2]};
    try {
      Evaluation ev =
          evaluate(q0, MomentumSet(std::move(p)), target, config, threads);
      if (eval_stats) eval_stats->merge(ev.stats);
      last_report = ev.report;
      for (std::size_t i = 0; i < n; ++i) {
        grad[3 * i] = ev.gradient[i].x;
        grad[3 * i + 1] = ev.gradient[i].y;
        grad[3 * i + 2] = ev.gradient[i].z;
      }
      return ev.report.total;
    } catch (const NonFiniteState&) {
      return inf;
    } catch (const std::invalid_argument&) {  // non-finite trial momenta
      return inf;
    }
  };

  OptimizationTrace trace;
  const IterateCallback record = [&](int iteration, double f, double grad_inf,
                                     double wall) {
    (void)f;
    trace.records.push_back({iteration, last_report.total, last_report.energy,
                             last_report.attachment, grad_inf, wall});
  };

  MinimizeResult res =
      minimize(fn, std::vector<double>(3 * n, 0.0), config.optimizer, record);
  trace.reason = res.reason;

  std::vector<Vec3> p_best(n);
  for (std::size_t i = 0; i < n; ++i)
    p_best[i] = {res.x[3 * i], res.x[3 * i + 1], res.x[3 * i + 2]};
  return {MomentumSet(std::move(p_best)), std::move(trace)};
}

}  // namespace geoshoot
