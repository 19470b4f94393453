#include "snmpc/direct_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "snmpc/error.hpp"

namespace snmpc::ocp {

double Evaluation::max_violation() const {
  double worst = 0.0;
  for (double v : violations) worst = std::max(worst, v);
  return ok ? worst : std::numeric_limits<double>::infinity();
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::feasible_suboptimal: return "feasible-suboptimal";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

namespace {

double penalized(const Evaluation& e, double weight) {
  if (!e.ok || !std::isfinite(e.objective)) return std::numeric_limits<double>::infinity();
  double p = 0.0;
  for (double v : e.violations) {
    if (v > 0.0) p += v * v;
  }
  return e.objective + weight * p;
}

}  // namespace

SearchResult minimize_penalized(const EvaluateFn& evaluate, const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper, const Eigen::VectorXd& start,
                                const SolverBudget& budget) {
  const Eigen::Index n = start.size();
  if (lower.size() != n || upper.size() != n) throw ConfigError("direct search: bound sizes differ");
  if (budget.max_evaluations < 1 || budget.penalty_rounds < 1 ||
      !(budget.step_tolerance > 0.0) || !(budget.initial_step > 0.0) ||
      !(budget.warm_start_step > 0.0)) {
    throw ConfigError("direct search: invalid budget");
  }
  const Eigen::VectorXd range = upper - lower;

  SearchResult res;
  auto run = [&](const Eigen::VectorXd& z) {
    Evaluation e = evaluate(z);
    ++res.evaluations;
    if (!e.ok) res.failures.push_back(e.error);
    return e;
  };
  auto feasible = [&](const Evaluation& e) {
    return e.ok && e.max_violation() <= budget.feasibility_tolerance;
  };

  Eigen::VectorXd z = start.cwiseMax(lower).cwiseMin(upper);
  Evaluation current = run(z);

  // Best feasible point and least-violating point seen so far.
  Eigen::VectorXd best_feasible;
  Evaluation best_feasible_eval;
  Eigen::VectorXd least_violating = z;
  Evaluation least_violating_eval = current;
  auto track = [&](const Eigen::VectorXd& p, const Evaluation& e) {
    if (feasible(e) && (best_feasible.size() == 0 || e.objective < best_feasible_eval.objective)) {
      best_feasible = p;
      best_feasible_eval = e;
    }
    if (e.max_violation() < least_violating_eval.max_violation()) {
      least_violating = p;
      least_violating_eval = e;
    }
  };
  track(z, current);

  double weight = budget.initial_penalty;
  for (int round = 0; round < budget.penalty_rounds; ++round, weight *= budget.penalty_growth) {
    double value = penalized(current, weight);
    res.round_history.emplace_back(1, value);
    Eigen::VectorXd step = budget.initial_step * range;
    auto step_small = [&] {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (range[i] > 0.0 && step[i] >= budget.step_tolerance * range[i]) return false;
      }
      return true;
    };
    bool exhausted = false;
    auto try_point = [&](Eigen::VectorXd cand) {
      if (res.evaluations >= budget.max_evaluations) {
        exhausted = true;
        return false;
      }
      Evaluation e = run(cand);
      track(cand, e);
      const double v = penalized(e, weight);
      if (!(v < value)) return false;
      z = std::move(cand);
      current = std::move(e);
      value = v;
      res.round_history.back().push_back(value);
      return true;
    };
    while (!step_small() && !exhausted) {
      Eigen::VectorXd base = z;
      bool improved = false;
      for (Eigen::Index i = 0; i < n && !exhausted; ++i) {
        if (!(range[i] > 0.0)) continue;
        for (double sign : {1.0, -1.0}) {
          Eigen::VectorXd cand = z;
          cand[i] = std::clamp(z[i] + sign * step[i], lower[i], upper[i]);
          if (cand[i] == z[i]) continue;
          if (try_point(std::move(cand))) {
            improved = true;
            break;
          }
          if (exhausted) break;
        }
      }
      if (!improved) {
        step *= 0.5;
        continue;
      }
      // Pattern move along the direction of the last sweep.
      while (!exhausted) {
        const Eigen::VectorXd from = z;
        Eigen::VectorXd cand = (2.0 * z - base).cwiseMax(lower).cwiseMin(upper);
        if (cand == z || !try_point(std::move(cand))) break;
        base = from;
      }
    }
    res.converged = step_small();
    if (feasible(current) || exhausted) break;
  }

  if (feasible(current)) {
    res.point = z;
    res.evaluation = current;
  } else if (best_feasible.size() > 0) {
    res.point = best_feasible;
    res.evaluation = best_feasible_eval;
  } else {
    res.point = least_violating;
    res.evaluation = least_violating_eval;
  }
  if (!feasible(res.evaluation)) {
    res.status = SolveStatus::infeasible;
  } else {
    res.status = res.converged ? SolveStatus::optimal : SolveStatus::feasible_suboptimal;
  }
  return res;
}

}  // namespace snmpc::ocp
