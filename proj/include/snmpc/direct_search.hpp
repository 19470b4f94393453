#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace snmpc::ocp {

/// Objective value and constraint violations of one candidate. Entries of
/// `violations` are amounts by which a constraint is broken (<= 0 means
/// satisfied). `ok == false` marks a candidate that could not be evaluated.
struct Evaluation {
  double objective = 0.0;
  std::vector<double> violations;
  bool ok = true;
  std::string error;

  double max_violation() const;
};

using EvaluateFn = std::function<Evaluation(const Eigen::VectorXd&)>;

struct SolverBudget {
  int max_evaluations = 150;
  double initial_penalty = 1e3;
  double penalty_growth = 10.0;
  int penalty_rounds = 4;
  /// A round ends when every coordinate step falls below this fraction of
  /// its bound range.
  double step_tolerance = 1e-4;
  /// Starting coordinate step as a fraction of the bound range.
  double initial_step = 0.1;
  /// Starting step used by solve_ocp when a warm start is supplied.
  double warm_start_step = 0.02;
  double feasibility_tolerance = 1e-6;
};

enum class SolveStatus { optimal, feasible_suboptimal, infeasible };

const char* to_string(SolveStatus status);

struct SearchResult {
  Eigen::VectorXd point;
  Evaluation evaluation;
  SolveStatus status = SolveStatus::infeasible;
  int evaluations = 0;
  bool converged = false;
  /// Accepted penalized values, one list per penalty round.
  std::vector<std::vector<double>> round_history;
  /// Causes of failed evaluations, in order of occurrence.
  std::vector<std::string> failures;
};

/// Minimizes objective + w * sum(max(0, violation)^2) over the box
/// [lower, upper] by coordinate pattern search with projection onto the box.
/// The penalty weight starts at budget.initial_penalty and grows by
/// penalty_growth per round; rounds stop early once the incumbent is
/// feasible. Fully deterministic.
SearchResult minimize_penalized(const EvaluateFn& evaluate, const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper, const Eigen::VectorXd& start,
                                const SolverBudget& budget);

}  // namespace snmpc::ocp
