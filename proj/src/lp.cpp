#include "cgx/lp.hpp"

#include <cmath>
#include <string>

#include "cgx/errors.hpp"

namespace cgx::lp {

Solution maximize(const Problem& problem, const Options& options) {
  const std::size_t m = problem.n_rows;
  const std::size_t n = problem.n_vars;
  const std::size_t total = n + m;
  if (problem.objective.size() != n || problem.upper.size() != n ||
      problem.rhs.size() != m || problem.matrix.size() != m * n) {
    throw ShapeError("LP dimensions are inconsistent");
  }
  for (double b : problem.rhs) {
    if (!(b >= 0.0)) throw ParameterError("LP right-hand side must be non-negative");
  }
  for (double u : problem.upper) {
    if (!(u >= 0.0)) throw ParameterError("LP upper bounds must be non-negative");
  }

  // Tableau over [structural | slack] columns; slacks form the initial basis.
  std::vector<double> tableau(m * total, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < n; ++j) tableau[r * total + j] = problem.matrix[r * n + j];
    tableau[r * total + n + r] = 1.0;
  }
  std::vector<double> value(problem.rhs);  // current basic values per row
  std::vector<std::size_t> basis(m);
  std::vector<long> row_of(total, -1);
  for (std::size_t r = 0; r < m; ++r) {
    basis[r] = n + r;
    row_of[n + r] = static_cast<long>(r);
  }
  std::vector<double> reduced(total, 0.0);
  for (std::size_t j = 0; j < n; ++j) reduced[j] = problem.objective[j];
  std::vector<bool> at_upper(total, false);
  auto upper_of = [&](std::size_t var) { return var < n ? problem.upper[var] : kInfinity; };

  const std::size_t limit =
      options.max_iterations > 0 ? options.max_iterations : 50 * (total + 10);
  const double tol = options.optimality_tolerance;
  const double ptol = options.pivot_tolerance;

  Solution sol;
  for (;;) {
    // Bland: lowest-index improving nonbasic variable.
    std::size_t enter = total;
    for (std::size_t j = 0; j < total; ++j) {
      if (row_of[j] >= 0) continue;
      if ((!at_upper[j] && reduced[j] > tol) || (at_upper[j] && reduced[j] < -tol)) {
        enter = j;
        break;
      }
    }
    if (enter == total) break;
    if (sol.iterations >= limit) {
      throw IterationLimitError("simplex did not converge within " + std::to_string(limit) +
                                " iterations");
    }
    ++sol.iterations;

    const double dir = at_upper[enter] ? -1.0 : 1.0;
    // Ratio test. Candidates are ordered by (step, variable index).
    double step = upper_of(enter);
    std::size_t leave_var = enter;
    std::size_t leave_row = m;
    bool leave_to_upper = false;
    for (std::size_t r = 0; r < m; ++r) {
      const double a = tableau[r * total + enter] * dir;
      if (std::fabs(a) <= ptol) continue;
      double ratio;
      bool to_upper;
      if (a > 0.0) {
        ratio = value[r] / a;
        to_upper = false;
      } else {
        const double ub = upper_of(basis[r]);
        if (ub == kInfinity) continue;
        ratio = (ub - value[r]) / -a;
        to_upper = true;
      }
      if (ratio < 0.0) ratio = 0.0;
      if (ratio < step || (ratio == step && basis[r] < leave_var)) {
        step = ratio;
        leave_var = basis[r];
        leave_row = r;
        leave_to_upper = to_upper;
      }
    }
    if (step == kInfinity) {
      sol.status = Status::kUnbounded;
      return sol;
    }

    for (std::size_t r = 0; r < m; ++r) value[r] -= step * dir * tableau[r * total + enter];

    if (leave_row == m) {
      // Bound flip: the entering variable reaches its own opposite bound.
      at_upper[enter] = !at_upper[enter];
      continue;
    }

    const double entering_value = (at_upper[enter] ? upper_of(enter) : 0.0) + dir * step;
    const double pivot = tableau[leave_row * total + enter];
    double* prow = &tableau[leave_row * total];
    for (std::size_t j = 0; j < total; ++j) prow[j] /= pivot;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == leave_row) continue;
      const double factor = tableau[r * total + enter];
      if (factor == 0.0) continue;
      double* row = &tableau[r * total];
      for (std::size_t j = 0; j < total; ++j) row[j] -= factor * prow[j];
      row[enter] = 0.0;
    }
    const double rfactor = reduced[enter];
    for (std::size_t j = 0; j < total; ++j) reduced[j] -= rfactor * prow[j];
    reduced[enter] = 0.0;

    row_of[leave_var] = -1;
    at_upper[leave_var] = leave_to_upper;
    basis[leave_row] = enter;
    row_of[enter] = static_cast<long>(leave_row);
    at_upper[enter] = false;
    value[leave_row] = entering_value;
  }

  sol.x.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (row_of[j] >= 0) {
      sol.x[j] = value[static_cast<std::size_t>(row_of[j])];
    } else if (at_upper[j]) {
      sol.x[j] = problem.upper[j];
    }
  }
  sol.duals.assign(m, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const double y = -reduced[n + r];
    sol.duals[r] = y > 0.0 ? y : 0.0;
  }
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += problem.objective[j] * sol.x[j];
  return sol;
}

}  // namespace cgx::lp
