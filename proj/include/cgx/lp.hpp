#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace cgx::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// maximize  objective . x
// subject   A x <= rhs   (rhs >= 0, so the all-slack basis is feasible)
//           0 <= x <= upper   (upper may be kInfinity)
struct Problem {
  std::size_t n_vars = 0;
  std::size_t n_rows = 0;
  std::vector<double> objective;
  std::vector<double> matrix;  // row-major, n_rows x n_vars
  std::vector<double> rhs;
  std::vector<double> upper;
};

enum class Status { kOptimal, kUnbounded };

struct Solution {
  Status status = Status::kOptimal;
  std::vector<double> x;
  // Shadow price of each row; non-negative at optimality.
  std::vector<double> duals;
  double objective = 0.0;
  std::size_t iterations = 0;
};

struct Options {
  double optimality_tolerance = 1e-9;
  double pivot_tolerance = 1e-11;
  // 0 picks a limit from the problem size.
  std::size_t max_iterations = 0;
};

// Dense bounded-variable primal simplex with Bland's rule for both the
// entering and the leaving variable, so the pivot sequence (and therefore the
// returned vertex and duals) is a deterministic function of the input.
// Throws IterationLimitError if the limit is reached.
Solution maximize(const Problem& problem, const Options& options = {});

}  // namespace cgx::lp
