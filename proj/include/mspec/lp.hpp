#pragma once

#include <cstddef>
#include <vector>

namespace mspec::lp {

// Linear program in inequality form over free variables:
//   minimize c.x  subject to  row_i . x <= rhs_i.
struct Problem {
  std::size_t num_vars = 0;
  std::vector<double> objective;        // size num_vars
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;              // one per row
};

struct Solution {
  enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };
  Status status = Status::kIterationLimit;
  std::vector<double> x;
  double objective = 0.0;
  std::size_t iterations = 0;
};

// Revised two-phase simplex. Internally solves the standard-form dual
// (min rhs.y, rows^T y = -c, y >= 0); the equality multipliers at optimality
// are exactly the primal solution, and dual unboundedness/infeasibility map
// back to primal infeasibility/unboundedness. The basis inverse is held
// explicitly and refactorized from the original data at a fixed pivot
// interval. Deterministic pivoting: Dantzig pricing with lowest-index ties
// and a lexicographic ratio test, switching to Bland's rule after a stall,
// so identical inputs give bit-identical solutions.
Solution solve_inequality_form(const Problem& problem,
                               std::size_t max_iterations = 0);

}  // namespace mspec::lp
