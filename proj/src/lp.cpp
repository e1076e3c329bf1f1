#include "mspec/lp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mspec::lp {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kReducedTol = 1e-9;
constexpr double kFeasTol = 1e-7;
constexpr std::size_t kRefactorInterval = 64;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class PhaseOutcome { kConverged, kUnboundedColumn, kStalled };

// Revised two-phase simplex on the standard-form dual of the inequality
// problem: min cost.y s.t. E y = f, y >= 0, where E has one row per primal
// variable and one column per primal constraint. Column k < m is read
// straight out of problem.rows[k] (scaled by the row signs that make f
// nonnegative); columns m..m+n-1 are artificials. The basis inverse is kept
// explicitly (n x n) and refactorized from the original data at a fixed
// pivot interval, so elimination error cannot accumulate across a long run.
class RevisedSimplex {
 public:
  RevisedSimplex(const Problem& problem)
      : problem_(problem),
        n_(problem.num_vars),
        m_(problem.rows.size()),
        flip_(n_),
        f_(n_),
        basis_(n_),
        in_basis_(m_ + n_, false),
        binv_(Matrix::Identity(static_cast<Eigen::Index>(n_),
                               static_cast<Eigen::Index>(n_))),
        scratch_(n_),
        direction_(n_) {
    for (std::size_t i = 0; i < n_; ++i) {
      const double rhs = -problem_.objective[i];
      flip_[i] = rhs < 0.0 ? -1.0 : 1.0;
      f_exact_[static_cast<Eigen::Index>(i)] = flip_[i] * rhs;
      basis_[i] = m_ + i;
      in_basis_[m_ + i] = true;
    }
    // Charnes perturbation: the dual rhs is typically almost entirely zero
    // (only objective variables contribute), which makes nearly every pivot
    // degenerate and lets the walk stall on a huge optimal face. Nudging
    // every component positive makes each pivot strictly improving. The
    // primal answer is read from multipliers and reduced costs, which the
    // rhs never enters, so only dual variable values absorb the nudge.
    double fscale = 1.0;
    for (std::size_t i = 0; i < n_; ++i)
      fscale = std::max(fscale, f_exact_[static_cast<Eigen::Index>(i)]);
    f_ = f_exact_;
    for (std::size_t i = 0; i < n_; ++i)
      f_[static_cast<Eigen::Index>(i)] +=
          1e-10 * fscale * static_cast<double>(1 + (i * 37) % 97);
  }

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }

  // Column k of the dual equality system, written into `out`.
  void load_column(std::size_t k, Vector& out) const {
    if (k < m_) {
      const std::vector<double>& row = problem_.rows[k];
      for (std::size_t i = 0; i < n_; ++i)
        out[static_cast<Eigen::Index>(i)] = flip_[i] * row[i];
    } else {
      out.setZero();
      out[static_cast<Eigen::Index>(k - m_)] = 1.0;
    }
  }

  double cost(std::size_t k, bool phase_one) const {
    if (phase_one) return k >= m_ ? 1.0 : 0.0;
    return k < m_ ? problem_.rhs[k] : 0.0;
  }

  // Objective value of the current basic solution (perturbed rhs).
  double objective_value(bool phase_one) const {
    const Vector xb = binv_ * f_;
    double value = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      value += cost(basis_[i], phase_one) * xb[static_cast<Eigen::Index>(i)];
    return value;
  }

  // Same against the exact rhs; used for the phase-1 feasibility verdict so
  // the perturbation cannot masquerade as leftover artificial mass.
  double objective_exact(bool phase_one) const {
    const Vector xb = binv_ * f_exact_;
    double value = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      value += cost(basis_[i], phase_one) * xb[static_cast<Eigen::Index>(i)];
    return value;
  }

  // Simplex multipliers for the current basis.
  Vector multipliers(bool phase_one) const {
    Vector cb(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i)
      cb[static_cast<Eigen::Index>(i)] = cost(basis_[i], phase_one);
    return binv_.transpose() * cb;
  }

  bool artificial_blocked(std::size_t k) const {
    return k >= m_ && artificials_blocked_;
  }

  void set_artificials_blocked() { artificials_blocked_ = true; }

  // Columns whose computed direction was numerically null are kept out of
  // pricing until the next successful pivot changes the basis.
  bool banned(std::size_t k) const { return ban_stamp_[k] == ban_generation_; }

  void ban(std::size_t k) { ban_stamp_[k] = ban_generation_; }

  // Checks that the ray implied by an entering column with no blocking row
  // is a genuine Farkas witness of primal infeasibility: the ray
  // (y_entering = 1, y_basis = -direction clipped to >= 0) must satisfy the
  // dual equalities to working precision and strictly decrease the dual
  // objective. direction_ must already hold binv * a_entering.
  bool farkas_certified(std::size_t entering) {
    Vector u(static_cast<Eigen::Index>(n_));
    load_column(entering, u);
    double ray_cost = cost(entering, false);
    double uscale = u.cwiseAbs().maxCoeff();
    double cscale = std::abs(ray_cost);
    Vector col(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) {
      const double d = direction_[static_cast<Eigen::Index>(i)];
      if (d >= 0.0) continue;
      load_column(basis_[i], col);
      u -= d * col;
      const double ci = cost(basis_[i], false);
      ray_cost -= d * ci;
      uscale = std::max(uscale, std::abs(d) * col.cwiseAbs().maxCoeff());
      cscale = std::max(cscale, std::abs(d * ci));
    }
    const double residual = u.cwiseAbs().maxCoeff();
    return residual <= 1e-6 * (1.0 + uscale) &&
           ray_cost < -1e-7 * (1.0 + cscale);
  }

  PhaseOutcome run(bool phase_one, std::size_t max_iterations,
                   std::size_t& iterations) {
    const std::size_t stall_window = 2 * (n_ + 50);
    std::size_t stalled = 0;
    bool bland = false;
    double last_value = objective_value(phase_one);
    ++ban_generation_;
    while (true) {
      if (iterations >= max_iterations) return PhaseOutcome::kStalled;
      const Vector pi = multipliers(phase_one);
      // Pricing: reduced cost of every nonbasic enterable column.
      Vector pif(static_cast<Eigen::Index>(n_));
      for (std::size_t i = 0; i < n_; ++i)
        pif[static_cast<Eigen::Index>(i)] =
            pi[static_cast<Eigen::Index>(i)] * flip_[i];
      std::size_t entering = m_ + n_;
      double best_rc = -kReducedTol;
      for (std::size_t k = 0; k < m_ + n_; ++k) {
        if (in_basis_[k] || artificial_blocked(k) || banned(k)) continue;
        double rc;
        if (k < m_) {
          const std::vector<double>& row = problem_.rows[k];
          double dot = 0.0;
          for (std::size_t i = 0; i < n_; ++i)
            dot += pif[static_cast<Eigen::Index>(i)] * row[i];
          rc = cost(k, phase_one) - dot;
        } else {
          rc = cost(k, phase_one) - pi[static_cast<Eigen::Index>(k - m_)];
        }
        if (bland) {
          if (rc < -kReducedTol) {
            entering = k;
            break;
          }
        } else if (rc < best_rc) {
          best_rc = rc;
          entering = k;
        }
      }
      if (entering == m_ + n_) return PhaseOutcome::kConverged;

      load_column(entering, scratch_);
      direction_ = binv_ * scratch_;
      Vector xb = binv_ * f_;
      std::size_t leave = ratio_test(xb);
      if (leave == n_ && since_refactor_ > 0) {
        // No blocking row is a strong claim; never make it from a stale
        // inverse. Refactorize and look again before believing the ray.
        refactor();
        direction_ = binv_ * scratch_;
        xb = binv_ * f_;
        leave = ratio_test(xb);
      }
      if (leave == n_) {
        // The phase-1 objective is a sum of nonnegative variables, so a
        // genuine ray cannot exist there; in phase 2 a ray is believed only
        // with a verified Farkas certificate. Anything else is numerical
        // noise: retire the column and price again.
        if (!phase_one && farkas_certified(entering))
          return PhaseOutcome::kUnboundedColumn;
        ban(entering);
        continue;
      }

      pivot(leave, entering);
      ++ban_generation_;
      ++iterations;
      if (++since_refactor_ >= kRefactorInterval ||
          binv_.cwiseAbs().maxCoeff() > 1e9)
        refactor();

      const double value = objective_value(phase_one);
      if (value < last_value - 1e-13 * (1.0 + std::abs(last_value))) {
        last_value = value;
        stalled = 0;
      } else if (!bland && ++stalled >= stall_window) {
        bland = true;
      }
    }
  }

  // After phase 1: pivot leftover basic artificials onto any structural
  // column with a usable entry in their row; rows where none exists are
  // redundant equalities and keep their artificial pinned at zero.
  void drive_out_artificials() {
    for (std::size_t i = 0; i < n_; ++i) {
      if (basis_[i] < m_) continue;
      const auto row_i = static_cast<Eigen::Index>(i);
      std::size_t found = m_;
      for (std::size_t k = 0; k < m_ && found == m_; ++k) {
        if (in_basis_[k]) continue;
        load_column(k, scratch_);
        const double entry = binv_.row(row_i).dot(scratch_);
        if (std::abs(entry) > 1e-7) found = k;
      }
      if (found < m_) {
        load_column(found, scratch_);
        direction_ = binv_ * scratch_;
        pivot(i, found);
      }
    }
  }

  // Primal solution read off the optimal dual multipliers.
  std::vector<double> primal(const Vector& pi) const {
    std::vector<double> x(n_);
    for (std::size_t i = 0; i < n_; ++i)
      x[i] = flip_[i] * pi[static_cast<Eigen::Index>(i)];
    return x;
  }

 private:
  // Harris two-pass ratio test. Pass 1 finds the tightest ratio after
  // granting every basic value a small feasibility slack; pass 2 picks,
  // among the rows whose true ratio fits under that relaxed bound, the one
  // with the largest pivot magnitude. Combined with the rhs perturbation
  // this both avoids cycling and keeps the basis inverse well conditioned.
  std::size_t ratio_test(const Vector& xb) const {
    const double dmax = direction_.cwiseAbs().maxCoeff();
    const double tol = 1e-9 * std::max(1.0, dmax);
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double a = direction_[ii];
      if (a <= tol) continue;
      const double basic = std::max(xb[ii], 0.0);
      bound = std::min(bound, (basic + 1e-11 * (1.0 + basic)) / a);
    }
    if (!std::isfinite(bound)) return n_;
    std::size_t best = n_;
    double best_pivot = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double a = direction_[ii];
      if (a <= tol) continue;
      const double basic = std::max(xb[ii], 0.0);
      if (basic / a <= bound && a > best_pivot) {
        best_pivot = a;
        best = i;
      }
    }
    return best;
  }

  void pivot(std::size_t row, std::size_t entering) {
    const auto r = static_cast<Eigen::Index>(row);
    const double inv = 1.0 / direction_[r];
    binv_.row(r) *= inv;
    for (std::size_t i = 0; i < n_; ++i) {
      if (i == row) continue;
      const auto ii = static_cast<Eigen::Index>(i);
      const double factor = direction_[ii];
      if (factor != 0.0) binv_.row(ii) -= factor * binv_.row(r);
    }
    in_basis_[basis_[row]] = false;
    basis_[row] = entering;
    in_basis_[entering] = true;
  }

  // Rebuilds the basis inverse from the original column data. A basis that
  // has drifted numerically singular gets the pseudo-inverse instead, which
  // at least keeps the walk bounded until pivoting repairs it.
  void refactor() {
    since_refactor_ = 0;
    Matrix b(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    Vector col(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) {
      load_column(basis_[i], col);
      b.col(static_cast<Eigen::Index>(i)) = col;
    }
    Eigen::FullPivLU<Matrix> lu(b);
    if (lu.isInvertible()) {
      binv_ = lu.inverse();
      return;
    }
    binv_ = Eigen::CompleteOrthogonalDecomposition<Matrix>(b).pseudoInverse();
  }

  const Problem& problem_;
  std::size_t n_;
  std::size_t m_;
  std::vector<double> flip_;
  Vector f_;
  Vector f_exact_ = Vector(static_cast<Eigen::Index>(n_));
  std::vector<std::size_t> basis_;
  std::vector<bool> in_basis_;
  bool artificials_blocked_ = false;
  Matrix binv_;
  Vector scratch_;
  Vector direction_;
  std::size_t since_refactor_ = 0;
  std::vector<std::uint64_t> ban_stamp_ = std::vector<std::uint64_t>(m_ + n_, 0);
  std::uint64_t ban_generation_ = 0;
};

void validate(const Problem& problem) {
  if (problem.objective.size() != problem.num_vars)
    throw std::invalid_argument("lp: objective size mismatch");
  if (problem.rhs.size() != problem.rows.size())
    throw std::invalid_argument("lp: rhs size mismatch");
  for (const auto& row : problem.rows) {
    if (row.size() != problem.num_vars)
      throw std::invalid_argument("lp: row size mismatch");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  for (double v : problem.objective)
    if (!finite(v)) throw std::invalid_argument("lp: non-finite objective");
  for (double v : problem.rhs)
    if (!finite(v)) throw std::invalid_argument("lp: non-finite rhs");
  for (const auto& row : problem.rows)
    for (double v : row)
      if (!finite(v)) throw std::invalid_argument("lp: non-finite row entry");
}

}  // namespace

Solution solve_inequality_form(const Problem& problem,
                               std::size_t max_iterations) {
  validate(problem);
  const std::size_t n = problem.num_vars;
  const std::size_t m = problem.rows.size();
  if (max_iterations == 0) max_iterations = 50 * (n + m) + 10000;

  Solution out;
  out.x.assign(n, 0.0);
  if (n == 0) {
    out.status = Solution::Status::kOptimal;
    return out;
  }

  RevisedSimplex simplex(problem);

  // Phase 1: minimize the artificial sum. The objective is a sum of
  // nonnegative variables, so an unbounded direction can only be numerical
  // noise; both it and a genuine stall are reported as non-convergence
  // unless the artificial sum already vanished.
  std::size_t iterations = 0;
  const PhaseOutcome phase1 = simplex.run(true, max_iterations, iterations);
  out.iterations = iterations;
  double scale = 1.0;
  for (double v : problem.objective) scale = std::max(scale, std::abs(v));
  if (simplex.objective_exact(true) > kFeasTol * scale) {
    if (phase1 != PhaseOutcome::kConverged) {
      out.status = Solution::Status::kIterationLimit;
      return out;
    }
    // Dual infeasible: the primal admits arbitrarily good solutions (our
    // callers always produce feasible primals).
    out.status = Solution::Status::kUnbounded;
    return out;
  }

  simplex.drive_out_artificials();
  simplex.set_artificials_blocked();

  // Phase 2: minimize the dual objective rhs.y.
  const PhaseOutcome phase2 = simplex.run(false, max_iterations, iterations);
  out.iterations = iterations;
  if (phase2 == PhaseOutcome::kStalled) {
    out.status = Solution::Status::kIterationLimit;
    return out;
  }
  if (phase2 == PhaseOutcome::kUnboundedColumn) {
    // Dual unbounded below means the primal inequalities are inconsistent.
    out.status = Solution::Status::kInfeasible;
    return out;
  }

  // The primal solution is the vector of multipliers on the dual equalities.
  const Vector pi = simplex.multipliers(false);
  out.x = simplex.primal(pi);
  double objective = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    objective += problem.objective[i] * out.x[i];
  out.objective = objective;
  out.status = Solution::Status::kOptimal;
  return out;
}

}  // namespace mspec::lp
