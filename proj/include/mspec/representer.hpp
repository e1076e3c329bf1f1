#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mspec/analysis.hpp"
#include "mspec/approximator.hpp"
#include "mspec/correction.hpp"
#include "mspec/gridfn.hpp"
#include "mspec/spectrum.hpp"
#include "mspec/trigpoly.hpp"

namespace mspec::representer {

// Per-stage parameter schedule. The "paper" schedule uses the literal
// exponents (eta_N = 1/N^4, mu_N = 1/N^2, eps_N = 1/N^3,
// delta_N = 1/(N^4 ||F^||_1)); it is only affordable for trivial targets.
// The "desk" schedule keeps the same dependency structure with configurable
// scales and geometric decay so four stages finish in minutes.
struct Schedule {
  std::string name = "desk";

  double eta0 = 0.35;   // fit threshold scale:  eta_N = eta0 / N^2
  double mu0 = 1.0;     // fit mass budget:      mu_N  = mu0 / N
  double eps0 = 0.25;   // correction bad mass:  eps_N = eps0 * eps_shrink^(N-1)
  double eps_shrink = 0.78;
  double delta0 = 0.30;  // coefficient cap:     delta_N =
  double delta_shrink = 0.74;  //    delta0 * delta_shrink^(N-1) / max(1, ||F^||_1)

  std::int64_t fit_degree_max = 48;        // per-stage fit degree cap
  std::size_t correction_budget_cap = 600;  // correction half-degree cap
  int correction_rounds = 6;               // exchange rounds per degree
  correction::Strategy correction_strategy = correction::Strategy::kMinimax;
  double jitter_scale = 0.5;               // plant jitter = jitter_scale / k^2
  std::size_t core_grid_cells = 2048;      // shared diagnostic grid on [-pi, pi]
  bool witness_scan = false;               // scan for natural blocks (k = 2 demos)
  std::int64_t witness_scan_range = 4096;  // l values tried per scan

  double eta(int stage) const;
  double mu(int stage) const;
  double eps(int stage) const;
  double delta(int stage, double coeff_norm1) const;

  static Schedule desk();
  static Schedule paper();
};

// k_N must exceed every recorded lower bound; the first two are known before
// the correction is built, the last two only after.
struct KConstraints {
  std::int64_t above_prev_k = 1;     // k > k_{N-1}
  std::int64_t above_deg_f = 0;      // k > 3 deg F_N
  std::int64_t above_norm_ratio = 0;  // k > ||Q^||_1 / delta_N
  std::int64_t above_deg_q = 0;      // k > deg Q_N

  std::int64_t resolve() const;  // smallest admissible k (always >= 2)
};

struct StageParameters {
  double delta_n = 0.0;
  double eps_n = 0.0;
  KConstraints k_constraints;  // Q-dependent entries still zero
};

// delta_N, eps_N and the static k_N constraints for stage N against target
// piece F. The Q-dependent constraints are filled in once Q_N exists.
StageParameters choose_parameters(const TrigPoly& f, int stage,
                                  std::int64_t prev_k,
                                  const Schedule& schedule);

struct StageDiagnostics {
  approximator::FitReport fit;
  double h_minus_f_bad_measure = 0.0;  // m{|H-F| > delta_N ||F^||_1}, stage grid
  double h_minus_f_bad_target = 0.0;   // N * eps_N
  double a_minus_h_sup = 0.0;          // sup |A - H| on the stage grid
  double a_minus_h_target = 0.0;       // ||H^||_1 * jitter * N pi
  double a_coeff_norm1 = 0.0;          // ||A^||_1 (= ||Q^||_1 ||F^||_1 exactly)
  double a_coeff_norm1_target = 0.0;   // k_N ||F^||_1 delta_N
  double residual_threshold = 0.0;     // theta_N for the core-grid exceedance
  double bad_measure_rn = 0.0;         // fresh exceedance mass, core grid
  double a_majorant_sup = 0.0;         // symmetric-tail majorant off bad cells
};

struct StageRecord {
  int stage = 0;
  bool no_op = false;  // residual already below threshold: A_N = 0
  TrigPoly f;          // fitted piece F_N
  double delta_n = 0.0;
  double eps_n = 0.0;
  correction::CorrectionPoly q;  // correction Q_N = 1 - P_N with certificate
  std::int64_t k = 0;
  BlockWitness witness;
  TrigPoly h;  // block product H_N = Q_N(l x) F_N(x) on integer frequencies
  TrigPoly a;  // H_N transplanted onto the perturbed spectrum
  StageDiagnostics diagnostics;
};

struct StageFailure {
  std::string phase;  // "fit" | "correction" | "witness" | "product"
  std::string message;
};

// Drives the stagewise construction: fit the residual, correct, plant a
// witness block, modulate, transplant onto the spectrum, account.
//
// All state mutations happen only after every fallible step of a stage has
// succeeded, so a failed stage leaves the state exactly as it was.
class RepresentationState {
 public:
  using TargetFn = std::function<std::complex<double>(double)>;

  RepresentationState(PerturbedSpectrum spectrum, ShiftProfile profile,
                      TargetFn target, std::string target_name,
                      Schedule schedule);

  // Runs stage N = stages().size() + 1. Returns the failure on abort.
  std::optional<StageFailure> run_stage();

  const std::vector<StageRecord>& stages() const { return stages_; }
  const PerturbedSpectrum& spectrum() const { return spectrum_; }
  const ShiftProfile& profile() const { return profile_; }
  const Schedule& schedule() const { return schedule_; }
  const std::string& target_name() const { return target_name_; }

  // Partial sum S_N for 0 <= N <= stages(); S_0 is empty.
  const TrigPoly& partial_sum(std::size_t n) const;

  // Evaluates the target on a grid (used for residual displays and exports).
  GridFunction sample_target(double half_length, double step) const;

  // Diagnostic traces, one row per completed stage.
  analysis::ConvergenceTrace trace() const;

  // Symmetric-cutoff deviation of the staged sum: cutoffs between block
  // reaches must give exact partial sums (deviation identically zero), and
  // cutoffs inside stage N's block deviate by at most that stage's recorded
  // majorant. Evaluated at the unmasked core-grid points.
  std::vector<analysis::CutoffDeviation> cutoff_deviations(
      const std::vector<double>& cutoffs) const;

  // Spectrum indices n with nonzero coefficient, each with its coefficient
  // and owning stage, ordered by n.
  struct CoefficientRow {
    std::int64_t n = 0;
    double offset = 0.0;
    std::complex<double> value;
    int stage = 0;
  };
  std::vector<CoefficientRow> export_coefficients() const;

  // Fixed core diagnostic grid (cell centers on [-pi, pi]).
  const std::vector<double>& core_points() const { return core_points_; }
  const std::vector<bool>& core_bad_mask() const { return core_bad_; }

 private:
  PerturbedSpectrum spectrum_;
  ShiftProfile profile_;
  TargetFn target_;
  std::string target_name_;
  Schedule schedule_;

  double stage_step_ = 0.0;  // power-of-two fraction of pi
  std::vector<double> core_points_;
  std::vector<std::complex<double>> core_target_;
  std::vector<bool> core_bad_;

  std::vector<StageRecord> stages_;
  std::vector<TrigPoly> partial_sums_;  // partial_sums_[n] = S_n, S_0 empty
};

// Linear interpolation over a sampled grid; throws when asked outside the
// sampled interval.
RepresentationState::TargetFn interpolated_target(GridFunction samples);

}  // namespace mspec::representer
