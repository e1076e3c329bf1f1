#pragma once

#include <cstddef>
#include <string>

#include "mspec/trigpoly.hpp"

namespace mspec::correction {

// Construction strategy for the correction polynomial.
enum class Strategy { kAnalytic, kMinimax };

const char* strategy_name(Strategy strategy);
Strategy strategy_from_name(const std::string& name);  // throws on unknown

// Grid-measured evidence for the three correction properties: no constant
// term, coefficients below delta, and |P - 1| <= delta off a set of measure
// below eps. The majorant supremum is recorded (together with
// c_achieved = majorant_sup * eps) but carries no pass threshold: the
// constant is an output of the construction, not an input.
struct Certificate {
  bool dc_absent = false;
  double coeff_inf = 0.0;
  double bad_measure = 0.0;
  // One-sided error bar: grid_step times the number of sign changes of
  // |P(x)-1| - delta between adjacent grid points.
  double bad_measure_uncertainty = 0.0;
  double majorant_sup = 0.0;
  double c_achieved = 0.0;
  double grid_step = 0.0;
  std::size_t grid_count = 0;
  // Points on which the (more expensive) majorant was evaluated; equals
  // grid_count for small polynomials and a capped subsample for huge ones.
  std::size_t majorant_grid_count = 0;
  bool pass = false;  // dc_absent && coeff_inf < delta && bad_measure < eps
};

struct CorrectionPoly {
  TrigPoly poly;  // all-integer spectrum, no frequency-zero term
  double target_eps = 0.0;
  double target_delta = 0.0;
  Certificate certificate;
};

struct BuildParams {
  double eps = 0.5;
  double delta = 0.2;
  Strategy strategy = Strategy::kMinimax;
  std::size_t degree_budget = 512;
  // Fraction of delta (and eps) held back between the targets the builder
  // aims for and the certified thresholds.
  double margin = 0.05;
  // Exceptional-set / window-exchange rounds for the minimax strategy.
  int max_rounds = 10;
  // Oversampling factor handed to the final verification.
  std::size_t oversample = 8;
  // Hard cap on the analytic construction's kernel degree; requests beyond
  // it fail explicitly instead of building multi-million-term polynomials.
  std::size_t analytic_degree_cap = 20000;
};

struct BuildResult {
  bool success = false;
  // On failure this still carries the best candidate found (possibly the
  // zero polynomial) together with its honest certificate.
  CorrectionPoly correction;
  std::string diagnostics;
  int rounds = 0;
  std::size_t lp_iterations = 0;
};

// Independent re-measurement of the certificate on >= oversample*(2 deg + 1)
// equispaced points of [-pi, pi]; trusts nothing recorded by the builders.
// Throws std::invalid_argument for non-integer spectra or bad targets.
Certificate verify_correction(const TrigPoly& poly, double eps, double delta,
                              std::size_t oversample = 8);

// Build a correction polynomial for the requested targets. Both strategies
// are deterministic: identical parameters produce bit-identical polynomials.
BuildResult build_correction(const BuildParams& params);

}  // namespace mspec::correction
