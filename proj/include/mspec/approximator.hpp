#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mspec/gridfn.hpp"
#include "mspec/spectrum.hpp"
#include "mspec/trigpoly.hpp"

namespace mspec::approximator {

struct FitReport {
  bool success = false;          // bad_measure < mu reached within max_degree
  std::int64_t degree_used = 0;  // fitted slots are |q| <= degree_used
  double bad_measure = 0.0;      // grid measure of {x : |F(x)-target(x)| > eta}
  double good_sup = 0.0;         // sup |F - target| off the bad set
  double residual_l2 = 0.0;      // sqrt(step * sum |F - target|^2)
  double coeff_norm1 = 0.0;      // ||F^||_1 of the returned polynomial
  double regularization = 0.0;   // ridge weight, 1e-10 * grid count
  double eta = 0.0;
  double mu = 0.0;
  // Accepted iterates (degree, bad_measure) of the escalation loop; the
  // second component is non-increasing by construction.
  std::vector<std::pair<std::int64_t, double>> trace;
};

// Fit the target in measure by the shifted-integer system { q + sigma(q) }:
// regularized least squares on the target's own grid, degree escalating
// geometrically up to max_degree, with up to five robust reweighting rounds
// per degree (points already within eta/2 are down-weighted to let the fit
// spend effort where it still fails; hopeless outliers are down-weighted
// too). Stops at the first degree whose best iterate gets bad_measure < mu;
// otherwise returns the best candidate found, flagged unsuccessful.
//
// Degrees are additionally capped at the largest aliasing-safe value for the
// target's step (step <= pi / (4 (D + 1))). Frequencies are stored exactly as
// (q, sigma(q)) pairs; profiles whose shifted frequencies collide (the
// literal paper profile at q = 0 vs 1) are thinned to the lowest q per
// frequency. Deterministic for fixed inputs, regardless of thread count.
std::pair<TrigPoly, FitReport> fit_in_measure(const GridFunction& target,
                                              double eta, double mu,
                                              const ShiftProfile& profile,
                                              std::int64_t max_degree);

// target(x_j) - S(x_j) on the target's grid.
GridFunction residual(const GridFunction& target, const TrigPoly& S);

}  // namespace mspec::approximator
