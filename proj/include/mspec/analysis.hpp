#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "mspec/frequency.hpp"
#include "mspec/gridfn.hpp"
#include "mspec/trigpoly.hpp"

namespace mspec::analysis {

struct ExceedanceReport {
  double measure = 0.0;      // grid step * count of exceeding samples
  double uncertainty = 0.0;  // grid step * sign changes of |g-h| - threshold
  std::size_t exceed_count = 0;
  std::size_t sample_count = 0;
};

// Grid measure of { x : |g(x) - h(x)| > threshold } on the common grid.
// Throws std::invalid_argument when the grids differ.
ExceedanceReport measure_exceedance(const GridFunction& g,
                                    const GridFunction& h, double threshold);

struct ProductBoundReport {
  double min_slack = 0.0;  // min over the grid of RHS - LHS; >= 0 expected
  double modulator_majorant_sup = 0.0;
  std::size_t grid_count = 0;
};

// Product-majorant transfer bound H*(x) <= |P(x)| sup Q* + 2 P*(x) ||Q^||_inf
// checked pointwise on x_j = x0 + j*step. sup Q* is taken over a fine
// periodic scan grid augmented with the points l*x_j mod 2pi, which makes the
// bound provable at every checked x rather than up to scan error.
ProductBoundReport check_special_product_bound(const BlockProduct& product,
                                               double x0, double step,
                                               std::size_t count);

// (1 - e^{-2 pi i lambda})^k computed from the offset alone (the integer part
// contributes a factor of exactly 1), as a k-fold product so that
// delta_multiplier(f, k) == delta_multiplier(f, 1)^k bitwise.
std::complex<double> delta_multiplier(const Frequency& freq, int k);

struct ObstructionReport {
  double beta = 0.0;   // coefficient growth |c_n| <= n^beta
  double alpha = 0.0;  // offset decay: offsets c * n^-alpha
  double c = 1.0;
  int k = 0;           // smoothing order examined
  bool converges = false;           // sum n^beta (2 sin(pi c n^-alpha))^k < oo
  int k_min = 0;                    // least k with alpha * k > beta + 1
  std::int64_t tail_start = 0;      // n0 of the closed-form tail bound
  double tail_bound = 0.0;          // valid only when converges
};

// Summability criterion for the k-fold difference operator applied to a
// series with |c_n| <= n^beta on frequencies n + c n^-alpha: the multiplied
// series is dominated by sum n^{beta - alpha k}, absolutely convergent iff
// alpha k > beta + 1, in which case the tail past n0 is at most
// (2 pi c)^k n0^{beta - alpha k + 1} / (alpha k - beta - 1).
ObstructionReport smoothing_obstruction(double beta, double alpha, int k,
                                        double c = 1.0,
                                        std::int64_t tail_start = 10000);

struct CutoffDeviation {
  double cutoff = 0.0;
  int blocks_below = 0;       // completed blocks entirely below the cutoff
  bool splits_block = false;  // cutoff lands inside block blocks_below + 1
  // sup over the evaluation points of |S_cutoff - S_reference| where the
  // reference merges blocks 1..blocks_below (+ the split block when inside
  // one). Computed from the excluded tail terms directly, so a cutoff strictly
  // between blocks gives exactly 0.
  double sup_dev = 0.0;
};

// Symmetric-partial-sum deviations for each cutoff, evaluated at xs.
// stage_blocks are the per-stage coefficient blocks in stage order; their
// frequency supports must be disjoint and ordered (later blocks farther out),
// which holds for witness-planted runs by construction.
std::vector<CutoffDeviation> symmetric_convergence(
    const std::vector<TrigPoly>& stage_blocks,
    const std::vector<double>& cutoffs, const std::vector<double>& xs);

struct TraceRow {
  int stage = 0;
  double bad_measure_rn = 0.0;
  double a_majorant_sup = 0.0;
  double sym_sup_dev = 0.0;
};

struct ConvergenceTrace {
  std::vector<TraceRow> rows;
};

}  // namespace mspec::analysis
