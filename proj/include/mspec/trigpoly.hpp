#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "mspec/frequency.hpp"

namespace mspec {

using Complex = std::complex<double>;

struct Term {
  Frequency freq;
  Complex coeff;
};

struct CoeffNorms {
  double norm1 = 0.0;    // sum of |coeff| in ascending frequency order
  double norm_inf = 0.0; // max |coeff|
  double degree = 0.0;   // max |frequency|, 0 for the empty polynomial
};

// Finite sum  P(x) = sum_k c_k e^{i lambda_k x}  with real frequencies kept
// as exact (integer, fraction) pairs.
//
// Invariants: terms are sorted by strictly ascending frequency (exact
// comparison on the pair), frequencies are canonical, and no stored
// coefficient is exactly zero.
class TrigPoly {
 public:
  TrigPoly() = default;

  // Sorts, merges terms with exactly equal frequencies (coefficients add),
  // and drops exact zeros.
  static TrigPoly from_terms(std::vector<Term> terms);

  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  CoeffNorms coeff_norms() const;
  double degree() const;

  // Pointwise value. Phases are formed as n*x and offset*x separately in
  // extended precision, so accuracy does not collapse for large frequencies
  // the way evaluating (n + offset)*x in double would.
  Complex evaluate(double x) const;

  // Values at x_j = x0 + j*step for j in [0, count). Uses per-term phase
  // rotators refreshed from exact phases every few steps; relative accuracy
  // stays within a small multiple of term count times machine epsilon.
  std::vector<Complex> evaluate_grid(double x0, double step,
                                     std::size_t count) const;

  // Sum of the terms whose frequency lies in [a, b] (inclusive), at x.
  Complex window_sum(double a, double b, double x) const;

  // Partial-sum majorant P*(x) = max over frequency windows [a, b] of
  // |window sum at x|, equal to the diameter of the prefix-sum point set
  // {Z_0 = 0, Z_1, ..., Z_t} in the complex plane.
  double majorant_bruteforce(double x) const;  // O(t^2) oracle
  double majorant(double x) const;             // O(t log t) via convex hull

  // Majorant at each grid point x_j = x0 + j*step. Prefix sums per point are
  // built with the same rotator scheme as evaluate_grid.
  std::vector<double> majorant_grid(double x0, double step,
                                    std::size_t count) const;

  // P(l x): frequencies scale by the integer l >= 1, coefficients unchanged.
  TrigPoly contract(std::int64_t l) const;

  // Convolution product; exactly colliding frequencies merge.
  static TrigPoly multiply(const TrigPoly& a, const TrigPoly& b);

  static TrigPoly add(const TrigPoly& a, const TrigPoly& b);
  TrigPoly scaled(Complex factor) const;

  // Terms with |frequency| <= cutoff, in the same storage order; evaluating
  // this is the symmetric partial sum at the cutoff.
  TrigPoly symmetric_cutoff(double cutoff) const;

 private:
  std::vector<Term> terms_;
};

// Reduced phase of e^{i freq x}: (freq.n * x + freq.offset * x) mod 2pi,
// computed in long double so the error stays near 1 ulp of the reduced value
// even when |n * x| is around 1e10.
double term_phase(const Frequency& freq, double x);

// Product H(x) = Q(l x) * P(x) for integer-spectrum Q and l > 2 deg P.
//
// The spectrum of H splits into disjoint blocks j*l + spec(P), ordered first
// by j then by the frequency within the block, and the coefficient at
// (j*l + mu) is exactly the single product Q^(j) * P^(mu): no collisions, no
// additions. The constructor verifies this structure term by term (bitwise,
// including the coefficient values) and records the (j, mu) factorization.
class BlockProduct {
 public:
  BlockProduct(TrigPoly modulator, TrigPoly base, std::int64_t scale);

  const TrigPoly& modulator() const { return modulator_; }  // Q
  const TrigPoly& base() const { return base_; }            // P
  std::int64_t scale() const { return scale_; }             // l
  const TrigPoly& product() const { return product_; }      // H

  // Index of the (modulator, base) factor pair for each product term.
  const std::vector<std::pair<std::size_t, std::size_t>>& factors() const {
    return factor_index_;
  }

  // Both sides of the coefficient-norm identity ||H^||_1 = ||Q^||_1 ||P^||_1
  // computed from the same per-pair products |Q^(j)| * |P^(mu)|, one side
  // iterating product terms in storage order, the other iterating factor
  // pairs in lexicographic order. Equal bitwise when the block structure
  // holds, which the constructor has already verified.
  struct NormIdentity {
    double from_product = 0.0;
    double from_factors = 0.0;
  };
  NormIdentity norm1_identity() const;

  // Majorant transfer bound at x:
  //   H*(x) <= |P(x)| * sup_y Q*(y) + 2 P*(x) * ||Q^||_inf.
  // Every window of H covers whole blocks plus at most two partial blocks;
  // whole blocks contribute P(x) times a window of Q at l x, partial blocks
  // at most ||Q^||_inf P*(x) each.
  struct TransferBound {
    double lhs = 0.0;        // H*(x)
    double rhs = 0.0;        // bound with sup Q* over the supplied candidates
    double slack = 0.0;      // rhs - lhs
  };
  TransferBound transfer_bound(double x, double modulator_majorant_sup) const;

  // sup of Q* over a fixed scan grid on [-pi, pi) augmented with the mapped
  // points l*x mod 2pi for each supplied x: including the mapped points makes
  // the bound provable pointwise at every x in xs, not just up to grid error.
  double modulator_majorant_sup(const std::vector<double>& xs,
                                std::size_t scan_points = 4096) const;

 private:
  TrigPoly modulator_, base_, product_;
  std::int64_t scale_ = 1;
  std::vector<std::pair<std::size_t, std::size_t>> factor_index_;
};

}  // namespace mspec
