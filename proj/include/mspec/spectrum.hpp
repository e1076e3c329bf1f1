#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mspec/frequency.hpp"
#include "mspec/rng.hpp"

namespace mspec {

// Half-width law for the perturbation r(n), uniform on (-d_n, d_n).
struct PerturbationLaw {
  enum class Kind { kConstant, kPower };
  Kind kind = Kind::kConstant;
  double d = 0.5;      // scale; must lie in (0, 1/2]
  double alpha = 0.0;  // decay exponent, kPower only: d_n = d (1+|n|)^-alpha

  double half_width(std::int64_t n) const;
  void validate() const;
};

// Dyadic shift profile sigma(q) = 2^(-|q| + exponent_offset), exact in
// floating point. The default profile keeps sigma(0) = 1/4 inside every
// admissible half-width; the "paper" profile (exponent_offset = +1) has
// sigma(0) = 2 outside it and collides at q = 0 vs q = 1 (both map shifted
// frequency to 2), so it is usable for probability estimates but not for
// planting or fitting.
struct ShiftProfile {
  std::string name = "default";
  int exponent_offset = -2;

  double sigma(std::int64_t q) const;
  // Largest D such that q + sigma(q) is strictly increasing and collision
  // free over |q| <= D (checks shifted frequencies pairwise-distinct too).
  bool shifted_frequencies_injective(std::int64_t max_abs_q) const;

  static ShiftProfile defaults();
  static ShiftProfile paper();
};

// A planted arithmetic block: indices I = {s*l + q : 0 < |s| < k, |q| < k}
// carry offsets sigma(q) plus independent jitter. Witnesses are evaluated
// lazily: the block is never materialized, membership is decided per index.
struct BlockWitness {
  std::int64_t k = 0;
  std::int64_t l = 0;
  double tolerance = 0.0;  // condition tolerance, default 1/k^2
  double jitter = 0.0;     // plant jitter half-width, < tolerance
  ShiftProfile profile;

  std::int64_t reach() const { return k * (l + 1); }  // M(k): |index| < M + 1
  std::int64_t min_abs_index() const { return l - k + 1; }
  // True iff n = s*l + q with 0 < |s| < k and |q| < k; fills the parts.
  bool decompose(std::int64_t n, std::int64_t* s, std::int64_t* q) const;
};

struct ConditionReport {
  bool satisfied = false;
  std::int64_t pairs_checked = 0;
  double max_abs_deviation = 0.0;  // max |r(s l + q) - sigma(q)|
  std::int64_t fail_s = 0, fail_q = 0;
};

// Randomly perturbed integers: lambda(n) = n + r(n) with r(n) independent
// uniform on (-d_n, d_n), plus explicit planted overrides.
//
// Base offsets are counter-addressed by n, so any subset of the spectrum can
// be materialized lazily in any order with identical results.
class PerturbedSpectrum {
 public:
  PerturbedSpectrum(std::uint64_t seed, PerturbationLaw law);

  std::uint64_t seed() const { return rng_.seed(); }
  const PerturbationLaw& law() const { return law_; }
  const std::map<std::int64_t, double>& plants() const { return plants_; }
  const std::vector<BlockWitness>& witnesses() const { return witnesses_; }

  double r(std::int64_t n) const;
  Frequency lambda(std::int64_t n) const { return Frequency{n, r(n)}; }

  // |r(s l + q) - sigma(q)| < tol over 0 < |s| < k, |q| < k.
  ConditionReport check_condition(std::int64_t k, std::int64_t l,
                                  const ShiftProfile& profile,
                                  double tol) const;

  // First l in [l_min, l_max] whose block condition holds and whose index set
  // starts beyond exclude_reach (l - k + 1 > exclude_reach).
  std::optional<std::int64_t> scan_l(std::int64_t k, std::int64_t l_min,
                                     std::int64_t l_max,
                                     const ShiftProfile& profile, double tol,
                                     std::int64_t exclude_reach = 0) const;

  // Overrides the offsets on I(k, l) with sigma(q) + jitter. The override is
  // lazy: only the witness record is stored, and r(n) resolves membership per
  // index, so arbitrarily large blocks cost nothing. Refuses blocks that
  // overlap earlier witnesses (requires l - k + 1 > max prior reach) or whose
  // offsets could leave the admissible range (sigma(q) + jitter must stay
  // <= d at every planted index). Returns the recorded witness.
  const BlockWitness& plant_witness(std::int64_t k, std::int64_t l,
                                    const ShiftProfile& profile, double jitter,
                                    double tolerance);

  // Restores a serialized spectrum: plants and witnesses as recorded.
  void restore(std::map<std::int64_t, double> plants,
               std::vector<BlockWitness> witnesses);

  std::int64_t max_witness_reach() const;

 private:
  CounterRng rng_;
  PerturbationLaw law_;
  std::map<std::int64_t, double> plants_;
  std::vector<BlockWitness> witnesses_;
};

struct BlockProbabilityReport {
  std::int64_t k = 0;
  double tolerance = 0.0;
  double d = 0.0;
  std::string profile_name;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double p_hat = 0.0;
  double p_analytic = 0.0;  // product of per-pair interval overlaps
  double wilson_low = 0.0, wilson_high = 0.0;  // 95% interval
};

// Monte Carlo and closed-form probability that a fresh block of independent
// uniform(-d, d) offsets satisfies the condition |u - sigma(q)| < tol over
// all 2(k-1)(2k-1) pairs. Trials are counter-addressed: results do not
// depend on thread count.
BlockProbabilityReport estimate_block_probability(
    std::int64_t k, const ShiftProfile& profile, double tol, double d,
    std::uint64_t trials, std::uint64_t seed);

}  // namespace mspec
