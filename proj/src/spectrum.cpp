#include "mspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mspec/parallel.hpp"

namespace mspec {

double PerturbationLaw::half_width(std::int64_t n) const {
  if (kind == Kind::kConstant) return d;
  return d * std::pow(1.0 + static_cast<double>(n < 0 ? -n : n), -alpha);
}

void PerturbationLaw::validate() const {
  if (!(d > 0.0) || !(d <= 0.5)) {
    throw std::invalid_argument("perturbation scale d must lie in (0, 1/2]");
  }
  if (kind == Kind::kPower && !(alpha >= 0.0)) {
    throw std::invalid_argument("power law needs alpha >= 0");
  }
}

double ShiftProfile::sigma(std::int64_t q) const {
  const std::int64_t a = q < 0 ? -q : q;
  if (a > 2000) throw std::invalid_argument("shift profile |q| out of range");
  const double s = std::ldexp(1.0, static_cast<int>(-a + exponent_offset));
  if (!(s > 0.0)) throw std::invalid_argument("shift profile underflows at this q");
  return s;
}

bool ShiftProfile::shifted_frequencies_injective(std::int64_t max_abs_q) const {
  // q + sigma(q) must be strictly increasing in q; since sigma > 0 decays
  // away from 0, the only candidates for a collision are adjacent q.
  double prev = static_cast<double>(-max_abs_q) + sigma(-max_abs_q);
  for (std::int64_t q = -max_abs_q + 1; q <= max_abs_q; ++q) {
    const double cur = static_cast<double>(q) + sigma(q);
    if (!(cur > prev)) return false;
    prev = cur;
  }
  return true;
}

ShiftProfile ShiftProfile::defaults() { return ShiftProfile{"default", -2}; }
ShiftProfile ShiftProfile::paper() { return ShiftProfile{"paper", 1}; }

bool BlockWitness::decompose(std::int64_t n, std::int64_t* s,
                             std::int64_t* q) const {
  if (k < 2 || l <= 0) return false;
  // |q| < k <= l/2 + 1, so the quotient is the nearest multiple of l. int64
  // values this size convert to double exactly enough: the correction loop
  // repairs any off-by-one from the rounded division.
  std::int64_t si =
      static_cast<std::int64_t>(std::llround(static_cast<double>(n) /
                                             static_cast<double>(l)));
  std::int64_t qi = n - si * l;
  if (qi > l / 2) {
    ++si;
    qi -= l;
  } else if (qi < -(l / 2)) {
    --si;
    qi += l;
  }
  if (si == 0 || si <= -k || si >= k) return false;
  if (qi <= -k || qi >= k) return false;
  *s = si;
  *q = qi;
  return true;
}

PerturbedSpectrum::PerturbedSpectrum(std::uint64_t seed, PerturbationLaw law)
    : rng_(seed), law_(law) {
  law_.validate();
}

double PerturbedSpectrum::r(std::int64_t n) const {
  const auto it = plants_.find(n);
  if (it != plants_.end()) return it->second;
  for (const BlockWitness& w : witnesses_) {
    std::int64_t s = 0, q = 0;
    if (w.decompose(n, &s, &q)) {
      double u = 0.0;
      if (w.jitter > 0.0) {
        u = rng_.symmetric(CounterRng::kPlantJitter,
                           static_cast<std::uint64_t>(n), w.jitter);
      }
      return w.profile.sigma(q) + u;
    }
  }
  return rng_.symmetric(CounterRng::kPerturbation,
                        static_cast<std::uint64_t>(n), law_.half_width(n));
}

ConditionReport PerturbedSpectrum::check_condition(std::int64_t k,
                                                   std::int64_t l,
                                                   const ShiftProfile& profile,
                                                   double tol) const {
  if (k < 2) throw std::invalid_argument("block condition needs k >= 2");
  if (l < 2 * k - 1) {
    throw std::invalid_argument("block condition needs l >= 2k - 1");
  }
  ConditionReport report;
  report.satisfied = true;
  for (std::int64_t s = -(k - 1); s <= k - 1; ++s) {
    if (s == 0) continue;
    for (std::int64_t q = -(k - 1); q <= k - 1; ++q) {
      ++report.pairs_checked;
      const double dev = std::fabs(r(s * l + q) - profile.sigma(q));
      if (dev > report.max_abs_deviation) report.max_abs_deviation = dev;
      if (!(dev < tol)) {
        if (report.satisfied) {
          report.fail_s = s;
          report.fail_q = q;
        }
        report.satisfied = false;
      }
    }
  }
  return report;
}

std::optional<std::int64_t> PerturbedSpectrum::scan_l(
    std::int64_t k, std::int64_t l_min, std::int64_t l_max,
    const ShiftProfile& profile, double tol, std::int64_t exclude_reach) const {
  if (k < 2) throw std::invalid_argument("scan needs k >= 2");
  for (std::int64_t l = std::max(l_min, 2 * k - 1); l <= l_max; ++l) {
    if (l - k + 1 <= exclude_reach) continue;
    // Early exit per l: stop at the first failing pair.
    bool ok = true;
    for (std::int64_t s = -(k - 1); ok && s <= k - 1; ++s) {
      if (s == 0) continue;
      for (std::int64_t q = -(k - 1); q <= k - 1; ++q) {
        if (!(std::fabs(r(s * l + q) - profile.sigma(q)) < tol)) {
          ok = false;
          break;
        }
      }
    }
    if (ok) return l;
  }
  return std::nullopt;
}

const BlockWitness& PerturbedSpectrum::plant_witness(std::int64_t k,
                                                     std::int64_t l,
                                                     const ShiftProfile& profile,
                                                     double jitter,
                                                     double tolerance) {
  if (k < 2) throw std::invalid_argument("witness needs k >= 2");
  if (l < 2 * k - 1) throw std::invalid_argument("witness needs l >= 2k - 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("witness needs tolerance > 0");
  if (!(jitter >= 0.0) || !(jitter < tolerance)) {
    throw std::invalid_argument("witness jitter must lie in [0, tolerance)");
  }
  const std::int64_t prior_reach = max_witness_reach();
  if (l - k + 1 <= prior_reach) {
    throw std::invalid_argument(
        "witness block at l = " + std::to_string(l) +
        " overlaps prior planted range (need l - k + 1 > " +
        std::to_string(prior_reach) + ")");
  }
  for (std::int64_t q = -(k - 1); q <= k - 1; ++q) {
    // Planted offsets must stay strictly inside the admissible half-width at
    // every target index. The half-width law is non-increasing in |n|, so the
    // tightest index for this q is the one furthest from zero.
    const double s_hi = profile.sigma(q) + jitter;
    const std::int64_t worst = (k - 1) * l + (q >= 0 ? q : -q);
    if (!(s_hi <= law_.half_width(worst))) {
      throw std::invalid_argument(
          "sigma(" + std::to_string(q) + ") + jitter exceeds half-width at n = " +
          std::to_string(worst));
    }
  }
  const BlockWitness candidate{k, l, tolerance, jitter, profile};
  for (const auto& [n, off] : plants_) {
    std::int64_t s = 0, q = 0;
    if (candidate.decompose(n, &s, &q)) {
      throw std::logic_error("witness block covers an explicitly planted index");
    }
    (void)off;
  }
  witnesses_.push_back(candidate);
  return witnesses_.back();
}

void PerturbedSpectrum::restore(std::map<std::int64_t, double> plants,
                                std::vector<BlockWitness> witnesses) {
  plants_ = std::move(plants);
  witnesses_ = std::move(witnesses);
}

std::int64_t PerturbedSpectrum::max_witness_reach() const {
  std::int64_t reach = 0;
  for (const BlockWitness& w : witnesses_) reach = std::max(reach, w.reach());
  return reach;
}

BlockProbabilityReport estimate_block_probability(std::int64_t k,
                                                  const ShiftProfile& profile,
                                                  double tol, double d,
                                                  std::uint64_t trials,
                                                  std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("estimate needs k >= 2");
  if (!(tol > 0.0) || !(d > 0.0)) {
    throw std::invalid_argument("estimate needs tol > 0 and d > 0");
  }
  // Fixed pair enumeration shared by the analytic product and the trials.
  std::vector<std::int64_t> pair_q;
  for (std::int64_t s = -(k - 1); s <= k - 1; ++s) {
    if (s == 0) continue;
    for (std::int64_t q = -(k - 1); q <= k - 1; ++q) pair_q.push_back(q);
  }
  if (pair_q.size() > (1u << 23)) {
    throw std::invalid_argument("estimate k too large for trial addressing");
  }

  BlockProbabilityReport report;
  report.k = k;
  report.tolerance = tol;
  report.d = d;
  report.profile_name = profile.name;
  report.trials = trials;

  double p = 1.0;
  for (const std::int64_t q : pair_q) {
    const double s = profile.sigma(q);
    const double overlap =
        std::max(0.0, std::min(s + tol, d) - std::max(s - tol, -d));
    p *= overlap / (2.0 * d);
  }
  report.p_analytic = p;

  const CounterRng rng(seed);
  report.successes = parallel_reduce(
      trials, std::uint64_t{0},
      [&](std::size_t begin, std::size_t end) {
        std::uint64_t hits = 0;
        for (std::size_t t = begin; t < end; ++t) {
          bool ok = true;
          for (std::size_t i = 0; i < pair_q.size(); ++i) {
            const double u =
                rng.symmetric(CounterRng::kTrial, t, d,
                              static_cast<std::uint32_t>(i) << 8);
            if (!(std::fabs(u - profile.sigma(pair_q[i])) < tol)) {
              ok = false;
              break;  // counter addressing keeps early exit deterministic
            }
          }
          if (ok) ++hits;
        }
        return hits;
      },
      [](std::uint64_t a, std::uint64_t b) { return a + b; });

  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(report.successes) / n;
  report.p_hat = ph;
  const double z = 1.959963984540054;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (ph + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n)) / denom;
  report.wilson_low = std::max(0.0, center - half);
  report.wilson_high = std::min(1.0, center + half);
  return report;
}

}  // namespace mspec
